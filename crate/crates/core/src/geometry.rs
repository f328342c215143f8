//! Radial discretization of the ball `B_R(0)` in `R^n`.
//!
//! Nodes are graded towards the origin, `r_i = R (i/M)^g`. Each node owns the
//! spherical shell between the neighbouring midpoints ("dual cell"); the
//! quadrature weight of a node is the exact volume of that shell, so the weights
//! sum to `|B_R|` up to rounding.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{acos, cos, fabs, pow, sin};

use crate::error::{ensure, Error, Result};

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = 2π/n V_{n-2}
    let (mut v, mut k) = if n % 2 == 0 { (1.0, 0) } else { (2.0, 1) };
    while k < n {
        k += 2;
        v *= 2.0 * PI / k as f64;
    }
    v
}

/// Surface area of the unit sphere `S^(n-1)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Volume of `B_R(0)` in `R^n`.
pub fn ball_volume(n: usize, radius: f64) -> f64 {
    unit_ball_volume(n) * pow(radius, n as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialGrid {
    pub n: usize,
    pub radius: f64,
    pub cells: usize,
    pub grading: f64,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    /// Dual-cell edges: `edges[0] = 0`, `edges[i] = (r_(i-1) + r_i)/2`, `edges[M+1] = R`.
    pub edges: Vec<f64>,
}

pub fn make_grid(n: usize, radius: f64, cells: usize, grading: f64) -> Result<Arc<RadialGrid>> {
    if n < 3 {
        return Err(Error::Dimension { n });
    }
    ensure(radius > 0.0 && radius.is_finite(), "radius", radius)?;
    ensure(grading >= 1.0, "grading", grading)?;
    if cells < 16 {
        return Err(Error::GridTooCoarse { cells });
    }
    let m = cells as f64;
    let mut radii: Vec<f64> = (0..=cells)
        .map(|i| radius * pow(i as f64 / m, grading))
        .collect();
    radii[cells] = radius;

    let mut edges = Vec::with_capacity(cells + 2);
    edges.push(0.0);
    for i in 0..cells {
        edges.push(0.5 * (radii[i] + radii[i + 1]));
    }
    edges.push(radius);

    let c = unit_ball_volume(n);
    let nf = n as f64;
    let weights = (0..=cells)
        .map(|i| c * (pow(edges[i + 1], nf) - pow(edges[i], nf)))
        .collect();
    Ok(Arc::new(RadialGrid {
        n,
        radius,
        cells,
        grading,
        radii,
        weights,
        edges,
    }))
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same node layout on `B_(factor R)`.
    pub fn scaled(&self, factor: f64) -> Result<Arc<RadialGrid>> {
        make_grid(self.n, self.radius * factor, self.cells, self.grading)
    }

    /// Grid with twice as many cells and the same grading.
    pub fn refined(&self) -> Result<Arc<RadialGrid>> {
        make_grid(self.n, self.radius, 2 * self.cells, self.grading)
    }

    /// Flux coefficient between nodes `i` and `i+1`: `|S^(n-1)| m_i^(n-1) / (r_(i+1) - r_i)`.
    pub fn flux_coefficient(&self, i: usize) -> f64 {
        let m = self.edges[i + 1];
        unit_sphere_area(self.n) * pow(m, self.n as f64 - 1.0) / (self.radii[i + 1] - self.radii[i])
    }

    /// Measure of the dual cell of node `i` that lies inside `B_rho(0)`.
    pub fn cell_measure_within(&self, i: usize, rho: f64) -> f64 {
        let lo = self.edges[i];
        let hi = self.edges[i + 1];
        if rho <= lo {
            0.0
        } else if rho >= hi {
            self.weights[i]
        } else {
            unit_ball_volume(self.n) * (pow(rho, self.n as f64) - pow(lo, self.n as f64))
        }
    }

    /// Index of the dual cell containing `rho` (clamped to the last node).
    pub fn cell_index(&self, rho: f64) -> usize {
        let idx = self.edges.partition_point(|&e| e <= rho);
        idx.saturating_sub(1).min(self.cells)
    }

    /// True when `other` has the same layout on a radius scaled by `factor`.
    pub fn is_scaled_copy(&self, other: &RadialGrid, factor: f64) -> bool {
        self.n == other.n
            && self.cells == other.cells
            && self
                .radii
                .iter()
                .zip(&other.radii)
                .all(|(a, b)| fabs(a * factor - b) <= 1e-12 * (1.0 + fabs(*b)))
    }
}

/// A radial function sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        RadialField { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.radii.iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    /// Samples `f` at `r_1, ..., r_M` and caps the origin value at `f(r_1)`.
    /// Used for data that are singular at `r = 0`.
    pub fn from_singular_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = grid.radii.iter().map(|&r| if r > 0.0 { f(r) } else { 0.0 }).collect();
        values[0] = values[1];
        RadialField { grid, values }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(fabs(*v)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> RadialField {
        self.map(|v| c * v)
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// Linear interpolation in `r`; zero outside the domain.
    pub fn interpolate(&self, rho: f64) -> f64 {
        interpolate(&self.grid.radii, &self.values, rho)
    }
}

pub(crate) fn interpolate(radii: &[f64], values: &[f64], rho: f64) -> f64 {
    let last = radii.len() - 1;
    if rho > radii[last] {
        return 0.0;
    }
    if rho <= radii[0] {
        return values[0];
    }
    let j = radii.partition_point(|&r| r < rho).min(last);
    let (r0, r1) = (radii[j - 1], radii[j]);
    let s = (rho - r0) / (r1 - r0);
    values[j - 1] + s * (values[j] - values[j - 1])
}

/// `∫_(B_R) f dx ≈ Σ w_i f(r_i)`.
pub fn integrate(f: &RadialField) -> f64 {
    dot_weights(&f.grid.weights, &f.values)
}

pub(crate) fn dot_weights(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Prefix sums of `w_i g_i` for evaluating `∫_(B_rho(0)) g dx` at arbitrary `rho`,
/// with `g` piecewise constant on dual cells.
pub struct BallIntegrals<'a> {
    grid: &'a RadialGrid,
    density: &'a [f64],
    prefix: Vec<f64>,
}

impl<'a> BallIntegrals<'a> {
    pub fn new(grid: &'a RadialGrid, density: &'a [f64]) -> Self {
        let mut prefix = Vec::with_capacity(density.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for (w, g) in grid.weights.iter().zip(density) {
            acc += w * g;
            prefix.push(acc);
        }
        BallIntegrals { grid, density, prefix }
    }

    pub fn total(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    pub fn within(&self, rho: f64) -> f64 {
        if rho >= self.grid.radius {
            return self.total();
        }
        if rho <= 0.0 {
            return 0.0;
        }
        let i = self.grid.cell_index(rho);
        self.prefix[i] + self.density[i] * self.grid.cell_measure_within(i, rho)
    }
}

/// Time slices of radial fields on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: Arc<RadialGrid>,
    pub times: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
}

impl SpaceTimeField {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        SpaceTimeField {
            grid,
            times: Vec::new(),
            slices: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(&last) = self.times.last() {
            ensure(t > last, "time", t)?;
        }
        self.times.push(t);
        self.slices.push(values);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn slice(&self, k: usize) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.slices[k].clone(),
        }
    }

    pub fn last(&self) -> Option<RadialField> {
        (!self.is_empty()).then(|| self.slice(self.len() - 1))
    }

    /// Slice index whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &s) in self.times.iter().enumerate() {
            if fabs(s - t) < fabs(self.times[best] - t) {
                best = k;
            }
        }
        best
    }

    /// Pointwise combination of two fields with identical times and grid.
    pub fn zip_with(&self, other: &SpaceTimeField, f: impl Fn(f64, f64) -> f64) -> Result<SpaceTimeField> {
        if self.grid != other.grid || self.times != other.times {
            return Err(Error::GridMismatch);
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(SpaceTimeField {
            grid: self.grid.clone(),
            times: self.times.clone(),
            slices,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpaceTimeField {
        SpaceTimeField {
            grid: self.grid.clone(),
            times: self.times.clone(),
            slices: self
                .slices
                .iter()
                .map(|s| s.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0, |m, v| m.max(fabs(*v)))
    }

    /// Spacing of a uniform ladder, or `None` if the times are not uniform.
    pub fn uniform_dt(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let dt = (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| fabs(w[1] - w[0] - dt) <= 1e-9 * dt);
        uniform.then_some(dt)
    }
}

/// Scaled field `x ↦ R^(-α) f(x/R)` on the grid of `B_(R·radius)`.
pub fn rescale_field(f: &RadialField, factor: f64, alpha: f64) -> Result<RadialField> {
    ensure(factor > 0.0, "factor", factor)?;
    let target = f.grid.scaled(factor)?;
    rescale_onto(f, &target, factor, alpha, false)
}

/// Rescales `f` onto a given target grid. Nested targets (node-for-node scaled
/// copies) are exact; anything else requires `interpolate`.
pub fn rescale_onto(
    f: &RadialField,
    target: &Arc<RadialGrid>,
    factor: f64,
    alpha: f64,
    interpolate: bool,
) -> Result<RadialField> {
    ensure(factor > 0.0, "factor", factor)?;
    let amp = pow(factor, -alpha);
    if f.grid.is_scaled_copy(target, factor) {
        return Ok(RadialField {
            grid: target.clone(),
            values: f.values.iter().map(|v| amp * v).collect(),
        });
    }
    if !interpolate {
        return Err(Error::NonNestedGrid);
    }
    Ok(RadialField::from_fn(target.clone(), |r| amp * f.interpolate(r / factor)))
}

/// Scaled trajectory `(x, t) ↦ R^(-α) u(x/R, t/R^2)` on the grid of `B_(R·radius)`.
pub fn rescale_spacetime(u: &SpaceTimeField, factor: f64, alpha: f64) -> Result<SpaceTimeField> {
    ensure(factor > 0.0, "factor", factor)?;
    let amp = pow(factor, -alpha);
    Ok(SpaceTimeField {
        grid: u.grid.scaled(factor)?,
        times: u.times.iter().map(|t| factor * factor * t).collect(),
        slices: u
            .slices
            .iter()
            .map(|s| s.iter().map(|v| amp * v).collect())
            .collect(),
    })
}

/// `∫_0^φ sin^k θ dθ` by the reduction formula.
fn sin_power_integral(k: usize, phi: f64) -> f64 {
    let (s, c) = (sin(phi), cos(phi));
    let mut j = if k % 2 == 0 { phi } else { 1.0 - c };
    let mut m = if k % 2 == 0 { 0 } else { 1 };
    while m < k {
        m += 2;
        j = -pow(s, (m - 1) as f64) * c / m as f64 + (m - 1) as f64 / m as f64 * j;
    }
    j
}

/// Volume of the cap of an `n`-ball of radius `rho` cut at distance `a` from its
/// centre (the part beyond the hyperplane), `-rho <= a <= rho`.
fn cap_volume(n: usize, rho: f64, a: f64) -> f64 {
    if a >= rho {
        return 0.0;
    }
    if a <= -rho {
        return ball_volume(n, rho);
    }
    let phi = acos((a / rho).clamp(-1.0, 1.0));
    unit_ball_volume(n - 1) * pow(rho, n as f64) * sin_power_integral(n, phi)
}

/// Volume of `B_s(0) ∩ B_r(x)` in `R^n` with `|x| = d`.
pub fn lens_volume(n: usize, s: f64, r: f64, d: f64) -> f64 {
    if s <= 0.0 || r <= 0.0 {
        return 0.0;
    }
    if d >= s + r {
        return 0.0;
    }
    if d <= fabs(s - r) {
        return ball_volume(n, s.min(r));
    }
    // hyperplane position measured from the origin
    let a = (d * d + s * s - r * r) / (2.0 * d);
    cap_volume(n, s, a) + cap_volume(n, r, d - a)
}

/// Measures of the dual cells inside `B_r(x)`, `|x| = d`, for every node.
/// The entries add up to `|B_R ∩ B_r(x)|` exactly (up to rounding).
pub fn cell_measures_in_ball(grid: &RadialGrid, d: f64, r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    for i in 0..grid.len() {
        let hi = grid.edges[i + 1];
        let cur = lens_volume(grid.n, hi, r, d);
        out.push((cur - prev).max(0.0));
        prev = cur;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        fabs(a - b) <= tol * fabs(b).max(1e-300)
    }

    #[test]
    fn spacetime_rescale_roundtrip() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let mut u = SpaceTimeField::new(g.clone());
        for k in 0..4 {
            u.push(0.01 * k as f64, RadialField::from_fn(g.clone(), |r| 1.0 + r + k as f64).values)
                .unwrap();
        }
        let w = rescale_spacetime(&u, 0.5, 1.0).unwrap();
        assert!((w.times[3] - 0.0075).abs() < 1e-15);
        assert!((w.grid.radius - 0.5).abs() < 1e-15);
        let back = rescale_spacetime(&w, 2.0, 1.0).unwrap();
        for (a, b) in back.slices.iter().flatten().zip(u.slices.iter().flatten()) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn ball_volumes() {
        assert!(close(unit_ball_volume(3), 4.0 * PI / 3.0, 1e-15));
        assert!(close(unit_ball_volume(5), 8.0 * PI * PI / 15.0, 1e-15));
        assert!(close(unit_ball_volume(4), PI * PI / 2.0, 1e-15));
        assert!(close(unit_sphere_area(5), 8.0 * PI * PI / 3.0, 1e-15));
    }

    #[test]
    fn weights_sum_to_ball_volume() {
        let g = make_grid(5, 1.0, 1000, 2.0).unwrap();
        assert!(close(g.volume(), 8.0 * PI * PI / 15.0, 1e-10));
        let g3 = make_grid(3, 2.0, 100, 1.0).unwrap();
        assert!(close(g3.volume(), 32.0 * PI / 3.0, 1e-10));
        assert!(g.weights.iter().all(|&w| w >= 0.0));
        assert!(g.radii.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_coarse_grid() {
        assert_eq!(make_grid(5, 1.0, 15, 2.0).unwrap_err(), Error::GridTooCoarse { cells: 15 });
        assert!(make_grid(5, 1.0, 64, 0.5).is_err());
        assert!(make_grid(2, 1.0, 64, 1.0).is_err());
    }

    #[test]
    fn integrate_constants_and_zero() {
        let g = make_grid(5, 1.0, 1000, 2.0).unwrap();
        let one = RadialField::from_fn(g.clone(), |_| 1.0);
        assert!(fabs(integrate(&one) - 8.0 * PI * PI / 15.0) < 1e-8);
        assert_eq!(integrate(&RadialField::zeros(g)), 0.0);
    }

    #[test]
    fn integrate_inverse_square() {
        // ∫_(B_1) |x|^-2 dx = |S^4| / 3 in R^5
        let g = make_grid(5, 1.0, 1000, 2.0).unwrap();
        let f = RadialField::from_singular_fn(g, |r| 1.0 / (r * r));
        let exact = unit_sphere_area(5) / 3.0;
        assert!(close(integrate(&f), exact, 2e-3), "{}", integrate(&f));
    }

    #[test]
    fn ball_integrals_match_total_and_zero() {
        let g = make_grid(5, 1.0, 200, 2.0).unwrap();
        let dens = alloc::vec![1.0; g.len()];
        let bi = BallIntegrals::new(&g, &dens);
        assert!(close(bi.within(1.0), g.volume(), 1e-14));
        assert!(close(bi.within(0.5), ball_volume(5, 0.5), 1e-14));
        assert_eq!(bi.within(0.0), 0.0);
    }

    #[test]
    fn rescale_identity_and_power() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let f = RadialField::from_fn(g.clone(), |r| 1.0 - r * r);
        let same = rescale_field(&f, 1.0, 1.0).unwrap();
        assert_eq!(same.values, f.values);
        let p = RadialField::from_singular_fn(g.clone(), |r| 1.0 / r);
        let q = rescale_field(&p, 0.25, 1.0).unwrap();
        for (i, &r) in q.grid.radii.iter().enumerate().skip(1) {
            assert!(close(q.values[i], 1.0 / r, 1e-12));
        }
    }

    #[test]
    fn rescale_parabola_half() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let f = RadialField::from_fn(g, |r| 1.0 - r * r);
        let h = rescale_field(&f, 0.5, 1.0).unwrap();
        assert!(close(h.grid.radius, 0.5, 1e-15));
        for &rho in &[0.1, 0.25, 0.4] {
            // independent evaluation of 2(1 - 4 r^2)
            let expect = 2.0 * (1.0 - 4.0 * rho * rho);
            let got = h.interpolate(rho);
            assert!(fabs(got - expect) < 2e-3, "{rho}: {got} vs {expect}");
        }
    }

    #[test]
    fn rescale_round_trip_is_exact() {
        let g = make_grid(4, 1.0, 48, 2.0).unwrap();
        let f = RadialField::from_fn(g, |r| libm::exp(-r) * (1.0 - r));
        let back = rescale_field(&rescale_field(&f, 0.5, 0.7).unwrap(), 2.0, 0.7).unwrap();
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!(fabs(a - b) <= 1e-15 * (1.0 + fabs(*b)));
        }
    }

    #[test]
    fn rescale_onto_requires_nesting() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let other = make_grid(5, 0.5, 80, 2.0).unwrap();
        let f = RadialField::from_fn(g, |r| 1.0 - r * r);
        assert_eq!(rescale_onto(&f, &other, 0.5, 1.0, false).unwrap_err(), Error::NonNestedGrid);
        let h = rescale_onto(&f, &other, 0.5, 1.0, true).unwrap();
        assert!(fabs(h.interpolate(0.25) - 2.0 * 0.75) < 1e-2);
    }

    #[test]
    fn lens_volume_limits() {
        let n = 5;
        // disjoint, nested, and symmetric half-overlap cases
        assert_eq!(lens_volume(n, 1.0, 0.5, 2.0), 0.0);
        assert!(close(lens_volume(n, 1.0, 0.2, 0.3), ball_volume(n, 0.2), 1e-14));
        assert!(close(lens_volume(n, 0.2, 1.0, 0.3), ball_volume(n, 0.2), 1e-14));
        // two unit balls at distance 0: full ball
        assert!(close(lens_volume(n, 1.0, 1.0, 1e-12), ball_volume(n, 1.0), 1e-9));
        // r = s, d = 2s cos: symmetric lens is twice a cap
        let v = lens_volume(3, 1.0, 1.0, 1.0);
        // R^3: 2 caps of height 1/2: 2 π h^2 (3 - h)/3
        let h: f64 = 0.5;
        assert!(close(v, 2.0 * PI * h * h * (3.0 - h) / 3.0, 1e-13), "{v}");
    }

    #[test]
    fn cell_measures_sum_to_intersection() {
        let g = make_grid(5, 1.0, 128, 2.0).unwrap();
        let m = cell_measures_in_ball(&g, 0.6, 0.7);
        let total: f64 = m.iter().sum();
        assert!(close(total, lens_volume(5, 1.0, 0.7, 0.6), 1e-12));
        assert!(m.iter().all(|&v| v >= 0.0));
    }
}
