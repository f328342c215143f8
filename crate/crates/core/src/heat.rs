//! Linear heat semigroup on `B_R` with homogeneous Dirichlet data.
//!
//! Finite-volume radial Laplacian: node `i` exchanges flux
//! `κ_i (u_(i+1) - u_i)` with node `i+1` across the midpoint sphere. The stiffness
//! matrix `K` is symmetric, so `W^-1 K` is self-adjoint for the quadrature weights
//! `W`. At the origin the scheme reduces to `n u_rr`, the limit of
//! `u_rr + (n-1)/r u_r` under `u_r(0) = 0`. Node `M` holds the boundary value 0.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, fabs, pow, sin, sqrt};

use crate::error::{ensure, Error, Result};
use crate::exponents::FlowParams;
use crate::geometry::{dot_weights, RadialField, RadialGrid};
use crate::norms::morrey_norm_radial;
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }
}

/// One-step solver for `v_t = Δv` with a fixed time step.
#[derive(Debug, Clone)]
pub struct LinearStepper {
    pub grid: Arc<RadialGrid>,
    pub scheme: Scheme,
    pub dt: f64,
    flux: Vec<f64>,
    lhs: Tridiagonal,
}

impl LinearStepper {
    pub fn new(grid: Arc<RadialGrid>, scheme: Scheme, dt: f64) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", dt)?;
        let m = grid.cells;
        let flux: Vec<f64> = (0..m).map(|i| grid.flux_coefficient(i)).collect();
        let h = scheme.theta() * dt;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 0..m {
            diag[i] = grid.weights[i] + h * flux[i];
            if i > 0 {
                diag[i] += h * flux[i - 1];
                lower[i] = -h * flux[i - 1];
            }
            if i + 1 < m {
                upper[i] = -h * flux[i];
            }
        }
        Ok(LinearStepper {
            grid,
            scheme,
            dt,
            flux,
            lhs: Tridiagonal { lower, diag, upper },
        })
    }

    /// Same grid and scheme with another step.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        LinearStepper::new(self.grid.clone(), self.scheme, dt)
    }

    /// Stiffness product `(K u)_i`, the weak Laplacian integrated over dual cell `i`.
    pub fn stiffness(&self, u: &[f64]) -> Vec<f64> {
        let m = self.grid.cells;
        let mut out = vec![0.0; m + 1];
        for i in 0..m {
            let q = self.flux[i] * (u[i + 1] - u[i]);
            out[i] += q;
            out[i + 1] -= q;
        }
        out
    }

    /// Pointwise discrete Laplacian `W^-1 K u` at interior nodes (boundary entry 0).
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut k = self.stiffness(u);
        for (i, v) in k.iter_mut().enumerate() {
            *v /= self.grid.weights[i];
        }
        k[self.grid.cells] = 0.0;
        k
    }

    /// One step of `v_t = Δv + s` with the source treated explicitly.
    pub fn step_with_source(&self, u: &[f64], source: Option<&[f64]>) -> Result<Vec<f64>> {
        let m = self.grid.cells;
        if u.len() != m + 1 || source.is_some_and(|s| s.len() != m + 1) {
            return Err(Error::GridMismatch);
        }
        let w = &self.grid.weights;
        let mut rhs: Vec<f64> = (0..m).map(|i| w[i] * u[i]).collect();
        if self.scheme == Scheme::CrankNicolson {
            let mut boundary_free = u.to_vec();
            boundary_free[m] = 0.0;
            let k = self.stiffness(&boundary_free);
            for i in 0..m {
                rhs[i] += 0.5 * self.dt * k[i];
            }
        }
        if let Some(s) = source {
            for i in 0..m {
                rhs[i] += self.dt * w[i] * s[i];
            }
        }
        let mut x = self.lhs.solve(&rhs)?;
        x.push(0.0);
        Ok(x)
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.step_with_source(u, None)
    }
}

pub fn step_linear(s: &LinearStepper, f: &RadialField) -> Result<RadialField> {
    if *f.grid != *s.grid {
        return Err(Error::GridMismatch);
    }
    Ok(RadialField {
        grid: f.grid.clone(),
        values: s.step(&f.values)?,
    })
}

/// Number of full steps and the length of the trailing partial step to reach `t`.
pub(crate) fn step_plan(dt: f64, t: f64) -> (usize, f64) {
    let ratio = t / dt;
    let full = libm::round(ratio);
    if fabs(ratio - full) <= 1e-9 * ratio.max(1.0) {
        (full as usize, 0.0)
    } else {
        let k = libm::floor(ratio);
        (k as usize, t - k * dt)
    }
}

/// `S_t f`: full steps of `s.dt` followed by one partial step if needed.
pub fn semigroup(s: &LinearStepper, f: &RadialField, t: f64) -> Result<RadialField> {
    ensure(t >= 0.0, "t", t)?;
    if *f.grid != *s.grid {
        return Err(Error::GridMismatch);
    }
    let (full, rest) = step_plan(s.dt, t);
    let mut u = f.values.clone();
    for _ in 0..full {
        u = s.step(&u)?;
    }
    if rest > 0.0 {
        u = s.with_dt(rest)?.step(&u)?;
    }
    Ok(RadialField {
        grid: f.grid.clone(),
        values: u,
    })
}

/// `S_t f` where the first step is replaced by four implicit Euler quarter steps.
/// Removes the undamped high-frequency error Crank-Nicolson keeps from rough data.
pub fn semigroup_damped(s: &LinearStepper, f: &RadialField, t: f64) -> Result<RadialField> {
    ensure(t >= 0.0, "t", t)?;
    if t <= s.dt || s.scheme == Scheme::ImplicitEuler {
        let ie = LinearStepper::new(s.grid.clone(), Scheme::ImplicitEuler, s.dt)?;
        return semigroup(if s.scheme == Scheme::ImplicitEuler { s } else { &ie }, f, t);
    }
    let quarter = LinearStepper::new(s.grid.clone(), Scheme::ImplicitEuler, s.dt / 4.0)?;
    let mut g = f.clone();
    for _ in 0..4 {
        g = step_linear(&quarter, &g)?;
    }
    semigroup(s, &g, t - s.dt)
}

/// Smallest Dirichlet eigenvalue of `-W^-1 K` by inverse power iteration.
pub fn smallest_dirichlet_eigenvalue(grid: &Arc<RadialGrid>) -> Result<f64> {
    // (-K) x = W v with the implicit Euler matrix at a huge step approximates -K
    let m = grid.cells;
    let flux: Vec<f64> = (0..m).map(|i| grid.flux_coefficient(i)).collect();
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for i in 0..m {
        diag[i] = flux[i];
        if i > 0 {
            diag[i] += flux[i - 1];
            lower[i] = -flux[i - 1];
        }
        if i + 1 < m {
            upper[i] = -flux[i];
        }
    }
    let a = Tridiagonal { lower, diag, upper };
    let w = &grid.weights[..m];
    let mut v = vec![1.0; m];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let rhs: Vec<f64> = v.iter().zip(w).map(|(x, w)| x * w).collect();
        let x = a.solve(&rhs)?;
        let num = dot_weights(w, &v.iter().zip(&x).map(|(a, b)| a * b).collect::<Vec<_>>());
        let den = dot_weights(w, &x.iter().map(|a| a * a).collect::<Vec<_>>());
        let next = num / den;
        let norm = sqrt(den);
        v = x.iter().map(|a| a / norm).collect();
        if fabs(next - lambda) <= 1e-13 * next {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}

/// `G(x,t) = (4πt)^(-n/2) exp(-|x|^2/(4t))`.
pub fn gaussian_kernel(x: f64, t: f64, n: usize) -> f64 {
    pow(4.0 * PI * t, -(n as f64) / 2.0) * exp(-x * x / (4.0 * t))
}

/// `sup_(s>=0) (1+s)^n (4π)^(-n/2) e^(-s^2/4)`, so that `G(x,t) <= C (|x|+√t)^(-n)`.
///
/// The maximizer solves `n/(1+s) = s/2`.
pub fn gaussian_bound_constant(n: usize) -> f64 {
    let nf = n as f64;
    let s = (-1.0 + sqrt(1.0 + 8.0 * nf)) / 2.0;
    pow(1.0 + s, nf) * pow(4.0 * PI, -nf / 2.0) * exp(-s * s / 4.0)
}

/// Average of `G(x - y', t)` over the sphere `|y'| = y`, evaluated at `|x| = x`.
///
/// Reduces to `∫_0^π G(d(θ)) sin^(n-2)θ dθ / ∫_0^π sin^(n-2)θ dθ` with
/// `d(θ)^2 = x^2 + y^2 - 2xy cos θ`; composite Simpson rule.
pub fn spherical_gaussian_average(x: f64, y: f64, t: f64, n: usize) -> f64 {
    const PANELS: usize = 4000;
    let h = PI / PANELS as f64;
    let k = n as f64 - 2.0;
    let base = gaussian_kernel(x - y, t, n);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..=PANELS {
        let th = j as f64 * h;
        let c = if j == 0 || j == PANELS {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let s = pow(sin(th), k);
        // d^2 - (x-y)^2 = 2xy (1 - cos θ)
        num += c * s * exp(-x * y * (1.0 - cos(th)) / (2.0 * t));
        den += c * s;
    }
    base * num / den
}

/// Column `Γ_h(·, r_j, t)` of the discrete Dirichlet Green operator: the semigroup
/// applied to a unit-mass delta on the dual cell of node `j`.
pub fn green_column(s: &LinearStepper, y_index: usize, t: f64) -> Result<RadialField> {
    if y_index == 0 || y_index >= s.grid.cells {
        return Err(Error::InvalidArgument {
            name: "y_index",
            value: y_index as f64,
        });
    }
    ensure(t > 0.0, "t", t)?;
    let mut delta = RadialField::zeros(s.grid.clone());
    delta.values[y_index] = 1.0 / s.grid.weights[y_index];
    semigroup_damped(s, &delta, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayPoint {
    pub t: f64,
    /// `t^(λ/4) sup |S_t f|`.
    pub scaled_sup: f64,
    /// Centered `L^(2,λ)` norm of `S_t f`.
    pub morrey: f64,
    /// `t^(1/2)` times the centered `L^(2,λ)` norm of `∂_r S_t f`, if requested.
    pub gradient_morrey: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    pub scheme: Scheme,
    /// Steps taken between consecutive output times.
    pub steps_per_interval: usize,
    pub gradient: bool,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            scheme: Scheme::ImplicitEuler,
            steps_per_interval: 200,
            gradient: false,
        }
    }
}

/// Realizes the `L^(2,λ) → L^∞` smoothing estimate as a profile in `t`.
///
/// The solution is carried from one output time to the next with a uniform step
/// on each interval, so log-spaced output times get log-spaced resolution.
pub fn decay_check(
    f: &RadialField,
    params: &FlowParams,
    t_grid: &[f64],
    options: DecayOptions,
) -> Result<Vec<DecayPoint>> {
    ensure(options.steps_per_interval > 0, "steps_per_interval", 0.0)?;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut u = f.clone();
    let mut t = 0.0;
    for &target in t_grid {
        ensure(target > t, "t_grid", target)?;
        let dt = (target - t) / options.steps_per_interval as f64;
        let s = LinearStepper::new(f.grid.clone(), options.scheme, dt)?;
        u = if t == 0.0 {
            semigroup_damped(&s, &u, target)?
        } else {
            semigroup(&s, &u, target - t)?
        };
        t = target;
        let gradient_morrey = if options.gradient {
            let g = radial_gradient(&u);
            Some(sqrt(t) * morrey_norm_radial(&g, 2.0, params.lambda)?.value)
        } else {
            None
        };
        out.push(DecayPoint {
            t,
            scaled_sup: pow(t, params.lambda / 4.0) * u.sup_abs(),
            morrey: morrey_norm_radial(&u, 2.0, params.lambda)?.value,
            gradient_morrey,
        });
    }
    Ok(out)
}

/// Centered-difference `|∂_r u|` at the nodes (one-sided at the ends, 0 at the origin).
pub fn radial_gradient(u: &RadialField) -> RadialField {
    let r = &u.grid.radii;
    let v = &u.values;
    let m = u.grid.cells;
    let mut g = vec![0.0; m + 1];
    for i in 1..m {
        g[i] = fabs((v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]));
    }
    g[m] = fabs((v[m] - v[m - 1]) / (r[m] - r[m - 1]));
    RadialField {
        grid: u.grid.clone(),
        values: g,
    }
}

/// Relative residual `max |Δ_h u + |u|^(p-2) u| / |u|^(p-1)` of `u = c r^(-α)` at the
/// interior nodes with `lo <= r <= hi`, using the discrete Laplacian of `grid`.
pub fn steady_residual(grid: &Arc<RadialGrid>, params: &FlowParams, c: f64, lo: f64, hi: f64) -> Result<f64> {
    ensure(0.0 < lo && lo < hi && hi < grid.radius, "interval", hi)?;
    let u = RadialField::from_singular_fn(grid.clone(), |r| c * pow(r, -params.alpha));
    let s = LinearStepper::new(grid.clone(), Scheme::ImplicitEuler, 1.0)?;
    let lap = s.laplacian(&u.values);
    let mut worst: f64 = 0.0;
    for (i, &r) in grid.radii.iter().enumerate() {
        if r < lo || r > hi {
            continue;
        }
        let src = pow(fabs(u.values[i]), params.p - 1.0);
        worst = worst.max(fabs(lap[i] + src) / src);
    }
    Ok(worst)
}
