//! Duhamel formulation and the Picard fixed-point construction of mild solutions.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, pow};

use crate::error::{ensure, Error, Result};
use crate::exponents::FlowParams;
use crate::flow::{reaction, run_flow, Controls};
use crate::geometry::{RadialField, SpaceTimeField};
use crate::heat::{LinearStepper, Scheme};
use crate::norms::{morrey_norm_radial, parabolic_morrey_norm, spacetime_lq_norm};

/// `w(t) = ∫_0^t S_(t-s) g(s) ds` on the ladder of `g`, by the trapezoid rule in the
/// source: `w_(k+1) = S(w_k + dt/2 g_k) + dt/2 g_(k+1)`.
pub fn duhamel(g: &SpaceTimeField, stepper: &LinearStepper) -> Result<SpaceTimeField> {
    if *g.grid != *stepper.grid {
        return Err(Error::GridMismatch);
    }
    check_ladder(g, stepper.dt)?;
    let m = g.grid.cells;
    let h = 0.5 * stepper.dt;
    let mut out = SpaceTimeField::new(g.grid.clone());
    let mut w = vec![0.0; m + 1];
    out.push(g.times[0], w.clone())?;
    for k in 0..g.len() - 1 {
        let pre: Vec<f64> = w.iter().zip(&g.slices[k]).map(|(a, b)| a + h * b).collect();
        w = stepper.step(&pre)?;
        for (a, b) in w.iter_mut().zip(&g.slices[k + 1]) {
            *a += h * b;
        }
        w[m] = 0.0;
        out.push(g.times[k + 1], w.clone())?;
    }
    Ok(out)
}

fn check_ladder(g: &SpaceTimeField, dt: f64) -> Result<()> {
    if g.len() < 2 {
        return Err(Error::TooFewSlices { count: g.len() });
    }
    match g.uniform_dt() {
        Some(found) if fabs(found - dt) <= 1e-9 * dt => Ok(()),
        Some(found) => Err(Error::LadderMismatch {
            expected_dt: dt,
            found_dt: found,
        }),
        None => Err(Error::LadderMismatch {
            expected_dt: dt,
            found_dt: f64::NAN,
        }),
    }
}

/// `S_(t_k) f` for `t_k = k dt`, `k = 0..=steps`. Crank-Nicolson ladders start with
/// four implicit Euler quarter steps.
pub fn semigroup_ladder(s: &LinearStepper, f: &RadialField, steps: usize) -> Result<SpaceTimeField> {
    let mut out = SpaceTimeField::new(f.grid.clone());
    let mut u = f.values.clone();
    out.push(0.0, u.clone())?;
    for k in 0..steps {
        if k == 0 && s.scheme == Scheme::CrankNicolson {
            let q = LinearStepper::new(s.grid.clone(), Scheme::ImplicitEuler, s.dt / 4.0)?;
            for _ in 0..4 {
                u = q.step(&u)?;
            }
        } else {
            u = s.step(&u)?;
        }
        out.push((k + 1) as f64 * s.dt, u.clone())?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PicardOptions {
    /// Uniform steps on `[0, T]`.
    pub steps: usize,
    pub scheme: Scheme,
    pub max_iter: usize,
    /// Relative tolerance on the parabolic Morrey norm of the increment.
    pub tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            steps: 500,
            scheme: Scheme::ImplicitEuler,
            max_iter: 50,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PicardDiagnostics {
    pub iterates: usize,
    /// Parabolic Morrey norms of `v_(k+1) - v_k`.
    pub increment_norms: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    /// Space-time `L^p` norms of the increments (secondary diagnostic).
    pub increment_lp_norms: Vec<f64>,
    pub converged: bool,
    pub final_pmu_norm: f64,
    /// Relative parabolic Morrey norm of `v - Φ(v)` at the last iterate.
    pub residual: f64,
}

fn sub(a: &SpaceTimeField, b: &SpaceTimeField) -> Result<SpaceTimeField> {
    a.zip_with(b, |x, y| x - y)
}

fn picard_map(
    w0: &SpaceTimeField,
    v: &SpaceTimeField,
    p: f64,
    s: &LinearStepper,
) -> Result<SpaceTimeField> {
    let mut g = v.clone();
    for sl in g.slices.iter_mut() {
        *sl = reaction(sl, p);
    }
    // Singular data make the source at t = 0 unbounded at the origin node; the
    // first interval uses the value at t_1 instead.
    g.slices[0] = g.slices[1].clone();
    let d = duhamel(&g, s)?;
    w0.zip_with(&d, |a, b| a + b)
}

/// Iterates beyond this size are treated as divergent (their powers overflow).
const DIVERGENCE_BOUND: f64 = 1e60;

fn finite(v: &SpaceTimeField) -> bool {
    v.slices
        .iter()
        .all(|s| s.iter().all(|x| x.is_finite() && fabs(*x) < DIVERGENCE_BOUND))
}

/// Iterates `v_0 = S_t u0`, `v_(k+1) = S_t u0 + duhamel(|v_k|^(p-2) v_k)` on `[0, T]`.
///
/// Stops on a relative increment below `tol`, on non-finite iterates, or once the
/// increment has grown three times in a row (leaving the contraction regime).
pub fn picard_solve(
    u0: &RadialField,
    params: &FlowParams,
    t_end: f64,
    options: &PicardOptions,
) -> Result<(SpaceTimeField, PicardDiagnostics)> {
    ensure(t_end > 0.0, "T", t_end)?;
    ensure(options.steps >= 3, "steps", options.steps as f64)?;
    let p = params.p;
    let mu = params.mu;
    let s = LinearStepper::new(u0.grid.clone(), options.scheme, t_end / options.steps as f64)?;
    let w0 = semigroup_ladder(&s, u0, options.steps)?;
    let mut v = w0.clone();
    let mut diag = PicardDiagnostics {
        iterates: 0,
        increment_norms: Vec::new(),
        contraction_ratios: Vec::new(),
        increment_lp_norms: Vec::new(),
        converged: false,
        final_pmu_norm: 0.0,
        residual: f64::NAN,
    };
    let mut growth = 0;
    for _ in 0..options.max_iter {
        let next = picard_map(&w0, &v, p, &s)?;
        diag.iterates += 1;
        if !finite(&next) {
            v = next;
            break;
        }
        let inc = sub(&next, &v)?;
        let inc_norm = parabolic_morrey_norm(&inc, p, mu)?;
        let size = parabolic_morrey_norm(&next, p, mu)?;
        if !inc_norm.is_finite() || !size.is_finite() {
            v = next;
            break;
        }
        diag.increment_lp_norms.push(spacetime_lq_norm(&inc, p)?);
        if let Some(&prev) = diag.increment_norms.last() {
            if prev > 0.0 {
                let ratio = inc_norm / prev;
                diag.contraction_ratios.push(ratio);
                growth = if ratio > 1.0 { growth + 1 } else { 0 };
            }
        }
        diag.increment_norms.push(inc_norm);
        v = next;
        if inc_norm <= options.tol * size || inc_norm == 0.0 {
            diag.converged = true;
            break;
        }
        if growth >= 3 {
            break;
        }
    }
    if finite(&v) {
        diag.final_pmu_norm = parabolic_morrey_norm(&v, p, mu)?;
        if diag.converged {
            let again = picard_map(&w0, &v, p, &s)?;
            let r = parabolic_morrey_norm(&sub(&again, &v)?, p, mu)?;
            diag.residual = if diag.final_pmu_norm > 0.0 { r / diag.final_pmu_norm } else { r };
        }
    } else {
        diag.final_pmu_norm = f64::INFINITY;
    }
    Ok((v, diag))
}

/// `sup_(t in [T/2, T]) sup|v - u| / sup|u|` between the Picard fixed point `v` and
/// the adaptive stepper `u`, compared on the Picard ladder.
pub fn compare_mild_vs_stepper(
    u0: &RadialField,
    params: &FlowParams,
    t_end: f64,
    options: &PicardOptions,
    controls: &Controls,
) -> Result<f64> {
    let (v, diag) = picard_solve(u0, params, t_end, options)?;
    if !diag.converged {
        return Err(Error::PicardNotConverged {
            amplitude: u0.sup_abs(),
        });
    }
    let times: Vec<f64> = v
        .times
        .iter()
        .copied()
        .filter(|&t| t >= 0.5 * t_end * (1.0 - 1e-12))
        .collect();
    let mut c = controls.clone();
    c.snapshot_times = times.clone();
    c.keep_all = false;
    let (traj, _) = run_flow(u0, params, t_end, &c)?;
    let mut worst: f64 = 0.0;
    for &t in &times {
        let a = v.slice(v.nearest(t));
        let b = traj.at(t).ok_or(Error::BlowupBeforeCheck {
            time: traj.final_time(),
        })?;
        let scale = b.sup_abs();
        let d = a
            .values
            .iter()
            .zip(&b.values)
            .fold(0.0f64, |m, (x, y)| m.max(fabs(x - y)));
        worst = worst.max(if scale > 0.0 { d / scale } else { d });
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormRatioEntry {
    pub amp: f64,
    /// `None` for `amp = 0` and for amplitudes where the iteration did not converge.
    pub ratio: Option<f64>,
    pub pmu_norm: f64,
    pub morrey_norm: f64,
}

/// Ratio of the parabolic `L^(p,μ)` norm of the mild solution to the `L^(2,λ)` norm
/// of its data, for each amplitude of `profile`.
pub fn norm_ratio_check(
    profile: &RadialField,
    amps: &[f64],
    params: &FlowParams,
    t_end: f64,
    options: &PicardOptions,
) -> Result<Vec<NormRatioEntry>> {
    let base = morrey_norm_radial(profile, 2.0, params.lambda)?.value;
    let mut out = Vec::with_capacity(amps.len());
    for &amp in amps {
        let morrey = fabs(amp) * base;
        if amp == 0.0 {
            out.push(NormRatioEntry {
                amp,
                ratio: None,
                pmu_norm: 0.0,
                morrey_norm: 0.0,
            });
            continue;
        }
        let (v, diag) = picard_solve(&profile.scale(amp), params, t_end, options)?;
        let ratio = diag.converged.then(|| parabolic_morrey_norm(&v, params.p, params.mu)).transpose()?;
        out.push(NormRatioEntry {
            amp,
            ratio: ratio.map(|r| r / morrey),
            pmu_norm: ratio.unwrap_or(f64::NAN),
            morrey_norm: morrey,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpsilonScan {
    /// Largest amplitude seen to converge and smallest seen to fail.
    pub lo: f64,
    pub hi: f64,
    /// Midpoint of the final bracket.
    pub threshold: f64,
    /// `threshold` times the `L^(2,λ)` norm of the profile.
    pub morrey_threshold: f64,
    /// `(amplitude, converged)` in evaluation order.
    pub trace: Vec<(f64, bool)>,
}

pub const BISECTION_STEPS: usize = 12;

/// Bisection on the amplitude `c` of `c·profile` for convergence of the Picard
/// iteration on `[0, T]`.
pub fn epsilon0_scan(
    profile: &RadialField,
    params: &FlowParams,
    t_end: f64,
    c_lo: f64,
    c_hi: f64,
    options: &PicardOptions,
) -> Result<EpsilonScan> {
    let converges = |c: f64| -> Result<bool> {
        Ok(picard_solve(&profile.scale(c), params, t_end, options)?.1.converged)
    };
    let mut trace = Vec::new();
    let a = converges(c_lo)?;
    trace.push((c_lo, a));
    let b = converges(c_hi)?;
    trace.push((c_hi, b));
    if !(c_lo < c_hi) || !a || b {
        return Err(Error::InvalidBracket { lo: c_lo, hi: c_hi });
    }
    let (mut lo, mut hi) = (c_lo, c_hi);
    for _ in 0..BISECTION_STEPS {
        // geometric midpoint: brackets may span decades
        let mid = libm::sqrt(lo * hi);
        let ok = converges(mid)?;
        trace.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let threshold = libm::sqrt(lo * hi);
    let base = morrey_norm_radial(profile, 2.0, params.lambda)?.value;
    Ok(EpsilonScan {
        lo,
        hi,
        threshold,
        morrey_threshold: threshold * base,
        trace,
    })
}

/// Ratio spread `max/min` of the defined ratios.
pub fn ratio_spread(entries: &[NormRatioEntry]) -> Option<f64> {
    let r: Vec<f64> = entries.iter().filter_map(|e| e.ratio).collect();
    if r.is_empty() {
        return None;
    }
    let mx = r.iter().cloned().fold(0.0, f64::max);
    let mn = r.iter().cloned().fold(f64::INFINITY, f64::min);
    Some(mx / mn)
}

/// `|u|^(p-2) u` helper exposed for callers assembling their own sources.
pub fn power_source(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&v| pow(fabs(v), p - 2.0) * v).collect()
}
