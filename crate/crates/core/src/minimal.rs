//! Truncated approximations `u_n`, their monotone limit (the minimal solution) and
//! the global / finite-time / instantaneous-complete blow-up classification.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, fabs, log, pow};

use crate::error::{ensure, Error, Result};
use crate::exponents::{singular_steady_coefficient, FlowParams};
use crate::flow::{run_flow, BlowupOutcome, Controls, Trajectory};
use crate::geometry::{make_grid, RadialField, RadialGrid, SpaceTimeField};
use crate::heat::{LinearStepper, Scheme};
use crate::mild::{duhamel, semigroup_ladder};
use crate::norms::{energy, lq_norm};
use crate::profile::Profile;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRun {
    pub level: f64,
    pub trajectory: Trajectory,
    /// `(t, x, u_n(x, t))` at the probe times and radii.
    pub probe_values: Vec<(f64, f64, f64)>,
    pub dt: f64,
    pub reaction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationOptions {
    /// Requested step; the run uses the largest uniform step not above it that
    /// lands on the horizon. `None` takes the order-preserving limit.
    pub dt: Option<f64>,
    pub reaction: bool,
    /// Probe radii.
    pub probes: Vec<f64>,
    /// Additional probe times, snapped to the nearest ladder time.
    pub probe_times: Vec<f64>,
    /// Keep every step (needed for the Duhamel check).
    pub keep_all: bool,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions {
            dt: None,
            reaction: true,
            probes: vec![0.25, 0.5, 0.75],
            probe_times: Vec::new(),
            keep_all: false,
        }
    }
}

/// `min(u^(p-1), n^(p-1))` for nonnegative `u`.
pub fn truncated_source(u: &[f64], p: f64, level: f64) -> Vec<f64> {
    let cap = pow(level, p - 1.0);
    u.iter().map(|&v| pow(v.max(0.0), p - 1.0).min(cap)).collect()
}

/// Step limit `1 / ((p-1) n^(p-2))` keeping the explicit truncated reaction monotone.
pub fn order_preserving_dt(p: f64, level: f64) -> f64 {
    1.0 / ((p - 1.0) * pow(level, p - 2.0))
}

fn check_nonnegative(u0: &RadialField) -> Result<()> {
    match u0.values.iter().position(|&v| v < 0.0) {
        Some(index) => Err(Error::SignChanging {
            index,
            value: u0.values[index],
        }),
        None => Ok(()),
    }
}

fn ladder(horizon: f64, dt: f64) -> (usize, f64) {
    let steps = (ceil(horizon / dt * (1.0 - 1e-12)) as usize).max(1);
    (steps, horizon / steps as f64)
}

struct Level {
    level: f64,
    u: Vec<f64>,
    st: SpaceTimeField,
    sup: Vec<(f64, f64)>,
    l2: Vec<(f64, f64)>,
    en: Vec<(f64, f64)>,
    probes: Vec<(f64, f64, f64)>,
}

/// Runs all levels in lockstep on one ladder. Returns the runs and the largest
/// violation of `u_n <= u_n'` over consecutive levels, nodes and steps.
fn run_levels(
    u0: &RadialField,
    levels: &[f64],
    params: &FlowParams,
    horizon: f64,
    opts: &TruncationOptions,
) -> Result<(Vec<TruncationRun>, f64)> {
    check_nonnegative(u0)?;
    ensure(horizon > 0.0, "horizon", horizon)?;
    if levels.windows(2).any(|w| !(w[1] > w[0])) || levels.is_empty() {
        return Err(Error::LevelsNotIncreasing);
    }
    let p = params.p;
    let top = levels[levels.len() - 1];
    let limit = order_preserving_dt(p, top);
    let requested = opts.dt.unwrap_or(limit);
    if opts.reaction && requested > limit * (1.0 + 1e-12) {
        return Err(Error::TimeStepTooLarge {
            dt: requested,
            limit,
        });
    }
    let (steps, dt) = ladder(horizon, requested);
    let s = LinearStepper::new(u0.grid.clone(), Scheme::ImplicitEuler, dt)?;
    let probe_steps: Vec<usize> = opts
        .probe_times
        .iter()
        .map(|&t| libm::round(t / dt).clamp(0.0, steps as f64) as usize)
        .chain(core::iter::once(steps))
        .collect();

    let mut runs: Vec<Level> = levels
        .iter()
        .map(|&level| {
            let u: Vec<f64> = u0.values.iter().map(|&v| v.min(level)).collect();
            let f = RadialField {
                grid: u0.grid.clone(),
                values: u.clone(),
            };
            let mut st = SpaceTimeField::new(u0.grid.clone());
            st.push(0.0, u.clone())?;
            Ok(Level {
                level,
                sup: vec![(0.0, f.sup_abs())],
                l2: vec![(0.0, lq_norm(&f, 2.0)?)],
                en: vec![(0.0, energy(&f, p))],
                u,
                st,
                probes: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;
    let record_probes = |lv: &mut Level, k: usize| {
        let t = k as f64 * dt;
        for &x in &opts.probes {
            let v = crate::geometry::interpolate(&u0.grid.radii, &lv.u, x);
            lv.probes.push((t, x, v));
        }
    };
    let mut violation: f64 = 0.0;
    for lv in runs.iter_mut() {
        if probe_steps.contains(&0) {
            record_probes(lv, 0);
        }
    }
    for k in 1..=steps {
        let t = k as f64 * dt;
        for lv in runs.iter_mut() {
            let src = opts.reaction.then(|| truncated_source(&lv.u, p, lv.level));
            lv.u = s.step_with_source(&lv.u, src.as_deref())?;
            let f = RadialField {
                grid: u0.grid.clone(),
                values: core::mem::take(&mut lv.u),
            };
            lv.sup.push((t, f.sup_abs()));
            lv.l2.push((t, lq_norm(&f, 2.0)?));
            lv.en.push((t, energy(&f, p)));
            lv.u = f.values;
            let keep = opts.keep_all || probe_steps.contains(&k);
            if keep {
                lv.st.push(t, lv.u.clone())?;
            }
            if probe_steps.contains(&k) {
                record_probes(lv, k);
            }
        }
        for w in runs.windows(2) {
            for (a, b) in w[0].u.iter().zip(&w[1].u) {
                violation = violation.max(a - b);
            }
        }
    }
    let grid = u0.grid.clone();
    let out = runs
        .into_iter()
        .map(|lv| TruncationRun {
            level: lv.level,
            trajectory: Trajectory {
                spacetime: lv.st,
                sup_norm: lv.sup,
                l2_norm: lv.l2,
                energy: lv.en,
                dt_history: vec![dt; steps],
                final_field: RadialField {
                    grid: grid.clone(),
                    values: lv.u,
                },
            },
            probe_values: lv.probes,
            dt,
            reaction: opts.reaction,
        })
        .collect();
    Ok((out, violation))
}

/// Implicit Euler diffusion with explicit source `min(u^(p-1), n^(p-1))` from data
/// `min(u0, n)` up to `horizon`.
pub fn run_truncated(
    u0: &RadialField,
    level: f64,
    params: &FlowParams,
    horizon: f64,
    opts: &TruncationOptions,
) -> Result<TruncationRun> {
    let (mut runs, _) = run_levels(u0, &[level], params, horizon, opts)?;
    Ok(runs.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeRow {
    pub t: f64,
    pub x: f64,
    /// One value per level, in level order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotonicityReport {
    pub levels: Vec<f64>,
    /// `max (u_n - u_n')` over consecutive levels `n < n'`, nodes and steps.
    pub max_violation: f64,
    pub rows: Vec<ProbeRow>,
}

fn probe_rows(runs: &[TruncationRun]) -> Vec<ProbeRow> {
    let first = &runs[0].probe_values;
    first
        .iter()
        .enumerate()
        .map(|(j, &(t, x, _))| ProbeRow {
            t,
            x,
            values: runs.iter().map(|r| r.probe_values[j].2).collect(),
        })
        .collect()
}

/// All levels on one `(grid, dt)` satisfying the order-preserving restriction for the
/// largest level, with the monotonicity-in-level report.
pub fn minimal_solution(
    u0: &RadialField,
    levels: &[f64],
    params: &FlowParams,
    horizon: f64,
    opts: &TruncationOptions,
) -> Result<(Vec<TruncationRun>, MonotonicityReport)> {
    let (runs, max_violation) = run_levels(u0, levels, params, horizon, opts)?;
    let rows = probe_rows(&runs);
    Ok((
        runs,
        MonotonicityReport {
            levels: levels.to_vec(),
            max_violation,
            rows,
        },
    ))
}

/// Relative sup-norm residual of `u_n(t) - S_t u_(0n) - ∫_0^t S_(t-s) f_n(u_n(s)) ds`
/// at the ladder times nearest `horizon/2` and `horizon`.
pub fn duhamel_consistency(run: &TruncationRun, params: &FlowParams, stepper: &LinearStepper) -> Result<f64> {
    let st = &run.trajectory.spacetime;
    if st.len() < 3 {
        return Err(Error::TooFewSlices { count: st.len() });
    }
    let steps = st.len() - 1;
    if st.uniform_dt().is_none() {
        return Err(Error::LadderMismatch {
            expected_dt: stepper.dt,
            found_dt: f64::NAN,
        });
    }
    let u0n = st.slice(0);
    let lin = semigroup_ladder(stepper, &u0n, steps)?;
    let m = st.grid.cells;
    let mut g = st.map(|_| 0.0);
    if run.reaction {
        for (out, u) in g.slices.iter_mut().zip(&st.slices) {
            *out = truncated_source(u, params.p, run.level);
            out[m] = 0.0;
        }
    }
    let d = duhamel(&g, stepper)?;
    let mut worst: f64 = 0.0;
    for k in [steps / 2, steps] {
        let scale = st.slices[k].iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
        let mut diff: f64 = 0.0;
        for i in 0..st.grid.len() {
            diff = diff.max(fabs(st.slices[k][i] - lin.slices[k][i] - d.slices[k][i]));
        }
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    GlobalBounded,
    FiniteTimeBlowup,
    InstantaneousComplete,
    Inconclusive,
}

impl Outcome {
    /// Order used to check that outcomes are monotone in the amplitude.
    fn rank(self) -> Option<u8> {
        match self {
            Outcome::GlobalBounded => Some(0),
            Outcome::FiniteTimeBlowup => Some(1),
            Outcome::InstantaneousComplete => Some(2),
            Outcome::Inconclusive => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub outcome: Outcome,
    /// Probe values per level at `t_small` (and at `T'/2` for finite-time blow-up).
    pub evidence: Vec<ProbeRow>,
    pub levels: Vec<f64>,
    pub t_small: f64,
    pub flow_outcome: BlowupOutcome,
    /// Blow-up time of the untruncated flow on the base grid, if any.
    pub blowup_time: Option<f64>,
    /// Same on the grid with twice as many cells.
    pub blowup_time_refined: Option<f64>,
    /// The blow-up time shrank by at least half under refinement: it is set by the
    /// grid, not by the data.
    pub resolution_limited: bool,
    /// Every probe ratio between consecutive levels is at least `10^(log_4(n'/n))`.
    pub diverging: bool,
    pub cauchy: bool,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub radius: f64,
    pub cells: usize,
    pub grading: f64,
    /// Horizon of the untruncated run.
    pub horizon: f64,
    pub controls: Controls,
    /// Probe radii as fractions of the domain radius; only those `>= 0.25` count.
    pub probes: Vec<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            radius: 1.0,
            cells: 1000,
            grading: 2.0,
            horizon: 10.0,
            controls: Controls::default(),
            probes: vec![0.25, 0.5, 0.75],
        }
    }
}

/// Successive gaps between levels shrink by at least half (or sit at rounding level).
fn is_cauchy(values: &[f64]) -> bool {
    let gaps: Vec<f64> = values.windows(2).map(|w| fabs(w[1] - w[0])).collect();
    gaps.windows(2).zip(values.iter().skip(2)).all(|(g, v)| {
        g[1] <= (0.5 * g[0]).max(1e-9 * (1.0 + fabs(*v)))
    })
}

fn is_diverging(values: &[f64], levels: &[f64]) -> bool {
    values.windows(2).zip(levels.windows(2)).all(|(v, n)| {
        // factor 10 per quadrupling of the level
        let need = pow(10.0, log(n[1] / n[0]) / log(4.0));
        v[0] > 0.0 && v[1] >= need * v[0]
    })
}

fn probe_table(
    u0: &RadialField,
    levels: &[f64],
    params: &FlowParams,
    t: f64,
    probes: &[f64],
) -> Result<(Vec<ProbeRow>, f64)> {
    let opts = TruncationOptions {
        probes: probes.to_vec(),
        ..TruncationOptions::default()
    };
    let (runs, viol) = run_levels(u0, levels, params, t, &opts)?;
    Ok((probe_rows(&runs), viol))
}

fn blowup_time(u0: &RadialField, params: &FlowParams, horizon: f64, controls: &Controls) -> Result<(BlowupOutcome, Option<f64>)> {
    let (_, rep) = run_flow(u0, params, horizon, controls)?;
    Ok((rep.outcome, match rep.outcome {
        BlowupOutcome::FiniteTimeBlowup => Some(rep.t_est.unwrap_or(rep.final_time)),
        _ => None,
    }))
}

/// Classifies nonnegative data into global, finite-time or instantaneous complete
/// blow-up, from the untruncated flow and the truncated levels.
pub fn classify(
    u0: &Profile,
    params: &FlowParams,
    levels: &[f64],
    t_small: f64,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    ensure(t_small > 0.0, "t_small", t_small)?;
    let grid: Arc<RadialGrid> = make_grid(params.n, opts.radius, opts.cells, opts.grading)?;
    let data = u0.sample(&grid);
    check_nonnegative(&data)?;
    let probes: Vec<f64> = opts
        .probes
        .iter()
        .filter(|&&x| x >= 0.25)
        .map(|x| x * opts.radius)
        .collect();

    let (flow_outcome, t_blow) = blowup_time(&data, params, opts.horizon, &opts.controls)?;
    let mut t_refined = None;
    let mut resolution_limited = false;
    if let Some(tb) = t_blow {
        let fine = make_grid(params.n, opts.radius, 2 * opts.cells, opts.grading)?;
        let (_, t2) = blowup_time(&u0.sample(&fine), params, 2.0 * tb, &opts.controls)?;
        t_refined = t2;
        resolution_limited = t2.is_some_and(|t2| t2 <= 0.5 * tb);
    }

    let (rows, mut violation) = probe_table(&data, levels, params, t_small, &probes)?;
    let diverging = !rows.is_empty() && rows.iter().all(|r| is_diverging(&r.values, levels));
    let cauchy_small = rows.iter().all(|r| is_cauchy(&r.values));
    let mut evidence = rows;
    let mut cauchy = cauchy_small;

    let outcome = if diverging && (resolution_limited || t_blow.is_none_or(|tb| t_small < tb)) {
        Outcome::InstantaneousComplete
    } else if let (Some(tb), false) = (t_blow, resolution_limited) {
        let (rows, v) = probe_table(&data, levels, params, 0.5 * tb, &probes)?;
        violation = violation.max(v);
        cauchy = rows.iter().all(|r| is_cauchy(&r.values));
        evidence.extend(rows);
        if tb < opts.horizon && cauchy {
            Outcome::FiniteTimeBlowup
        } else {
            Outcome::Inconclusive
        }
    } else if flow_outcome == BlowupOutcome::GlobalBounded && cauchy_small {
        Outcome::GlobalBounded
    } else {
        Outcome::Inconclusive
    };
    Ok(Classification {
        outcome,
        evidence,
        levels: levels.to_vec(),
        t_small,
        flow_outcome,
        blowup_time: t_blow,
        blowup_time_refined: t_refined,
        resolution_limited,
        diverging,
        cauchy,
        max_violation: violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginScan {
    pub rows: Vec<(f64, Outcome)>,
    /// Largest amplitude classified as global before the first other outcome.
    pub last_global: Option<f64>,
    /// Smallest amplitude classified as instantaneous complete blow-up.
    pub first_complete: Option<f64>,
    /// Outcomes never step back as `c` grows (inconclusive rows ignored).
    pub monotone: bool,
    /// `c` with `c^(p-2) = α(n-2-α)`.
    pub c_residual: f64,
    /// `α(n-2-α)` taken as the coefficient.
    pub c_quoted: f64,
    /// `sup_(|y|<=1) |y|^α w_0(y)` for the bubble `w_0 = 12(1 - |y|^2)`.
    pub bubble_m: f64,
}

/// `sup_(0<=r<=1) r^α · amp (1 - r^2)`, maximized at `r^2 = α/(α+2)`.
pub fn bubble_margin(amp: f64, alpha: f64) -> f64 {
    let r2 = alpha / (alpha + 2.0);
    amp * pow(r2, alpha / 2.0) * (1.0 - r2)
}

/// Classifies `c |x|^-α` for each `c` in `c_grid`.
pub fn margin_scan(
    params: &FlowParams,
    c_grid: &[f64],
    levels: &[f64],
    t_small: f64,
    opts: &ClassifyOptions,
) -> Result<MarginScan> {
    if c_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument {
            name: "c_grid",
            value: f64::NAN,
        });
    }
    let mut rows = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        let prof = Profile::Power {
            amp: c,
            exponent: params.alpha,
        };
        rows.push((c, classify(&prof, params, levels, t_small, opts)?.outcome));
    }
    Ok(summarize_scan(params, rows))
}

/// Builds the scan summary from classified rows (in increasing `c`).
pub fn summarize_scan(params: &FlowParams, rows: Vec<(f64, Outcome)>) -> MarginScan {
    let ranks: Vec<u8> = rows.iter().filter_map(|r| r.1.rank()).collect();
    let monotone = ranks.windows(2).all(|w| w[1] >= w[0]);
    let last_global = rows
        .iter()
        .take_while(|r| r.1 == Outcome::GlobalBounded)
        .last()
        .map(|r| r.0);
    let first_complete = rows
        .iter()
        .find(|r| r.1 == Outcome::InstantaneousComplete)
        .map(|r| r.0);
    let coef = singular_steady_coefficient(params);
    let (c_residual, c_quoted) = coef.map_or((f64::NAN, f64::NAN), |c| (c.residual_free, c.quoted));
    MarginScan {
        rows,
        last_global,
        first_complete,
        monotone,
        c_residual,
        c_quoted,
        bubble_m: bubble_margin(12.0, params.alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::derive_params;
    use crate::flow::run_flow;
    use proptest::prelude::*;

    fn p4n5() -> FlowParams {
        derive_params(4.0, 5).unwrap()
    }

    fn grid(m: usize) -> Arc<RadialGrid> {
        make_grid(5, 1.0, m, 2.0).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        let g = grid(64);
        let mut f = RadialField::from_fn(g.clone(), |_| 1.0);
        f.values[3] = -1.0;
        let o = TruncationOptions::default();
        assert!(matches!(run_truncated(&f, 4.0, &p4n5(), 0.01, &o), Err(Error::SignChanging { index: 3, .. })));
        let ok = RadialField::from_fn(g, |_| 1.0);
        let big = TruncationOptions { dt: Some(1.0), ..Default::default() };
        assert!(matches!(run_truncated(&ok, 4.0, &p4n5(), 0.01, &big), Err(Error::TimeStepTooLarge { .. })));
        assert_eq!(
            minimal_solution(&ok, &[8.0, 4.0], &p4n5(), 0.01, &o).unwrap_err(),
            Error::LevelsNotIncreasing
        );
    }

    #[test]
    fn zero_data_stay_zero() {
        let g = grid(64);
        let z = RadialField::zeros(g);
        let (runs, rep) = minimal_solution(&z, &[4.0, 8.0], &p4n5(), 0.01, &TruncationOptions::default()).unwrap();
        assert!(runs.iter().all(|r| r.trajectory.final_field.sup_abs() == 0.0));
        assert_eq!(rep.max_violation, 0.0);
    }

    #[test]
    fn levels_are_ordered_for_singular_data() {
        let g = grid(200);
        let f = Profile::Power { amp: 5.0, exponent: 1.0 }.sample(&g);
        let (_, rep) = minimal_solution(&f, &[4.0, 8.0], &p4n5(), 0.01, &TruncationOptions::default()).unwrap();
        assert!(rep.max_violation <= 1e-10);
    }

    #[test]
    fn unsaturated_run_matches_untruncated_flow() {
        let g = grid(200);
        let f = Profile::Bubble { amp: 1.0, support: 1.0 }.sample(&g);
        let opts = TruncationOptions { dt: Some(1e-5), ..Default::default() };
        // the order-preserving limit for this level is far below 1e-5
        assert!(run_truncated(&f, pow(2.0, 17.0), &p4n5(), 0.01, &opts).is_err());
        let run = run_truncated(&f, 16.0, &p4n5(), 0.05, &opts).unwrap();
        let c = Controls { dt_max: run.dt, ..Controls::default() };
        let (traj, _) = run_flow(&f, &p4n5(), 0.05, &c).unwrap();
        let a = &run.trajectory.final_field;
        let b = &traj.final_field;
        let scale = b.sup_abs();
        let d = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d <= 1e-6 * scale, "{d} {scale}");
    }

    #[test]
    fn small_data_levels_are_cauchy() {
        let g = grid(200);
        let f = Profile::Power { amp: 0.05, exponent: 1.0 }.sample(&g);
        let (_, rep) = minimal_solution(&f, &[4.0, 8.0, 16.0, 32.0], &p4n5(), 0.01, &TruncationOptions::default()).unwrap();
        for row in &rep.rows {
            assert!(is_cauchy(&row.values), "{row:?}");
        }
    }

    #[test]
    fn duhamel_consistency_linear_and_small() {
        let g = grid(100);
        let f = Profile::Bubble { amp: 2.0, support: 1.0 }.sample(&g);
        let lin = TruncationOptions { reaction: false, keep_all: true, dt: Some(1e-4), ..Default::default() };
        let run = run_truncated(&f, 4.0, &p4n5(), 0.01, &lin).unwrap();
        let s = LinearStepper::new(g.clone(), Scheme::ImplicitEuler, run.dt).unwrap();
        assert!(duhamel_consistency(&run, &p4n5(), &s).unwrap() <= 1e-10);
        let z = run_truncated(&RadialField::zeros(g.clone()), 4.0, &p4n5(), 0.01, &TruncationOptions { keep_all: true, dt: Some(1e-3), ..Default::default() }).unwrap();
        let s = LinearStepper::new(g.clone(), Scheme::ImplicitEuler, z.dt).unwrap();
        assert_eq!(duhamel_consistency(&z, &p4n5(), &s).unwrap(), 0.0);
        let nl = |dt: f64| {
            let o = TruncationOptions { keep_all: true, dt: Some(dt), ..Default::default() };
            let run = run_truncated(&f, 4.0, &p4n5(), 0.01, &o).unwrap();
            let s = LinearStepper::new(g.clone(), Scheme::ImplicitEuler, run.dt).unwrap();
            duhamel_consistency(&run, &p4n5(), &s).unwrap()
        };
        let (a, b) = (nl(2e-4), nl(1e-4));
        assert!(a <= 2e-2);
        assert!((1.5..=2.5).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn bounded_source_bound() {
        let g = grid(100);
        let f = Profile::Power { amp: 5.0, exponent: 1.0 }.sample(&g);
        let lv = 8.0;
        let run = run_truncated(&f, lv, &p4n5(), 0.01, &TruncationOptions::default()).unwrap();
        for &(t, s) in &run.trajectory.sup_norm {
            assert!(s <= lv + t * pow(lv, 3.0) + 1e-8);
        }
    }

    #[test]
    fn cauchy_and_divergence_rules() {
        assert!(is_cauchy(&[1.0, 1.5, 1.6, 1.61]));
        assert!(!is_cauchy(&[1.0, 1.5, 2.5]));
        assert!(is_cauchy(&[2.0, 2.0, 2.0]));
        assert!(is_diverging(&[1.0, 10.0, 100.0], &[16.0, 64.0, 256.0]));
        assert!(!is_diverging(&[1.0, 9.0, 100.0], &[16.0, 64.0, 256.0]));
    }

    #[test]
    fn bubble_margin_value() {
        // 12 (1/√3)(2/3) for α = 1
        assert!((bubble_margin(12.0, 1.0) - 12.0 * (2.0 / 3.0) / libm::sqrt(3.0)).abs() < 1e-12);
    }

    #[test]
    fn scan_summary() {
        let fp = p4n5();
        let rows = vec![
            (0.05, Outcome::GlobalBounded),
            (0.5, Outcome::GlobalBounded),
            (1.0, Outcome::Inconclusive),
            (5.0, Outcome::InstantaneousComplete),
        ];
        let s = summarize_scan(&fp, rows);
        assert!(s.monotone);
        assert_eq!(s.last_global, Some(0.5));
        assert_eq!(s.first_complete, Some(5.0));
        assert_eq!(s.c_quoted, 2.0);
        let bad = summarize_scan(&fp, vec![(1.0, Outcome::InstantaneousComplete), (2.0, Outcome::GlobalBounded)]);
        assert!(!bad.monotone);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn monotone_in_data(
            a in proptest::collection::vec(0.0f64..20.0, 33),
            b in proptest::collection::vec(0.0f64..5.0, 33),
        ) {
            let g = make_grid(5, 1.0, 32, 2.0).unwrap();
            let u = RadialField::new(g.clone(), a.clone()).unwrap();
            let v = RadialField::new(g, a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
            let o = TruncationOptions::default();
            let ru = run_truncated(&u, 8.0, &p4n5(), 0.005, &o).unwrap();
            let rv = run_truncated(&v, 8.0, &p4n5(), 0.005, &o).unwrap();
            for (x, y) in ru.trajectory.final_field.values.iter().zip(&rv.trajectory.final_field.values) {
                prop_assert!(*x <= y + 1e-10);
            }
        }

        #[test]
        fn saturation_equivalence(amp in 0.1f64..2.0) {
            // level never reached: identical to the untruncated semi-implicit run
            let g = make_grid(5, 1.0, 32, 2.0).unwrap();
            let u = Profile::Bubble { amp, support: 1.0 }.sample(&g);
            let lv = 16.0;
            let run = run_truncated(&u, lv, &p4n5(), 0.005, &TruncationOptions::default()).unwrap();
            prop_assert!(run.trajectory.sup_norm.iter().all(|s| s.1 < lv));
            let s = LinearStepper::new(g.clone(), Scheme::ImplicitEuler, run.dt).unwrap();
            let mut w = u.values.clone();
            for _ in 0..run.trajectory.dt_history.len() {
                let src = crate::mild::power_source(&w, 4.0);
                w = s.step_with_source(&w, Some(&src)).unwrap();
            }
            for (x, y) in w.iter().zip(&run.trajectory.final_field.values) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
