//! Nonlinear flow `u_t - Δu = |u|^(p-2) u`: adaptive semi-implicit stepping,
//! blow-up detection and rate fit, Ball's criterion and the scaling law.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, fabs, log, pow};

use crate::error::{Error, Result};
use crate::exponents::{ball_blowup_bound, ball_constant, l2_lower_bound, FlowParams};
use crate::geometry::{rescale_field, RadialField, SpaceTimeField};
use crate::heat::{LinearStepper, Scheme};
use crate::norms::{energy, lq_norm};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Controls {
    pub dt_max: f64,
    pub dt_min: f64,
    /// Sup-norm threshold above which a vanishing step declares blow-up.
    pub u_max: f64,
    /// Step rule `dt = min(dt_max, safety / sup^(p-2))`.
    pub safety: f64,
    pub scheme: Scheme,
    /// Times hit exactly and stored in the space-time record.
    pub snapshot_times: Vec<f64>,
    /// Store every step in the space-time record, not just snapshots.
    pub keep_all: bool,
    pub max_steps: usize,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            dt_max: 1e-4,
            dt_min: 1e-14,
            u_max: 1e8,
            safety: 0.1,
            scheme: Scheme::ImplicitEuler,
            snapshot_times: Vec::new(),
            keep_all: false,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Initial data, the snapshots (or every step), and the final state.
    pub spacetime: SpaceTimeField,
    pub sup_norm: Vec<(f64, f64)>,
    pub l2_norm: Vec<(f64, f64)>,
    pub energy: Vec<(f64, f64)>,
    /// `dt_history[k]` leads from sample `k` to sample `k+1`.
    pub dt_history: Vec<f64>,
    pub final_field: RadialField,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.sup_norm.last().map_or(0.0, |s| s.0)
    }

    /// Stored slice at time `t`, if one was recorded within `1e-12` relative.
    pub fn at(&self, t: f64) -> Option<RadialField> {
        let k = self.spacetime.nearest(t);
        let s = *self.spacetime.times.get(k)?;
        (fabs(s - t) <= 1e-12 * t.max(1.0)).then(|| self.spacetime.slice(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BlowupOutcome {
    GlobalBounded,
    FiniteTimeBlowup,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlowupReport {
    pub outcome: BlowupOutcome,
    pub t_est: Option<f64>,
    pub rate_exponent: Option<f64>,
    pub final_sup: f64,
    pub final_time: f64,
    pub steps: usize,
    /// Thresholds used to declare blow-up; conventions, not properties of the equation.
    pub u_max: f64,
    pub dt_min: f64,
}

/// Compensated running sum, keeps step times accurate near the blow-up time.
#[derive(Default)]
struct Clock {
    sum: f64,
    carry: f64,
}

impl Clock {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn now(&self) -> f64 {
        self.sum + self.carry
    }
}

pub(crate) fn reaction(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&v| pow(fabs(v), p - 2.0) * v).collect()
}

pub fn run_flow(
    u0: &RadialField,
    params: &FlowParams,
    horizon: f64,
    controls: &Controls,
) -> Result<(Trajectory, BlowupReport)> {
    crate::error::ensure(horizon > 0.0, "horizon", horizon)?;
    crate::error::ensure(controls.dt_max > 0.0, "dt_max", controls.dt_max)?;
    if u0.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "u0",
            value: f64::NAN,
        });
    }
    let p = params.p;
    let grid = u0.grid.clone();
    let mut snaps: Vec<f64> = controls
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s > 0.0 && s < horizon)
        .collect();
    snaps.sort_by(f64::total_cmp);
    snaps.push(horizon);
    let mut next_snap = 0;

    let mut st = SpaceTimeField::new(grid.clone());
    st.push(0.0, u0.values.clone())?;
    let mut u = u0.clone();
    let mut sup = u.sup_abs();
    let mut traj_sup = vec![(0.0, sup)];
    let mut traj_l2 = vec![(0.0, lq_norm(&u, 2.0)?)];
    let mut traj_e = vec![(0.0, energy(&u, p))];
    let mut dts = Vec::new();
    let mut clock = Clock::default();
    let mut max_sup = sup;
    let mut blown = false;

    while next_snap < snaps.len() && dts.len() < controls.max_steps {
        let t = clock.now();
        let rule = if sup > 0.0 {
            controls.safety / pow(sup, p - 2.0)
        } else {
            f64::INFINITY
        };
        let proposal = controls.dt_max.min(rule);
        if (sup > controls.u_max && proposal < controls.dt_min) || !sup.is_finite() {
            blown = true;
            break;
        }
        let target = snaps[next_snap];
        let mut dt = proposal;
        let mut hit = false;
        if t + dt >= target * (1.0 - 1e-14) {
            dt = target - t;
            hit = true;
        }
        if dt <= 0.0 {
            next_snap += 1;
            continue;
        }
        let s = LinearStepper::new(grid.clone(), controls.scheme, dt)?;
        let src = reaction(&u.values, p);
        u.values = s.step_with_source(&u.values, Some(&src))?;
        if hit {
            clock = Clock {
                sum: target,
                carry: 0.0,
            };
            next_snap += 1;
        } else {
            clock.add(dt);
        }
        let t = clock.now();
        sup = u.sup_abs();
        max_sup = max_sup.max(sup);
        dts.push(dt);
        traj_sup.push((t, sup));
        traj_l2.push((t, lq_norm(&u, 2.0)?));
        traj_e.push((t, energy(&u, p)));
        if hit || controls.keep_all {
            st.push(t, u.values.clone())?;
        }
    }
    let final_time = clock.now();
    if blown && st.times.last() != Some(&final_time) {
        st.push(final_time, u.values.clone())?;
    }
    let traj = Trajectory {
        spacetime: st,
        sup_norm: traj_sup,
        l2_norm: traj_l2,
        energy: traj_e,
        dt_history: dts,
        final_field: u,
    };
    let mut report = BlowupReport {
        outcome: BlowupOutcome::Inconclusive,
        t_est: None,
        rate_exponent: None,
        final_sup: sup,
        final_time,
        steps: traj.dt_history.len(),
        u_max: controls.u_max,
        dt_min: controls.dt_min,
    };
    if blown {
        report.outcome = BlowupOutcome::FiniteTimeBlowup;
        match fit_blowup_rate(&traj, controls.u_max / 100.0) {
            Some((t_est, rate)) => {
                report.t_est = Some(t_est);
                report.rate_exponent = Some(rate);
            }
            None => report.t_est = Some(final_time),
        }
    } else if next_snap >= snaps.len() && max_sup < controls.u_max / 10.0 {
        report.outcome = BlowupOutcome::GlobalBounded;
    }
    Ok((traj, report))
}

/// Least-squares fit of `log sup = a - β log(T - t)` with `T` free, over the samples
/// with `sup > threshold`. Returns `(T, β)`, or `None` without at least 10 samples
/// or without growth.
pub fn fit_blowup_rate(traj: &Trajectory, threshold: f64) -> Option<(f64, f64)> {
    let k0 = traj.sup_norm.iter().position(|s| s.1 > threshold)?;
    let sel = &traj.sup_norm[k0..];
    if sel.len() < 10 || sel.iter().any(|s| !(s.1 > threshold)) {
        return None;
    }
    // times relative to the first fitted sample, summed from the step history
    let mut tau = Vec::with_capacity(sel.len());
    let mut c = Clock::default();
    tau.push(0.0);
    for k in 1..sel.len() {
        let dt = traj
            .dt_history
            .get(k0 + k - 1)
            .copied()
            .unwrap_or(sel[k].0 - sel[k - 1].0);
        c.add(dt);
        tau.push(c.now());
    }
    let y: Vec<f64> = sel.iter().map(|s| log(s.1)).collect();
    let fit = fit_power_law(&tau, &y)?;
    Some((traj.sup_norm[k0].0 + fit.0, fit.1))
}

/// Fits `y = a - β log(T - τ)` for `T > τ_last`; returns `(T, β)`.
pub fn fit_power_law(tau: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = tau.len();
    if n < 3 {
        return None;
    }
    let my = y.iter().sum::<f64>() / n as f64;
    let vy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if vy <= 1e-24 * (1.0 + my * my) * n as f64 {
        return None;
    }
    let last = tau[n - 1];
    let span = last - tau[0];
    if !(span > 0.0) {
        return None;
    }
    // linear regression of y on x = -log(T - τ); returns (sse, β)
    let regress = |z: f64| -> (f64, f64) {
        let gap = exp(z);
        let x: Vec<f64> = tau.iter().map(|t| -log(last - t + gap)).collect();
        let mx = x.iter().sum::<f64>() / n as f64;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for (a, b) in x.iter().zip(y) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
        }
        let beta = sxy / sxx;
        (vy - beta * sxy, beta)
    };
    // T - τ_last = exp(z), scanned from far below the last step to far beyond the span
    let smallest = tau.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(span, f64::min);
    let (lo, hi) = (log(smallest * 1e-6), log(span * 1e3));
    let count = 600;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=count {
        let z = lo + (hi - lo) * k as f64 / count as f64;
        let e = regress(z).0;
        if e < best.0 {
            best = (e, z);
        }
    }
    let h = (hi - lo) / count as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (regress(c).0, regress(d).0);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = regress(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = regress(d).0;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    let z = 0.5 * (a + b);
    let beta = regress(z).1;
    if !(beta > 1e-12) || !beta.is_finite() {
        return None;
    }
    Some((last + exp(z), beta))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BallCheck {
    pub e0: f64,
    pub l2: f64,
    pub t_bound: f64,
    pub t_num: f64,
    /// `T_num <= 1.05 T_bound`.
    pub ok: bool,
    /// Minimum over steps of `Δ(|u|_2^2/2)/Δt` divided by `c0 |u|_2^p`.
    pub min_differential_ratio: f64,
    /// Minimum over samples of `|u(t)|_2` divided by the lower-bound curve.
    pub min_curve_ratio: f64,
    pub rate_exponent: Option<f64>,
    pub report: BlowupReport,
}

/// Ball's criterion on the computed flow: negative energy, the blow-up time bound,
/// the differential inequality for `|u|_2^2` and the resulting lower-bound curve.
pub fn verify_ball(u0: &RadialField, params: &FlowParams, controls: &Controls) -> Result<BallCheck> {
    let e0 = energy(u0, params.p);
    if !(e0 < 0.0) {
        return Err(Error::NonNegativeEnergy { energy: e0 });
    }
    let l2 = lq_norm(u0, 2.0)?;
    let vol = u0.grid.volume();
    let t_bound = ball_blowup_bound(params, vol, l2)?;
    let (traj, report) = run_flow(u0, params, 1.05 * t_bound, controls)?;
    let t_num = match report.outcome {
        BlowupOutcome::FiniteTimeBlowup => report.t_est.unwrap_or(report.final_time),
        _ => f64::INFINITY,
    };
    let c0 = ball_constant(params.p, vol);
    let p = params.p;
    let mut min_diff = f64::INFINITY;
    let mut min_curve = f64::INFINITY;
    for k in 0..traj.dt_history.len() {
        if traj.sup_norm[k + 1].1 > controls.u_max {
            break;
        }
        let (a, b) = (traj.l2_norm[k].1, traj.l2_norm[k + 1].1);
        let lhs = 0.5 * (b * b - a * a) / traj.dt_history[k];
        min_diff = min_diff.min(lhs / (c0 * pow(a, p)));
    }
    for &(t, v) in &traj.l2_norm {
        match l2_lower_bound(p, c0, l2, t) {
            Some(bound) => min_curve = min_curve.min(v / bound),
            None => break,
        }
    }
    Ok(BallCheck {
        e0,
        l2,
        t_bound,
        t_num,
        ok: t_num <= 1.05 * t_bound,
        min_differential_ratio: min_diff,
        min_curve_ratio: min_curve,
        rate_exponent: report.rate_exponent,
        report,
    })
}

/// Runs `u` on the grid of `u0` and `w` on the scaled grid of `B_(R·radius)` with
/// `w_0 = R^-α u0(·/R)`, and returns
/// `sup |w(·, R^2 t) - R^-α u(·/R, t)| / sup |R^-α u(·/R, t)|`.
pub fn scaling_test(
    u0: &RadialField,
    params: &FlowParams,
    factor: f64,
    t_check: f64,
    controls: &Controls,
) -> Result<f64> {
    crate::error::ensure(factor > 0.0 && factor <= 1.0, "R", factor)?;
    let w0 = rescale_field(u0, factor, params.alpha)?;
    let run_to = |f: &RadialField, t: f64| -> Result<RadialField> {
        let mut c = controls.clone();
        c.snapshot_times = vec![t];
        let (traj, report) = run_flow(f, params, t, &c)?;
        if report.outcome == BlowupOutcome::FiniteTimeBlowup || report.final_time < t {
            return Err(Error::BlowupBeforeCheck {
                time: report.final_time,
            });
        }
        Ok(traj.final_field)
    };
    let u = run_to(u0, t_check)?;
    let w = run_to(&w0, factor * factor * t_check)?;
    let amp = pow(factor, -params.alpha);
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in w.values.iter().zip(&u.values) {
        diff = diff.max(fabs(a - amp * b));
        scale = scale.max(fabs(amp * b));
    }
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::derive_params;
    use crate::geometry::make_grid;
    use crate::profile::Profile;
    use proptest::prelude::*;

    fn p4n5() -> FlowParams {
        derive_params(4.0, 5).unwrap()
    }

    #[test]
    fn zero_data_is_global() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let c = Controls {
            dt_max: 1e-2,
            ..Controls::default()
        };
        let (traj, rep) = run_flow(&RadialField::zeros(g), &p4n5(), 1.0, &c).unwrap();
        assert_eq!(rep.outcome, BlowupOutcome::GlobalBounded);
        assert!(traj.sup_norm.iter().all(|s| s.1 == 0.0));
        assert!((traj.final_time() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn synthetic_rate_fit() {
        let t: Vec<f64> = (0..60).map(|k| 1.0 - pow(0.8, k as f64)).collect();
        let y: Vec<f64> = t.iter().map(|s| -0.5 * log(1.0 - s)).collect();
        let (tt, beta) = fit_power_law(&t, &y).unwrap();
        assert!((tt - 1.0).abs() < 1e-6, "{tt}");
        assert!((beta - 0.5).abs() < 1e-6, "{beta}");
        let flat = vec![2.0; 60];
        assert!(fit_power_law(&t, &flat).is_none());
    }

    #[test]
    fn bubble_blows_up_before_ball_bound() {
        let g = make_grid(5, 1.0, 400, 2.0).unwrap();
        let u0 = Profile::Bubble { amp: 12.0, support: 1.0 }.sample(&g);
        let (traj, rep) = run_flow(&u0, &p4n5(), 0.6, &Controls::default()).unwrap();
        assert_eq!(rep.outcome, BlowupOutcome::FiniteTimeBlowup);
        let t = rep.t_est.unwrap();
        assert!(t > 0.0 && t <= 0.5365, "{t}");
        assert!(t >= traj.final_time());
        let rate = rep.rate_exponent.unwrap();
        assert!((rate - 0.5).abs() < 0.1, "{rate}");
        assert!(*traj.dt_history.last().unwrap() < 1e-14 * 10.0 || rep.final_sup > 1e8);
    }

    #[test]
    fn energy_decreases_along_flow() {
        let g = make_grid(5, 1.0, 200, 2.0).unwrap();
        let u0 = Profile::Bubble { amp: 8.0, support: 1.0 }.sample(&g);
        let (traj, _) = run_flow(&u0, &p4n5(), 0.02, &Controls::default()).unwrap();
        for w in traj.energy.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-6 * (1.0 + w[0].1.abs()), "{w:?}");
        }
    }

    #[test]
    fn odd_symmetry_is_exact() {
        let g = make_grid(5, 1.0, 100, 2.0).unwrap();
        let u0 = Profile::Bubble { amp: 3.0, support: 0.8 }.sample(&g);
        let c = Controls::default();
        let (a, _) = run_flow(&u0, &p4n5(), 0.01, &c).unwrap();
        let (b, _) = run_flow(&u0.scale(-1.0), &p4n5(), 0.01, &c).unwrap();
        for (x, y) in a.final_field.values.iter().zip(&b.final_field.values) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn small_singular_data_stay_bounded() {
        let g = make_grid(5, 1.0, 200, 2.0).unwrap();
        let u0 = Profile::Power { amp: 0.05, exponent: 1.0 }.sample(&g);
        let c = Controls {
            dt_max: 1e-3,
            ..Controls::default()
        };
        let (traj, rep) = run_flow(&u0, &p4n5(), 10.0, &c).unwrap();
        assert_eq!(rep.outcome, BlowupOutcome::GlobalBounded);
        assert!(traj.final_field.sup_abs() < 1e-3 * traj.sup_norm[0].1);
    }

    #[test]
    fn ball_check_rejects_positive_energy() {
        let g = make_grid(5, 1.0, 100, 2.0).unwrap();
        let u0 = Profile::Bubble { amp: 1.0, support: 1.0 }.sample(&g);
        assert!(matches!(
            verify_ball(&u0, &p4n5(), &Controls::default()),
            Err(Error::NonNegativeEnergy { .. })
        ));
    }

    #[test]
    fn scaling_identity_and_zero() {
        let g = make_grid(5, 1.0, 100, 2.0).unwrap();
        let u0 = Profile::Bubble { amp: 2.0, support: 1.0 }.sample(&g);
        let c = Controls::default();
        assert!(scaling_test(&u0, &p4n5(), 1.0, 0.01, &c).unwrap() <= 1e-12);
        assert_eq!(scaling_test(&RadialField::zeros(g), &p4n5(), 0.5, 0.01, &c).unwrap(), 0.0);
    }

    #[test]
    fn scaling_reports_early_blowup() {
        let g = make_grid(5, 1.0, 100, 2.0).unwrap();
        let u0 = Profile::Bubble { amp: 12.0, support: 1.0 }.sample(&g);
        assert!(matches!(
            scaling_test(&u0, &p4n5(), 0.5, 0.1, &Controls::default()),
            Err(Error::BlowupBeforeCheck { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn comparison_principle(
            a in proptest::collection::vec(0.0f64..2.0, 33),
            b in proptest::collection::vec(0.0f64..1.0, 33),
        ) {
            let g = make_grid(5, 1.0, 32, 2.0).unwrap();
            let u0 = RadialField::new(g.clone(), a.clone()).unwrap();
            let v0 = RadialField::new(g, a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
            let fp = p4n5();
            // common steps sized for the larger solution
            let mut u = u0.values.clone();
            let mut v = v0.values.clone();
            let mut t = 0.0;
            while t < 0.02 {
                let s = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
                let dt = (1.0 / ((fp.p - 1.0) * s * s)).min(1e-3);
                let st = LinearStepper::new(u0.grid.clone(), Scheme::ImplicitEuler, dt).unwrap();
                u = st.step_with_source(&u, Some(&reaction(&u, fp.p))).unwrap();
                v = st.step_with_source(&v, Some(&reaction(&v, fp.p))).unwrap();
                t += dt;
            }
            for (x, y) in u.iter().zip(&v) {
                prop_assert!(*x <= y + 1e-10);
            }
        }
    }
}
