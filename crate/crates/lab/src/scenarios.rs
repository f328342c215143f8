use std::sync::Arc;

use lane_emden_core::exponents::{joseph_lundgren, singular_steady_coefficient};
use lane_emden_core::flow::{run_flow, scaling_test, verify_ball};
use lane_emden_core::geometry::rescale_field;
use lane_emden_core::heat::{decay_check, DecayOptions};
use lane_emden_core::mild::{norm_ratio_check, epsilon0_scan, picard_solve, ratio_spread};
use lane_emden_core::minimal::{classify, duhamel_consistency, minimal_solution, summarize_scan, ClassifyOptions, TruncationOptions};
use lane_emden_core::norms::{morrey_norm_radial, morrey_norm_sampled};
use lane_emden_core::{derive_params, make_grid, FlowParams, LinearStepper, RadialField, RadialGrid, Scheme};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::artifacts::{stream_seed, Artifacts};
use crate::config::ExperimentConfig;
use crate::error::LabError;

pub const SCENARIOS: &[&str] = &[
    "constants",
    "morrey",
    "decay",
    "simulate",
    "picard",
    "scan-eps",
    "ball-blowup",
    "scaling",
    "minimal",
    "scan-m",
];

struct Setup {
    params: FlowParams,
    grid: Arc<RadialGrid>,
    u0: RadialField,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, LabError> {
    let params = derive_params(cfg.p, cfg.n)?;
    let grid = make_grid(cfg.n, cfg.grid.radius, cfg.grid.cells, cfg.grid.grading)?;
    let u0 = cfg.profile()?.sample(&grid);
    Ok(Setup { params, grid, u0 })
}

fn classify_options(cfg: &ExperimentConfig) -> ClassifyOptions {
    ClassifyOptions {
        radius: cfg.grid.radius,
        cells: cfg.grid.cells,
        grading: cfg.grid.grading,
        horizon: cfg.classify_horizon,
        controls: cfg.controls.clone(),
        probes: cfg.probes.clone(),
    }
}

/// Runs one scenario, writing its artifacts into `out`; returns the summary printed
/// on stdout.
pub fn run(scenario: &str, cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    out.json("config.json", cfg)?;
    match scenario {
        "constants" => constants(cfg, out),
        "morrey" => morrey(cfg, out),
        "decay" => decay(cfg, out),
        "simulate" => simulate(cfg, out),
        "picard" => picard(cfg, out),
        "scan-eps" => scan_eps(cfg, out),
        "ball-blowup" => ball(cfg, out),
        "scaling" => scaling(cfg, out),
        "minimal" => minimal(cfg, out),
        "scan-m" => scan_m(cfg, out),
        other => Err(LabError::Config(format!("unknown scenario {other}"))),
    }
}

fn constants(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let fp = derive_params(cfg.p, cfg.n)?;
    let c = singular_steady_coefficient(&fp)?;
    let p_jl = joseph_lundgren(cfg.n);
    // serde_json writes a non-finite p_jl as null
    let v = json!({
        "alpha": fp.alpha,
        "lambda": fp.lambda,
        "mu": fp.mu,
        "two_star": fp.two_star,
        "p_jl": p_jl,
        "c_star_quoted": c.quoted,
        "c_star_residual": c.residual_free,
    });
    out.json("constants.json", &v)?;
    Ok(v)
}

fn morrey(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let lam = cfg.lambda.unwrap_or(s.params.lambda);
    let radial = morrey_norm_radial(&s.u0, cfg.q, lam)?;
    let seed = stream_seed(cfg.seed, "morrey");
    let sampled = morrey_norm_sampled(&s.u0, cfg.q, lam, cfg.samples, seed)?;
    out.csv(
        "morrey_profile.csv",
        &["radius", "quotient"],
        radial.profile.iter().map(|(r, q)| [*r, *q]),
    )?;
    let v = json!({
        "q": cfg.q,
        "lambda": lam,
        "centered": { "value": radial.value, "argmax_radius": radial.argmax_radius },
        "sampled": {
            "value": sampled.value,
            "argmax_radius": sampled.argmax_radius,
            "argmax_center_offset": sampled.argmax_center_offset,
            "samples": cfg.samples,
            "stream_seed": seed,
        },
    });
    out.json("morrey.json", &v)?;
    Ok(v)
}

fn decay(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let opts = DecayOptions {
        scheme: cfg.controls.scheme,
        ..DecayOptions::default()
    };
    let prof = decay_check(&s.u0, &s.params, &cfg.times, opts)?;
    out.csv(
        "decay.csv",
        &["t", "scaled_sup", "morrey"],
        prof.iter().map(|d| [d.t, d.scaled_sup, d.morrey]),
    )?;
    let hi = prof.iter().map(|d| d.scaled_sup).fold(f64::MIN, f64::max);
    let lo = prof.iter().map(|d| d.scaled_sup).fold(f64::MAX, f64::min);
    let v = json!({ "points": prof.len(), "scaled_sup_max_over_min": hi / lo });
    out.json("decay.json", &v)?;
    Ok(v)
}

fn simulate(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let (traj, report) = run_flow(&s.u0, &s.params, cfg.horizon, &cfg.controls)?;
    let rows = (0..traj.sup_norm.len()).map(|k| {
        let dt = if k == 0 { 0.0 } else { traj.dt_history[k - 1] };
        [traj.sup_norm[k].0, traj.sup_norm[k].1, traj.l2_norm[k].1, traj.energy[k].1, dt]
    });
    out.csv("trajectory.csv", &["t", "sup", "l2", "energy", "dt"], rows)?;
    out.csv(
        "final_field.csv",
        &["r", "u"],
        s.grid.radii.iter().zip(&traj.final_field.values).map(|(r, u)| [*r, *u]),
    )?;
    out.json("report.json", &report)?;
    Ok(serde_json::to_value(&report).unwrap_or(Value::Null))
}

fn picard(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let (v, diag) = picard_solve(&s.u0, &s.params, cfg.t_end, &cfg.picard)?;
    out.csv(
        "increments.csv",
        &["iteration", "increment_pmu", "ratio", "increment_lp"],
        diag.increment_norms.iter().enumerate().map(|(k, inc)| {
            let ratio = if k == 0 { f64::NAN } else { diag.contraction_ratios[k - 1] };
            [(k + 1) as f64, *inc, ratio, diag.increment_lp_norms[k]]
        }),
    )?;
    // ten evenly spaced slices of the last iterate
    let stride = (v.len() / 10).max(1);
    let mut rows = Vec::new();
    for k in (0..v.len()).step_by(stride) {
        for (r, u) in s.grid.radii.iter().zip(&v.slices[k]) {
            rows.push([v.times[k], *r, *u]);
        }
    }
    out.csv("iterate.csv", &["t", "r", "v"], rows)?;
    out.json("diagnostics.json", &diag)?;
    Ok(json!({
        "converged": diag.converged,
        "iterates": diag.iterates,
        "contraction_ratios": diag.contraction_ratios,
        "final_pmu_norm": diag.final_pmu_norm,
        "residual": diag.residual,
    }))
}

fn scan_eps(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let scan = epsilon0_scan(&s.u0, &s.params, cfg.t_end, cfg.c_lo, cfg.c_hi, &cfg.picard)?;
    let bound = norm_ratio_check(&s.u0, &cfg.amps, &s.params, cfg.t_end, &cfg.picard)?;
    out.csv(
        "trace.csv",
        &["step", "amplitude", "converged"],
        scan.trace
            .iter()
            .enumerate()
            .map(|(k, (a, ok))| [k.to_string(), a.to_string(), ok.to_string()]),
    )?;
    out.json("scan.json", &scan)?;
    out.json("bound.json", &json!({ "entries": bound, "ratio_spread": ratio_spread(&bound) }))?;
    Ok(json!({
        "threshold": scan.threshold,
        "morrey_threshold": scan.morrey_threshold,
        "bracket": [scan.lo, scan.hi],
        "ratio_spread": ratio_spread(&bound),
    }))
}

fn ball(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let chk = verify_ball(&s.u0, &s.params, &cfg.controls)?;
    out.json("ball.json", &chk)?;
    Ok(json!({
        "e0": chk.e0,
        "t_bound": chk.t_bound,
        "t_num": chk.t_num,
        "ok": chk.ok,
        "rate_exponent": chk.rate_exponent,
        "min_curve_ratio": chk.min_curve_ratio,
    }))
}

fn scaling(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let base = morrey_norm_radial(&s.u0, 2.0, s.params.lambda)?.value;
    let rows: Vec<[f64; 3]> = cfg
        .factors
        .par_iter()
        .map(|&r| -> Result<[f64; 3], LabError> {
            let dev = scaling_test(&s.u0, &s.params, r, cfg.t_check, &cfg.controls)?;
            let w = rescale_field(&s.u0, r, s.params.alpha)?;
            let m = morrey_norm_radial(&w, 2.0, s.params.lambda)?.value;
            Ok([r, dev, (m - base).abs() / base])
        })
        .collect::<Result<_, _>>()?;
    out.csv("scaling.csv", &["factor", "flow_deviation", "morrey_deviation"], rows.iter().copied())?;
    let v = json!({
        "t_check": cfg.t_check,
        "rows": rows.iter().map(|r| json!({"factor": r[0], "flow_deviation": r[1], "morrey_deviation": r[2]})).collect::<Vec<_>>(),
    });
    out.json("scaling.json", &v)?;
    Ok(v)
}

fn minimal(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let s = setup(cfg)?;
    let opts = TruncationOptions {
        probes: cfg.probes.iter().map(|x| x * cfg.grid.radius).collect(),
        keep_all: true,
        ..TruncationOptions::default()
    };
    let (runs, report) = minimal_solution(&s.u0, &cfg.levels, &s.params, cfg.t_small, &opts)?;
    let stepper = LinearStepper::new(s.grid.clone(), Scheme::ImplicitEuler, runs[0].dt)?;
    let mut duhamel = Vec::with_capacity(runs.len());
    for run in &runs {
        duhamel.push(duhamel_consistency(run, &s.params, &stepper)?);
        let t = &run.trajectory;
        out.csv(
            &format!("level_{}.csv", run.level),
            &["t", "sup", "l2"],
            t.sup_norm.iter().zip(&t.l2_norm).map(|(a, b)| [a.0, a.1, b.1]),
        )?;
    }
    let class = classify(&cfg.profile()?, &s.params, &cfg.levels, cfg.t_small, &classify_options(cfg))?;
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend(cfg.levels.iter().map(|l| format!("level_{l}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "probes.csv",
        &header,
        class.evidence.iter().map(|r| {
            let mut row = vec![r.t, r.x];
            row.extend(&r.values);
            row
        }),
    )?;
    out.json(
        "classification.json",
        &json!({ "classification": class, "monotonicity": report, "duhamel_residual": duhamel }),
    )?;
    Ok(json!({
        "outcome": class.outcome,
        "max_violation": report.max_violation,
        "duhamel_residual": duhamel,
        "resolution_limited": class.resolution_limited,
        "blowup_time": class.blowup_time,
    }))
}

fn scan_m(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value, LabError> {
    let params = derive_params(cfg.p, cfg.n)?;
    if cfg.c_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Config("c_grid must be strictly increasing".into()));
    }
    let opts = classify_options(cfg);
    let rows = cfg
        .c_grid
        .par_iter()
        .map(|&c| {
            let prof = lane_emden_core::Profile::Power {
                amp: c,
                exponent: params.alpha,
            };
            Ok((c, classify(&prof, &params, &cfg.levels, cfg.t_small, &opts)?.outcome))
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let scan = summarize_scan(&params, rows);
    out.csv(
        "transitions.csv",
        &["c", "outcome"],
        scan.rows.iter().map(|(c, o)| [c.to_string(), format!("{o:?}")]),
    )?;
    out.json("scan.json", &scan)?;
    Ok(serde_json::to_value(&scan).unwrap_or(Value::Null))
}
