//! `lane-emden`: scenario runner for the radial Lane-Emden heat flow numerics.

mod artifacts;
mod catalog;
mod config;
mod error;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::Artifacts;
use crate::config::{ExperimentConfig, ProfileKind};
use crate::error::LabError;

#[derive(Parser)]
#[command(name = "lane-emden", version, about = "Numerical experiments for u_t - Δu = |u|^(p-2)u on a ball")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exponents and singular steady coefficients
    Constants(Common),
    /// Morrey norm of the initial profile
    Morrey(Common),
    /// Heat semigroup decay profile
    Decay(Common),
    /// Nonlinear flow with blow-up detection
    Simulate(Common),
    /// Fixed-point iteration of the Duhamel map
    Picard(Common),
    /// Amplitude threshold for fixed-point convergence
    ScanEps(Common),
    /// Negative-energy blow-up against the L^2 bound
    BallBlowup(Common),
    /// Flow against its rescaled copy
    Scaling(Common),
    /// Truncated levels and blow-up classification
    Minimal(Common),
    /// Classification across amplitudes of c|x|^-α
    ScanM(Common),
    /// Print the scenario catalog
    List,
}

/// Flags shared by all scenarios. Set flags override the config file, which
/// overrides the scenario defaults.
#[derive(Args, Default)]
struct Common {
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory [default: lane-emden-out/<scenario>]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    profile: Option<ProfileKind>,
    #[arg(long)]
    amp: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    support: Option<f64>,
    /// CSV `r,value` for `--profile custom-csv`
    #[arg(long)]
    profile_csv: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    grading: Option<f64>,
    #[arg(long)]
    dt_max: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Picard interval end
    #[arg(long = "T", alias = "t-end")]
    t_end: Option<f64>,
    /// Picard time steps
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    #[arg(long)]
    t_small: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    amps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    factors: Option<Vec<f64>>,
    #[arg(long)]
    t_check: Option<f64>,
    #[arg(long)]
    c_lo: Option<f64>,
    #[arg(long)]
    c_hi: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

macro_rules! set {
    ($flag:expr => $slot:expr) => {
        if let Some(v) = $flag {
            $slot = v;
        }
    };
}

impl Common {
    fn apply(self, c: &mut ExperimentConfig) {
        set!(self.seed => c.seed);
        set!(self.p => c.p);
        set!(self.n => c.n);
        set!(self.profile => c.profile.kind);
        set!(self.amp => c.profile.amp);
        if self.exponent.is_some() {
            c.profile.exponent = self.exponent;
        }
        set!(self.support => c.profile.support);
        if self.profile_csv.is_some() {
            c.profile.path = self.profile_csv;
        }
        set!(self.radius => c.grid.radius);
        set!(self.cells => c.grid.cells);
        set!(self.grading => c.grid.grading);
        set!(self.dt_max => c.controls.dt_max);
        set!(self.horizon => c.horizon);
        set!(self.t_end => c.t_end);
        set!(self.steps => c.picard.steps);
        set!(self.levels => c.levels);
        set!(self.t_small => c.t_small);
        set!(self.c_grid => c.c_grid);
        set!(self.amps => c.amps);
        set!(self.factors => c.factors);
        set!(self.t_check => c.t_check);
        set!(self.c_lo => c.c_lo);
        set!(self.c_hi => c.c_hi);
        set!(self.samples => c.samples);
    }
}

fn run(name: &str, mut common: Common) -> Result<(), LabError> {
    let mut cfg = ExperimentConfig::load(name, common.config.take().as_deref())?;
    let out = common
        .out
        .take()
        .unwrap_or_else(|| PathBuf::from("lane-emden-out").join(name));
    common.apply(&mut cfg);
    let mut artifacts = Artifacts::create(&out)?;
    let summary = scenarios::run(name, &cfg, &mut artifacts)?;
    artifacts.finish(name)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match cli.cmd {
        Cmd::List => {
            print!("{}", catalog::render());
            return ExitCode::SUCCESS;
        }
        Cmd::Constants(c) => ("constants", c),
        Cmd::Morrey(c) => ("morrey", c),
        Cmd::Decay(c) => ("decay", c),
        Cmd::Simulate(c) => ("simulate", c),
        Cmd::Picard(c) => ("picard", c),
        Cmd::ScanEps(c) => ("scan-eps", c),
        Cmd::BallBlowup(c) => ("ball-blowup", c),
        Cmd::Scaling(c) => ("scaling", c),
        Cmd::Minimal(c) => ("minimal", c),
        Cmd::ScanM(c) => ("scan-m", c),
    };
    debug_assert!(scenarios::SCENARIOS.contains(&name));
    match run(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.to_json()).expect("error serializes"));
            ExitCode::from(2)
        }
    }
}
