use core::fmt;

/// Failure modes of the numerical routines.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Error {
    /// Space dimension below 3.
    Dimension { n: usize },
    /// Exponent not above the Sobolev exponent `two_star = 2n/(n-2)`.
    Subcritical { p: f64, two_star: f64 },
    /// A scalar argument is outside its admissible range.
    InvalidArgument { name: &'static str, value: f64 },
    /// Fewer than 16 cells requested.
    GridTooCoarse { cells: usize },
    /// Two fields or a field and an operator live on different grids.
    GridMismatch,
    /// Target grid radii are not a scaled copy of the source radii.
    NonNestedGrid,
    /// Too few time slices for a space-time functional.
    TooFewSlices { count: usize },
    /// Time slices are not on the uniform ladder the operator expects.
    LadderMismatch { expected_dt: f64, found_dt: f64 },
    /// Nonnegative data required.
    SignChanging { index: usize, value: f64 },
    /// Truncated reaction step violates `dt (p-1) n^(p-2) <= 1`.
    TimeStepTooLarge { dt: f64, limit: f64 },
    /// Ball's criterion needs negative energy.
    NonNegativeEnergy { energy: f64 },
    /// Tridiagonal elimination hit a non-positive pivot.
    SolverBreakdown { row: usize },
    /// A run blew up before the time at which it was to be compared.
    BlowupBeforeCheck { time: f64 },
    /// The fixed-point iteration did not converge where convergence was required.
    PicardNotConverged { amplitude: f64 },
    /// Bisection bracket does not straddle the convergence threshold.
    InvalidBracket { lo: f64, hi: f64 },
    /// Levels must be strictly increasing.
    LevelsNotIncreasing,
    /// Not enough samples for the requested fit or check.
    InsufficientData { needed: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { n } => write!(f, "space dimension n={n} must be at least 3"),
            Error::Subcritical { p, two_star } => write!(
                f,
                "exponent p={p} is not supercritical: need p > two_star = {two_star}"
            ),
            Error::InvalidArgument { name, value } => {
                write!(f, "argument {name}={value} is out of range")
            }
            Error::GridTooCoarse { cells } => {
                write!(f, "grid with {cells} cells is too coarse (need at least 16)")
            }
            Error::GridMismatch => write!(f, "operands are defined on different grids"),
            Error::NonNestedGrid => write!(
                f,
                "target grid is not a scaled copy of the source grid; enable interpolation"
            ),
            Error::TooFewSlices { count } => {
                write!(f, "space-time field has {count} slices, need at least 4")
            }
            Error::LadderMismatch { expected_dt, found_dt } => write!(
                f,
                "time ladder spacing {found_dt} does not match stepper dt {expected_dt}"
            ),
            Error::SignChanging { index, value } => {
                write!(f, "data must be nonnegative, found {value} at node {index}")
            }
            Error::TimeStepTooLarge { dt, limit } => {
                write!(f, "time step {dt} exceeds the order-preserving limit {limit}")
            }
            Error::NonNegativeEnergy { energy } => {
                write!(f, "initial energy {energy} is not negative")
            }
            Error::SolverBreakdown { row } => {
                write!(f, "tridiagonal solve broke down at row {row}")
            }
            Error::BlowupBeforeCheck { time } => {
                write!(f, "solution blew up at t={time} before the check time")
            }
            Error::PicardNotConverged { amplitude } => {
                write!(f, "fixed-point iteration did not converge (amplitude {amplitude})")
            }
            Error::InvalidBracket { lo, hi } => write!(
                f,
                "amplitudes [{lo}, {hi}] do not bracket the convergence threshold"
            ),
            Error::LevelsNotIncreasing => write!(f, "truncation levels must be strictly increasing"),
            Error::InsufficientData { needed, found } => {
                write!(f, "need at least {needed} samples, found {found}")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument { name, value })
    }
}
