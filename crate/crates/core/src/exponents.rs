//! Exponent relations of the supercritical flow and the closed-form constants
//! derived from them.

use crate::error::{Error, Result};
use libm::{pow, sqrt};

/// Exponent `p` and dimension `n` together with the derived scaling exponents.
///
/// `alpha = 2/(p-2)` is the scaling exponent of the flow, `lambda = 4/(p-2)` the
/// Morrey exponent for initial data and `mu = 2p/(p-2) = lambda + 2` the parabolic one.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowParams {
    pub p: f64,
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub two_star: f64,
}

/// Sobolev exponent `2n/(n-2)`.
pub fn two_star(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

pub fn derive_params(p: f64, n: usize) -> Result<FlowParams> {
    if n < 3 {
        return Err(Error::Dimension { n });
    }
    let two_star = two_star(n);
    if !(p > two_star) || !p.is_finite() {
        return Err(Error::Subcritical { p, two_star });
    }
    let alpha = 2.0 / (p - 2.0);
    let lambda = 2.0 * alpha;
    Ok(FlowParams {
        p,
        n,
        alpha,
        lambda,
        mu: lambda + 2.0,
        two_star,
    })
}

/// Joseph-Lundgren exponent: `2 + 4/(n - 4 - 2 sqrt(n-1))` for `n >= 11`,
/// infinite below.
pub fn joseph_lundgren(n: usize) -> f64 {
    if n <= 10 {
        return f64::INFINITY;
    }
    let n = n as f64;
    2.0 + 4.0 / (n - 4.0 - 2.0 * sqrt(n - 1.0))
}

/// Coefficients of the singular steady state `c |x|^(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingularCoefficient {
    /// `c` with `c^(p-2) = alpha (n - 2 - alpha)`; makes the steady residual vanish.
    pub residual_free: f64,
    /// `alpha (n - 2 - alpha)` taken verbatim as the coefficient.
    pub quoted: f64,
}

pub fn singular_steady_coefficient(params: &FlowParams) -> Result<SingularCoefficient> {
    let m = params.alpha * (params.n as f64 - 2.0 - params.alpha);
    if !(m > 0.0) {
        return Err(Error::InvalidArgument {
            name: "alpha",
            value: params.alpha,
        });
    }
    Ok(SingularCoefficient {
        residual_free: pow(m, 1.0 / (params.p - 2.0)),
        quoted: m,
    })
}

/// Relative residual of `-Δ(c r^-α) - (c r^-α)^(p-1)` against the reaction term,
/// evaluated with the exact identity `Δ r^-α = -α (n-2-α) r^(-α-2)`.
///
/// Both terms scale like `r^(-α-2)`, so the result does not depend on `r`.
pub fn singular_residual(params: &FlowParams, c: f64) -> f64 {
    let lap = params.alpha * (params.n as f64 - 2.0 - params.alpha) * c;
    let reaction = pow(c, params.p - 1.0);
    libm::fabs(lap - reaction) / reaction
}

/// Hölder constant `c0 = ((p-2)/p) vol^(1-p/2)` with `((p-2)/p) |u|_p^p >= c0 |u|_2^p`.
pub fn ball_constant(p: f64, volume: f64) -> f64 {
    (p - 2.0) / p * pow(volume, 1.0 - p / 2.0)
}

/// Upper bound `T = 1/(c0 (p-2)) |u0|_2^((2-p)/2)` on the blow-up time of data
/// with negative energy.
pub fn ball_blowup_bound(params: &FlowParams, volume: f64, l2norm: f64) -> Result<f64> {
    crate::error::ensure(volume > 0.0, "volume", volume)?;
    crate::error::ensure(l2norm > 0.0, "l2norm", l2norm)?;
    let c0 = ball_constant(params.p, volume);
    Ok(pow(l2norm, (2.0 - params.p) / 2.0) / (c0 * (params.p - 2.0)))
}

/// Lower bound on `|u(t)|_2` from the differential inequality behind Ball's criterion.
/// Returns `None` once the bound has become infinite.
pub fn l2_lower_bound(p: f64, c0: f64, l2_initial: f64, t: f64) -> Option<f64> {
    let base = pow(l2_initial, (2.0 - p) / 2.0) - c0 * (p - 2.0) * t;
    if base > 0.0 {
        Some(pow(base, -2.0 / (p - 2.0)))
    } else {
        None
    }
}
