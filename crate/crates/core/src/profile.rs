//! Named initial-data families.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::pow;

use crate::geometry::{interpolate, RadialField, RadialGrid};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Profile {
    Zero,
    Constant { value: f64 },
    /// `amp |x|^(-exponent)`, origin capped at the first interior node.
    Power { amp: f64, exponent: f64 },
    /// `amp (1 - |x|^2 / support^2)` inside `B_support`, zero outside.
    Bubble { amp: f64, support: f64 },
    /// `value` on `inner <= |x| <= outer`.
    Shell { value: f64, inner: f64, outer: f64 },
    /// Piecewise linear in `r` through the given samples.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn sample(&self, grid: &Arc<RadialGrid>) -> RadialField {
        let g = grid.clone();
        match self {
            Profile::Zero => RadialField::zeros(g),
            Profile::Constant { value } => RadialField::from_fn(g, |_| *value),
            Profile::Power { amp, exponent } => {
                RadialField::from_singular_fn(g, |r| amp * pow(r, -exponent))
            }
            Profile::Bubble { amp, support } => RadialField::from_fn(g, |r| {
                let s = r / support;
                if s < 1.0 {
                    amp * (1.0 - s * s)
                } else {
                    0.0
                }
            }),
            Profile::Shell { value, inner, outer } => {
                RadialField::from_fn(g, |r| if r >= *inner && r <= *outer { *value } else { 0.0 })
            }
            Profile::Tabulated { radii, values } => {
                RadialField::from_fn(g, |r| interpolate(radii, values, r))
            }
        }
    }

    /// Same family with the amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Profile {
        match self {
            Profile::Zero => Profile::Zero,
            Profile::Constant { value } => Profile::Constant { value: c * value },
            Profile::Power { amp, exponent } => Profile::Power {
                amp: c * amp,
                exponent: *exponent,
            },
            Profile::Bubble { amp, support } => Profile::Bubble {
                amp: c * amp,
                support: *support,
            },
            Profile::Shell { value, inner, outer } => Profile::Shell {
                value: c * value,
                inner: *inner,
                outer: *outer,
            },
            Profile::Tabulated { radii, values } => Profile::Tabulated {
                radii: radii.clone(),
                values: values.iter().map(|v| c * v).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;

    #[test]
    fn power_is_capped_at_origin() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let f = Profile::Power { amp: 2.0, exponent: 1.0 }.sample(&g);
        assert_eq!(f.values[0], f.values[1]);
        assert!((f.values[1] - 2.0 / g.radii[1]).abs() < 1e-12);
        assert!(f.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn bubble_vanishes_on_boundary() {
        let g = make_grid(5, 1.0, 64, 2.0).unwrap();
        let f = Profile::Bubble { amp: 12.0, support: 1.0 }.sample(&g);
        assert_eq!(f.values[0], 12.0);
        assert_eq!(*f.values.last().unwrap(), 0.0);
    }
}
