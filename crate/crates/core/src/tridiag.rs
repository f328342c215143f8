//! Thomas algorithm for tridiagonal systems.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[len-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = b`. Fails on a vanishing or non-finite pivot.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut piv = self.diag[0];
        if !(libm::fabs(piv) > 1e-300) || !piv.is_finite() {
            return Err(Error::SolverBreakdown { row: 0 });
        }
        c.push(self.upper[0] / piv);
        d.push(b[0] / piv);
        for i in 1..n {
            piv = self.diag[i] - self.lower[i] * c[i - 1];
            if !(libm::fabs(piv) > 1e-300) || !piv.is_finite() {
                return Err(Error::SolverBreakdown { row: i });
            }
            c.push(if i + 1 < n { self.upper[i] / piv } else { 0.0 });
            d.push((b[i] - self.lower[i] * d[i - 1]) / piv);
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_and_round_trips() {
        let a = Tridiagonal {
            lower: vec![0.0, -1.0, -1.0, -1.0],
            diag: vec![4.0, 4.0, 4.0, 4.0],
            upper: vec![-1.0, -1.0, -1.0, 0.0],
        };
        let x = vec![1.0, -2.0, 3.0, 0.5];
        let b = a.mul(&x);
        let y = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = Tridiagonal {
            lower: vec![0.0, 1.0],
            diag: vec![1.0, 1.0],
            upper: vec![1.0, 0.0],
        };
        assert_eq!(a.solve(&[1.0, 1.0]).unwrap_err(), Error::SolverBreakdown { row: 1 });
    }
}
