//! Symmetric tridiagonal eigenvalue bisection and the Thomas solver.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `diag` and squared off-diagonal `off_sq`
/// (`off_sq[i]` couples rows `i` and `i + 1`).
pub fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 {
            d - x
        } else {
            d - x - off_sq[i - 1] / q
        };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval enclosing the whole spectrum.
pub fn gershgorin(diag: &[f64], off_sq: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &d) in diag.iter().enumerate() {
        let left = if i > 0 {
            libm::sqrt(off_sq[i - 1])
        } else {
            0.0
        };
        let right = off_sq.get(i).map_or(0.0, |&e| libm::sqrt(e));
        lo = lo.min(d - left - right);
        hi = hi.max(d + left + right);
    }
    (lo, hi)
}

/// Smallest eigenvalue by Sturm bisection to absolute tolerance `tol`.
pub fn smallest_eigenvalue(diag: &[f64], off_sq: &[f64], tol: f64) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off_sq);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off_sq, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization of a tridiagonal matrix without pivoting, reusable for
/// many right-hand sides.
#[derive(Debug, Clone)]
pub struct Thomas {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl Thomas {
    /// `lower[i]` multiplies `x[i-1]` in row `i` (`lower[0]` unused),
    /// `upper[i]` multiplies `x[i+1]` (last entry unused).
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n);
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i] * prev
            };
            if !(pivot.abs() > 1e-300) {
                return Err(Error::SingularSystem { row: i });
            }
            let inv = 1.0 / pivot;
            inv_pivot.push(inv);
            prev = if i + 1 < n { upper[i] * inv } else { 0.0 };
            upper_scaled.push(prev);
        }
        Ok(Thomas {
            lower: lower.to_vec(),
            inv_pivot,
            upper_scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.len());
        self.solve_leading(rhs);
    }

    /// Solves the leading principal subsystem of size `rhs.len()`, whose
    /// factors are the leading parts of the full ones.
    pub fn solve_leading(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        debug_assert!(n <= self.len());
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_scaled[i] * rhs[i + 1];
        }
    }
}
