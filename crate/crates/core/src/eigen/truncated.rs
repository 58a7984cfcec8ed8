use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{cos, exp, sin, sqrt};

use super::arccot;
use crate::error::ensure;
use crate::model::{GrowthParams, StepProfile};
use crate::roots::bisect;
use crate::tridiag::sturm_count;
use crate::{Error, Result};

/// Tolerance of the Sturm bisection.
const STURM_TOL: f64 = 1e-12;

/// Half-widths of the truncation ladder, measured in `x` units beyond the
/// non-constant part of the profile.
const LADDER_X: [f64; 7] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0];

/// Target grid spacing in `x` units times `sqrt(max m)`.
const SPACING_X: f64 = 0.02;

/// Stop tolerance on successive extrapolated ladder values.
const LADDER_TOL: f64 = 1e-5;

/// Smallest Dirichlet eigenvalue of `-L^-2 d^2/dy^2 - m(y)` on `(-R, R)`,
/// discretized with `n` cells.
pub fn lambda1_truncated(m: &StepProfile, length: f64, half_width: f64, n: usize) -> Result<f64> {
    ensure!(
        half_width.is_finite() && half_width > 0.0,
        "half-width must be positive, got {half_width}"
    );
    lambda1_truncated_on(m, length, -half_width, half_width, n)
}

/// As [`lambda1_truncated`] on an arbitrary interval `(lo, hi)`.
///
/// Second-order central differences on `n` cells; the potential at each node
/// is the exact mean of `m` over the node's dual cell `[y - h/2, y + h/2]`,
/// which keeps the error `O(h^2)` across jumps of `m`.
pub fn lambda1_truncated_on(
    m: &StepProfile,
    length: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<f64> {
    ensure!(
        length.is_finite() && length > 0.0,
        "length scale must be positive, got {length}"
    );
    ensure!(
        lo.is_finite() && hi.is_finite() && lo < hi,
        "empty interval ({lo}, {hi})"
    );
    ensure!(n >= 3, "at least 3 cells are required, got {n}");
    let h = (hi - lo) / n as f64;
    let k = 1.0 / (length * length * h * h);
    let diag: Vec<f64> = (1..n)
        .map(|i| {
            let y = lo + i as f64 * h;
            2.0 * k - m.average(y - 0.5 * h, y + 0.5 * h)
        })
        .collect();
    let off_sq = alloc::vec![k * k; n - 2];
    // -max m bounds the spectrum below; any diagonal entry bounds the
    // smallest eigenvalue above.
    let mut a = -m.max() - STURM_TOL;
    let mut b = diag.iter().copied().fold(f64::INFINITY, f64::min) + STURM_TOL;
    while b - a > STURM_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if sturm_count(&diag, &off_sq, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Trace of the truncation ladder behind [`lambda1_general`].
#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    /// Extra half-widths in `x` units on each side of the profile's jumps.
    pub half_widths: Vec<f64>,
    /// Coarse-grid Dirichlet eigenvalues, nonincreasing along the ladder.
    pub raw: Vec<f64>,
    /// Values extrapolated to zero spacing.
    pub extrapolated: Vec<f64>,
    /// Grid spacing in `y` units of the coarse grid.
    pub spacing: f64,
    pub estimate: f64,
}

/// Whole-line principal eigenvalue of `-L^-2 d^2/dy^2 - m` for a step
/// profile, as the limit of truncated Dirichlet eigenvalues.
pub fn lambda1_general(m: &StepProfile, length: f64) -> Result<f64> {
    lambda1_general_report(m, length).map(|r| r.estimate)
}

/// [`lambda1_general`] with the full ladder.
///
/// Each rung solves on the grid `h` and `h/2` and extrapolates in `h^2`.
/// The rungs share one node lattice aligned with the profile's jumps, so the
/// raw values decrease monotonically with the half-width. When the limit is
/// critical the truncation error is algebraic, `a/R^2 + b/R^3`, and is
/// removed by two further extrapolation passes in `R`; otherwise the raw
/// values settle exponentially fast and are used directly.
pub fn lambda1_general_report(m: &StepProfile, length: f64) -> Result<LadderReport> {
    ensure!(
        length.is_finite() && length > 0.0,
        "length scale must be positive, got {length}"
    );
    let tails_top = m.left_tail().max(m.right_tail());
    let (first, last) = match (m.breakpoints().first(), m.breakpoints().last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => (0.0, 0.0),
    };
    let h = aligned_spacing(m.breakpoints(), SPACING_X / sqrt(m.max()) / length);

    let mut report = LadderReport {
        half_widths: Vec::new(),
        raw: Vec::new(),
        extrapolated: Vec::new(),
        spacing: h,
        estimate: f64::NAN,
    };
    let mut once: Vec<f64> = Vec::new();
    let mut twice: Vec<f64> = Vec::new();

    for &rx in LADDER_X.iter() {
        let ry = rx / length;
        let left = libm::ceil(ry / h - 1e-9);
        let right = libm::ceil((last - first + ry) / h - 1e-9);
        let (lo, hi) = (first - left * h, first + right * h);
        let cells = (left + right) as usize;
        let coarse = lambda1_truncated_on(m, length, lo, hi, cells)?;
        let fine = lambda1_truncated_on(m, length, lo, hi, 2 * cells)?;
        let e = (4.0 * fine - coarse) / 3.0;
        if let Some(&prev) = report.raw.last() {
            debug_assert!(coarse <= prev + 1e-9, "ladder lost monotonicity");
        }
        report.half_widths.push(rx);
        report.raw.push(coarse);
        report.extrapolated.push(e);

        let k = report.extrapolated.len() - 1;
        if k >= 1 {
            let prev = report.extrapolated[k - 1];
            if (e - prev).abs() < 1e-9 {
                report.estimate = e.min(-tails_top);
                return Ok(report);
            }
            once.push((4.0 * e - prev) / 3.0);
        }
        if once.len() >= 2 {
            let n = once.len();
            twice.push((8.0 * once[n - 1] - once[n - 2]) / 7.0);
        }
        if twice.len() >= 2 {
            let n = twice.len();
            if (twice[n - 1] - twice[n - 2]).abs() < LADDER_TOL {
                report.estimate = twice[n - 1].min(-tails_top);
                return Ok(report);
            }
        }
    }
    let n = twice.len();
    Err(Error::NoConvergence {
        previous: twice[n - 2],
        last: twice[n - 1],
    })
}

/// Grid spacing at most `target` such that every breakpoint lies on the
/// lattice through the first one, when the breakpoints are commensurate.
fn aligned_spacing(breakpoints: &[f64], target: f64) -> f64 {
    let unit = commensurate_unit(breakpoints).unwrap_or(target);
    unit / libm::ceil(unit / target - 1e-9)
}

fn commensurate_unit(breakpoints: &[f64]) -> Option<f64> {
    if breakpoints.len() < 2 {
        return None;
    }
    let first = breakpoints[0];
    let d_min = breakpoints
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    (1..=16).map(|j| d_min / j as f64).find(|&u| {
        breakpoints.iter().all(|&b| {
            let q = (b - first) / u;
            (q - libm::round(q)).abs() < 1e-9 * q.abs().max(1.0)
        })
    })
}

/// Closed-form Dirichlet eigenpair on `(-R, R)` for the three-zone profile,
/// in the regime `lambda^R < -max(r1, r3)` where both outer pieces are
/// hyperbolic:
///
/// * `sinh(a (y + R)) / sinh(a R)` on `(-R, 0]`,
/// * `sin(b y + theta) / sin(theta)` on `(0, 1)`,
/// * `K sinh(d (R - y))` on `[1, R)`,
///
/// with `a = L sqrt(-r1 - lambda)`, `b = L sqrt(r2 + lambda)`,
/// `d = L sqrt(-r3 - lambda)`. Normalized by `phi(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedEigenpair {
    lambda: f64,
    half_width: f64,
    a: f64,
    b: f64,
    d: f64,
    theta: f64,
    edge: f64,
}

#[inline]
fn coth(x: f64) -> f64 {
    let e = exp(-2.0 * x);
    (1.0 + e) / (1.0 - e)
}

impl TruncatedEigenpair {
    /// Requires `R > 1`; fails with [`Error::Inadmissible`] when the
    /// truncated eigenvalue is not below `-max(r1, r3)`.
    pub fn new(params: &GrowthParams, half_width: f64) -> Result<Self> {
        params.require_favorable_patch()?;
        ensure!(
            half_width > 1.0,
            "half-width must exceed the patch, got {half_width}"
        );
        let GrowthParams { r1, r2, r3, length } = *params;
        let top = r1.max(r3);
        let nudge = 1e-13 * (r2 - top);
        let lo = -r2 + nudge;
        let hi = -top - nudge;
        let g = |lambda: f64| Self::matching(params, half_width, lambda);
        if g(hi) <= 0.0 {
            return Err(Error::Inadmissible(alloc::format!(
                "truncated eigenvalue on half-width {half_width} is not below -max(r1, r3)"
            )));
        }
        let lambda = bisect(g, lo, hi, super::ROOT_TOL)?;
        let a = length * sqrt(-r1 - lambda);
        let b = length * sqrt(r2 + lambda);
        let d = length * sqrt(-r3 - lambda);
        let theta = arccot(a * coth(a * half_width) / b);
        let edge = sin(b + theta) / sin(theta);
        Ok(TruncatedEigenpair {
            lambda,
            half_width,
            a,
            b,
            d,
            theta,
            edge,
        })
    }

    /// Increasing in `lambda`; zero at the truncated eigenvalue.
    fn matching(params: &GrowthParams, half_width: f64, lambda: f64) -> f64 {
        let GrowthParams { r1, r2, r3, length } = *params;
        let a = length * sqrt(-r1 - lambda);
        let b = length * sqrt(r2 + lambda);
        let d = length * sqrt(-r3 - lambda);
        let theta = arccot(a * coth(a * half_width) / b);
        b + theta - arccot(-d * coth(d * (half_width - 1.0)) / b)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Value, first and second `y`-derivative; zero outside `(-R, R)`.
    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        let r = self.half_width;
        if y <= -r || y >= r {
            return (0.0, 0.0, 0.0);
        }
        if y <= 0.0 {
            let a = self.a;
            let den = 1.0 - exp(-2.0 * a * r);
            let e = exp(a * y);
            let tail = exp(-2.0 * a * (y + r));
            let v = e * (1.0 - tail) / den;
            (v, a * e * (1.0 + tail) / den, a * a * v)
        } else if y < 1.0 {
            let arg = self.b * y + self.theta;
            let s = sin(self.theta);
            let v = sin(arg) / s;
            (v, self.b * cos(arg) / s, -self.b * self.b * v)
        } else {
            let d = self.d;
            let den = 1.0 - exp(-2.0 * d * (r - 1.0));
            let e = self.edge * exp(-d * (y - 1.0));
            let tail = exp(-2.0 * d * (r - y));
            let v = e * (1.0 - tail) / den;
            (v, -d * e * (1.0 + tail) / den, d * d * v)
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.eval(y).0
    }

    /// `max phi^R`.
    pub fn sup(&self) -> f64 {
        let peak = if self.theta < FRAC_PI_2 && FRAC_PI_2 < self.b + self.theta {
            1.0 / sin(self.theta)
        } else {
            0.0
        };
        peak.max(1.0).max(self.edge)
    }
}
