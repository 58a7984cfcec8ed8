//! Generalized principal eigenvalue of the patch-frame operator
//! `-L^-2 d^2/dy^2 - m(y)`, with `m = r1` on `y < 0`, `r2` on `[0, 1)` and
//! `r3` on `y >= 1`.
//!
//! Three routes are offered: the closed-form case split with a monotone
//! transcendental equation ([`lambda1_analytic`]), its inverse in the patch
//! length ([`length_for_lambda1`]), and a truncated Dirichlet solver that
//! works for any step profile ([`lambda1_truncated`], [`lambda1_general`]).

mod function;
mod truncated;

pub use function::PiecewiseEigenfunction;
pub use truncated::{
    lambda1_general, lambda1_general_report, lambda1_truncated, lambda1_truncated_on, LadderReport,
    TruncatedEigenpair,
};

use core::f64::consts::{FRAC_PI_2, PI};

use libm::{atan, cos, sin, sqrt};

use crate::error::ensure;
use crate::model::GrowthParams;
use crate::roots::bisect;
use crate::Result;

/// Absolute tolerance of the eigenvalue bisection.
pub const ROOT_TOL: f64 = 1e-12;

/// `arccot` with values in `(0, pi)`.
#[inline]
pub fn arccot(z: f64) -> f64 {
    FRAC_PI_2 - atan(z)
}

#[inline]
fn cot(x: f64) -> f64 {
    cos(x) / sin(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenCase {
    /// `L > L̄`: exponential decay on both sides.
    Interior,
    /// `r1 < r3`, `L <= L̄`: `lambda1 = -r3`, linear growth at `+inf`.
    RightCritical,
    /// `r1 > r3`, `L <= L̄`: `lambda1 = -r1`, linear growth at `-inf`.
    LeftCritical,
}

/// Principal eigenvalue and the constants of the piecewise eigenfunction.
///
/// Interior: `phi = C1 e^{k1 y}`, `C2 sin(b y + C3)`, `C4 e^{-k3 y}` on
/// `y <= 0`, `(0, 1)`, `y >= 1`, with `C1 = 1`; `c5` is `None`.
///
/// RightCritical: same first two pieces and `C4 L (y - 1) + C5` on `y >= 1`.
///
/// LeftCritical: the mirror image `y -> 1 - y` of the right-critical
/// construction with `r1` and `r3` swapped, rescaled so that `phi(0) = 1`:
/// `phi = C5 - C4 L y` on `y <= 0`, `C2 sin(b (1 - y) + C3)` on `(0, 1)` and
/// `C1 e^{-k3 (y - 1)}` on `y >= 1`, with `C5 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResult {
    pub lambda1: f64,
    pub case: EigenCase,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: Option<f64>,
}

fn check_rates(r1: f64, r2: f64, r3: f64) -> Result<()> {
    for (name, v) in [("r1", r1), ("r2", r2), ("r3", r3)] {
        ensure!(
            v.is_finite() && v > 0.0,
            "{name} must be positive and finite, got {v}"
        );
    }
    ensure!(
        r2 > r1.max(r3),
        "r2 = {r2} must exceed max(r1, r3) = {}",
        r1.max(r3)
    );
    Ok(())
}

/// Critical patch length `L̄` below which `lambda1 = -max(r1, r3)`.
pub fn critical_length(r1: f64, r2: f64, r3: f64) -> Result<f64> {
    check_rates(r1, r2, r3)?;
    if r1 == r3 {
        return Ok(0.0);
    }
    let gap = r2 - r1.max(r3);
    Ok(arccot(sqrt(gap / (r1 - r3).abs())) / sqrt(gap))
}

/// `zeta(lambda)`, the right-hand side of `cot(L sqrt(r2 + lambda)) = zeta`,
/// defined for `lambda` in `(-r2, -max(r1, r3))`.
pub fn zeta(r1: f64, r2: f64, r3: f64, lambda: f64) -> f64 {
    let num = r2 + lambda - sqrt((r1 + lambda) * (r3 + lambda));
    let den = sqrt(r2 + lambda) * (sqrt(-r1 - lambda) + sqrt(-r3 - lambda));
    num / den
}

/// The decreasing function whose unique zero is `lambda1` when `L > L̄`.
pub fn characteristic(params: &GrowthParams, lambda: f64) -> f64 {
    let GrowthParams { r1, r2, r3, length } = *params;
    cot(length * sqrt(r2 + lambda)) - zeta(r1, r2, r3, lambda)
}

/// Principal eigenvalue from the closed-form case split, with the
/// eigenfunction constants.
pub fn lambda1_analytic(params: &GrowthParams) -> Result<EigenResult> {
    params.require_favorable_patch()?;
    let GrowthParams { r1, r2, r3, length } = *params;
    let top = r1.max(r3);
    let l_crit = critical_length(r1, r2, r3)?;

    if length <= l_crit {
        return Ok(if r1 < r3 {
            right_critical_constants(r1, r2, r3, length)
        } else {
            left_critical_constants(r1, r2, r3, length)
        });
    }

    let nudge = 1e-13 * (r2 - top);
    let upper = (-top).min(PI * PI / (length * length) - r2);
    let lo = -r2 + nudge;
    let hi = upper - nudge;
    let g = |lambda: f64| characteristic(params, lambda);
    // Just above L̄ the root can sit inside the nudge band next to -max.
    let lambda1 = if g(hi) >= 0.0 {
        hi
    } else {
        bisect(g, lo, hi, ROOT_TOL)?
    };
    Ok(interior_constants(r1, r2, r3, length, lambda1))
}

fn interior_constants(r1: f64, r2: f64, r3: f64, length: f64, lambda1: f64) -> EigenResult {
    let b = length * sqrt(r2 + lambda1);
    let c3 = arccot(sqrt((-r1 - lambda1) / (r2 + lambda1)));
    let c2 = 1.0 / sin(c3);
    let c4 = libm::exp(length * sqrt(-r3 - lambda1)) * sin(b + c3) / sin(c3);
    EigenResult {
        lambda1,
        case: EigenCase::Interior,
        c1: 1.0,
        c2,
        c3,
        c4,
        c5: None,
    }
}

/// Constants of the right-critical construction, `lambda1 = -r3`.
fn right_critical_constants(r1: f64, r2: f64, r3: f64, length: f64) -> EigenResult {
    let s = sqrt(r2 - r3);
    let c3 = arccot(sqrt((r3 - r1) / (r2 - r3)));
    let c2 = 1.0 / sin(c3);
    let c4 = s * cos(length * s + c3) / sin(c3);
    let c5 = sin(length * s + c3) / sin(c3);
    EigenResult {
        lambda1: -r3,
        case: EigenCase::RightCritical,
        c1: 1.0,
        c2,
        c3,
        c4,
        c5: Some(c5),
    }
}

fn left_critical_constants(r1: f64, r2: f64, r3: f64, length: f64) -> EigenResult {
    let mirror = right_critical_constants(r3, r2, r1, length);
    let scale = 1.0 / mirror.c5.expect("critical constants carry C5");
    EigenResult {
        lambda1: -r1,
        case: EigenCase::LeftCritical,
        c1: scale,
        c2: mirror.c2 * scale,
        c3: mirror.c3,
        c4: mirror.c4 * scale,
        c5: Some(1.0),
    }
}

/// The unique patch length with `lambda1 = lambda_target`, for
/// `lambda_target` in `(-r2, -max(r1, r3))`.
pub fn length_for_lambda1(r1: f64, r2: f64, r3: f64, lambda_target: f64) -> Result<f64> {
    check_rates(r1, r2, r3)?;
    let top = r1.max(r3);
    ensure!(
        lambda_target > -r2 && lambda_target < -top,
        "target eigenvalue {lambda_target} must lie in the open interval ({}, {})",
        -r2,
        -top
    );
    Ok(arccot(zeta(r1, r2, r3, lambda_target)) / sqrt(r2 + lambda_target))
}

/// Growth parameters whose principal eigenvalue is `lambda1`.
///
/// `lambda1 = -max(r1, r3)` is accepted when `r1 != r3` and resolves to the
/// critical length `L̄` (the whole interval `(0, L̄]` shares that eigenvalue).
pub fn params_for_lambda1(r1: f64, r2: f64, r3: f64, lambda1: f64) -> Result<GrowthParams> {
    check_rates(r1, r2, r3)?;
    let top = r1.max(r3);
    let length = if lambda1 == -top && r1 != r3 {
        critical_length(r1, r2, r3)?
    } else {
        length_for_lambda1(r1, r2, r3, lambda1)?
    };
    GrowthParams::new(r1, r2, r3, length)
}

/// Builds the evaluable eigenfunction from an [`EigenResult`].
pub fn eigenfunction(
    params: &GrowthParams,
    result: &EigenResult,
) -> Result<PiecewiseEigenfunction> {
    params.require_favorable_patch()?;
    let GrowthParams { r1, r2, r3, length } = *params;
    let l_crit = critical_length(r1, r2, r3)?;
    let expected = if length > l_crit {
        EigenCase::Interior
    } else if r1 < r3 {
        EigenCase::RightCritical
    } else {
        EigenCase::LeftCritical
    };
    ensure!(
        result.case == expected,
        "case tag {:?} does not match the parameters, which give {:?}",
        result.case,
        expected
    );
    ensure!(
        result.lambda1 > -r2 && result.lambda1 <= -r1.max(r3),
        "eigenvalue {} outside (-r2, -max(r1, r3)]",
        result.lambda1
    );
    ensure!(
        result.case == EigenCase::Interior || result.c5.is_some(),
        "critical cases need the constant C5"
    );
    Ok(PiecewiseEigenfunction::new(params, result))
}
