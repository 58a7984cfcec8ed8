//! Closed-form spreading speeds of the moving patch and of a single moving
//! transition.

use libm::sqrt;

use crate::eigen::lambda1_analytic;
use crate::error::ensure;
use crate::model::GrowthParams;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// The patch lags behind; the front runs at `2 sqrt(r3)`.
    Slow,
    /// The front travels with the patch, `c* = cA`.
    Locked,
    /// `c* = F(cA)`, strictly between `2 sqrt(r1)` and `cA`.
    NonlocallyPulled,
    /// The patch escapes; the front runs at `2 sqrt(r1)`.
    Fast,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Slow => "Slow",
            Regime::Locked => "Locked",
            Regime::NonlocallyPulled => "NonlocallyPulled",
            Regime::Fast => "Fast",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPrediction {
    pub regime: Regime,
    pub c_star: f64,
    /// `(2 sqrt(r3), 2 sqrt(-lambda1), 2 sqrt(r1) + 2 sqrt(-lambda1 - r1))`.
    pub thresholds: [f64; 3],
    pub lambda1: f64,
}

/// Smaller root `lambda(c) = (c - sqrt(c^2 - 4r)) / 2` of
/// `lambda^2 - c lambda + r = 0`, for `c >= 2 sqrt(r)`.
pub fn decay_rate(r: f64, c: f64) -> Result<f64> {
    ensure!(
        r.is_finite() && r > 0.0,
        "zone rate must be positive, got {r}"
    );
    let disc = c * c - 4.0 * r;
    // tolerate rounding right at c = 2 sqrt(r)
    ensure!(
        c > 0.0 && disc >= -1e-12 * c * c,
        "speed {c} is below the KPP minimum 2 sqrt({r})"
    );
    Ok(0.5 * (c - sqrt(disc.max(0.0))))
}

/// The map `F(c) = (c - 2s)/2 + 2 r1 / (c - 2s)` with
/// `s = sqrt(-lambda1 - r1)`, giving the nonlocally pulled speed.
pub fn pulled_speed(c: f64, r1: f64, lambda1: f64) -> Result<f64> {
    ensure!(r1 > 0.0, "r1 must be positive, got {r1}");
    ensure!(
        lambda1 < -r1,
        "F needs lambda1 < -r1, got lambda1 = {lambda1}, r1 = {r1}"
    );
    let shift = 2.0 * sqrt(-lambda1 - r1);
    ensure!(
        c > shift,
        "F needs c > 2 sqrt(-lambda1 - r1) = {shift}, got {c}"
    );
    let z = c - shift;
    Ok(0.5 * z + 2.0 * r1 / z)
}

/// Speed law for the patch `[cA t, cA t + L)`.
pub fn predict_two_interface(params: &GrowthParams, c_a: f64) -> Result<SpeedPrediction> {
    params.require_favorable_patch()?;
    let lambda1 = lambda1_analytic(params)?.lambda1;
    predict_with_lambda1(params.r1, params.r3, lambda1, c_a)
}

/// Speed law for a known principal eigenvalue `lambda1 <= -max(r1, r3)`.
pub fn predict_with_lambda1(r1: f64, r3: f64, lambda1: f64, c_a: f64) -> Result<SpeedPrediction> {
    ensure!(r1 > 0.0 && r3 > 0.0, "r1 and r3 must be positive");
    ensure!(
        c_a.is_finite() && c_a > 0.0,
        "patch speed must be positive, got {c_a}"
    );
    ensure!(
        lambda1 <= -r1.max(r3),
        "lambda1 = {lambda1} exceeds -max(r1, r3)"
    );
    let thresholds = [
        2.0 * sqrt(r3),
        2.0 * sqrt(-lambda1),
        2.0 * sqrt(r1) + 2.0 * sqrt(-lambda1 - r1),
    ];
    let (regime, c_star) = if c_a < thresholds[0] {
        (Regime::Slow, thresholds[0])
    } else if c_a <= thresholds[1] {
        (Regime::Locked, c_a)
    } else if c_a < thresholds[2] {
        (Regime::NonlocallyPulled, pulled_speed(c_a, r1, lambda1)?)
    } else {
        (Regime::Fast, 2.0 * sqrt(r1))
    };
    Ok(SpeedPrediction {
        regime,
        c_star,
        thresholds,
        lambda1,
    })
}

/// Speed law for a single transition `r1 | r3` moving at `cA >= 0`.
///
/// `thresholds` and `lambda1` are reported with `lambda1 = -max(r1, r3)`,
/// the eigenvalue of a vanishing patch.
pub fn predict_single_transition(r1: f64, r3: f64, c_a: f64) -> Result<SpeedPrediction> {
    ensure!(
        r1.is_finite() && r1 > 0.0 && r3.is_finite() && r3 > 0.0,
        "r1 and r3 must be positive"
    );
    ensure!(
        c_a.is_finite() && c_a >= 0.0,
        "transition speed must be nonnegative, got {c_a}"
    );
    let (s1, s3) = (2.0 * sqrt(r1), 2.0 * sqrt(r3));
    let lambda1 = -r1.max(r3);
    let thresholds = [s3, 2.0 * sqrt(-lambda1), s1 + 2.0 * sqrt(-lambda1 - r1)];
    let (regime, c_star) = if r1 > r3 {
        if c_a <= s3 {
            (Regime::Slow, s3)
        } else if c_a <= s1 {
            (Regime::Locked, c_a)
        } else {
            (Regime::Fast, s1)
        }
    } else if r1 < r3 {
        let shift = 2.0 * sqrt(r3 - r1);
        if c_a <= s3 {
            (Regime::Slow, s3)
        } else if c_a <= s1 + shift {
            let z = c_a - shift;
            (Regime::NonlocallyPulled, 0.5 * z + 2.0 * r1 / z)
        } else {
            (Regime::Fast, s1)
        }
    } else if c_a <= s3 {
        (Regime::Slow, s3)
    } else {
        (Regime::Fast, s1)
    };
    Ok(SpeedPrediction {
        regime,
        c_star,
        thresholds,
        lambda1,
    })
}
