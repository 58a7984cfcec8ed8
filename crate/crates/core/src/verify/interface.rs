//! The moving interface `X(t)` where the `P` and `Q` pieces of the
//! sub-solution cross.

use alloc::vec::Vec;

use libm::log;

use super::subsolution::SubSolutionSpec;
use crate::error::ensure;
use crate::Result;

/// Relative agreement required between the implicit-function derivative of
/// `X - cA t` and a central difference.
pub const DERIVATIVE_TOL: f64 = 1e-5;

/// Absolute floor of the drift comparison. Roots carry a few ulps of noise,
/// so the central difference resolves about `1e-11`; drifts below the floor
/// are only compared in absolute terms.
const DRIFT_FLOOR: f64 = 1e-6;

/// `X(t)` at one time. Derivatives of `P` and `Q` are divided by the common
/// factor `exp(-lambda(c) (cA - c) t)`, which underflows for large `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub t: f64,
    pub position: f64,
    /// `X(t) - cA t`.
    pub offset: f64,
    /// `X(t) - c t - x0`.
    pub xi: f64,
    pub dp: f64,
    pub dq: f64,
    /// `d/dt (X - cA t)` from the implicit function theorem.
    pub drift: f64,
    /// The same by central differences.
    pub drift_fd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceTrace {
    pub points: Vec<InterfacePoint>,
    /// `ln S / eta`.
    pub xi_floor: f64,
    /// `(-R L, -(R - r) L)`.
    pub initial_bracket: (f64, f64),
}

impl InterfaceTrace {
    /// `P` strictly decreasing and `Q` strictly increasing at every `X(t)`.
    pub fn slopes_ok(&self) -> bool {
        self.points.iter().all(|p| p.dp < 0.0 && p.dq > 0.0)
    }

    /// `cA t - R L < X(t) < cA t` throughout.
    pub fn inside_patch_frame(&self) -> bool {
        let lo = self.initial_bracket.0;
        self.points.iter().all(|p| p.offset > lo && p.offset < 0.0)
    }

    /// `inf (X - c t - x0)`.
    pub fn min_xi(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.xi)
            .fold(f64::INFINITY, f64::min)
    }

    /// `ln S / eta < inf (X - c t - x0)`.
    pub fn above_floor(&self) -> bool {
        self.min_xi() > self.xi_floor
    }

    /// Largest mismatch between the two drift estimates, relative to
    /// `|drift| + 1e-6`.
    pub fn drift_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.drift - p.drift_fd).abs() / (p.drift.abs() + DRIFT_FLOOR))
            .fold(0.0, f64::max)
    }

    /// `(min, max)` of `X - cA t` over the samples.
    pub fn offset_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.offset), hi.max(p.offset))
            })
    }

    /// `X(0)` lies in `(-R L, -(R - r) L)`.
    pub fn starts_in_bracket(&self) -> bool {
        let (lo, hi) = self.initial_bracket;
        self.points
            .iter()
            .find(|p| p.t == 0.0)
            .is_some_and(|p| p.offset > lo && p.offset < hi)
    }

    pub fn all_hold(&self) -> bool {
        self.slopes_ok()
            && self.inside_patch_frame()
            && self.above_floor()
            && self.drift_error() < DERIVATIVE_TOL
            && self.starts_in_bracket()
    }
}

/// Solves for `X(t)` at each time and records the quantities entering the
/// interface properties.
pub fn solve_interface(spec: &SubSolutionSpec, times: &[f64]) -> Result<InterfaceTrace> {
    ensure!(!times.is_empty(), "need at least one time");
    ensure!(
        times.iter().all(|t| t.is_finite() && *t >= 0.0),
        "times must be finite and nonnegative"
    );
    let q = spec.parameters();
    let c_a = spec.patch_speed();
    let l = spec.params().length;
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let z = spec.interface_offset(t)?;
        let (_, dp) = spec.p_scaled(t, z);
        let (_, dq) = spec.q_scaled(z);
        let drift = -spec.p_scaled_dt(t, z) / (dp - dq);
        let h = 1e-4 * (1.0 + t);
        let after = spec.interface_offset(t + h)?;
        let drift_fd = if t >= h {
            (after - spec.interface_offset(t - h)?) / (2.0 * h)
        } else {
            // second-order one-sided at the initial time
            (4.0 * after - 3.0 * z - spec.interface_offset(t + 2.0 * h)?) / (2.0 * h)
        };
        let position = c_a * t + z;
        points.push(InterfacePoint {
            t,
            position,
            offset: z,
            xi: position - q.c * t - q.x0,
            dp,
            dq,
            drift,
            drift_fd,
        });
    }
    Ok(InterfaceTrace {
        points,
        xi_floor: log(q.s) / q.eta,
        initial_bracket: (-q.half_width * l, -(q.half_width - spec.rise()) * l),
    })
}
