//! Problem data: the moving three-zone growth rate, patch trajectories and
//! the logistic KPP reaction.

use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// Growth rates of the left zone, the patch and the right zone, plus the
/// patch length. All four are positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub length: f64,
}

impl GrowthParams {
    pub fn new(r1: f64, r2: f64, r3: f64, length: f64) -> Result<Self> {
        let params = GrowthParams { r1, r2, r3, length };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("L", self.length),
        ] {
            ensure!(
                v.is_finite() && v > 0.0,
                "{name} must be positive and finite, got {v}"
            );
        }
        Ok(())
    }

    /// Standing assumption of the two-interface theory: the patch is the most
    /// favorable zone.
    pub fn require_favorable_patch(&self) -> Result<()> {
        self.validate()?;
        ensure!(
            self.r2 > self.r1.max(self.r3),
            "r2 = {} must exceed max(r1, r3) = {}",
            self.r2,
            self.r1.max(self.r3)
        );
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }

    /// Growth rate at signed distance `offset = x - A(t)` from the patch's
    /// left edge. The patch is half-open, `[0, L)`.
    #[inline]
    pub fn rate_at_offset(&self, offset: f64) -> f64 {
        if offset < 0.0 {
            self.r1
        } else if offset < self.length {
            self.r2
        } else {
            self.r3
        }
    }

    /// The potential `m(y)` in patch units (`y = (x - A)/L`).
    pub fn profile(&self) -> StepProfile {
        StepProfile {
            breakpoints: alloc::vec![0.0, 1.0],
            values: alloc::vec![self.r1, self.r2, self.r3],
        }
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }
}

/// Patch motion `A(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// `A(t) = speed * t`.
    Linear { speed: f64 },
    /// Alternating slopes `slow` on `[t_2n, t_2n+1)` and `fast` on
    /// `[t_2n+1, t_2n+2)`, starting at `A(0) = 0`. `switch_times` holds
    /// `t_1 < t_2 < ...`; after the last switch the current slope is kept.
    SlowOscillation {
        slow: f64,
        fast: f64,
        switch_times: Vec<f64>,
    },
    /// Linear interpolation through `(time, position)` knots starting at
    /// `(0, 0)`, extended with `tail_speed` past the last knot. Covers the
    /// arbitrary continuous trajectories accepted by the simulator.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
        tail_speed: f64,
    },
}

impl Trajectory {
    pub fn linear(speed: f64) -> Result<Self> {
        let t = Trajectory::Linear { speed };
        t.validate()?;
        Ok(t)
    }

    pub fn slow_oscillation(slow: f64, fast: f64, switch_times: Vec<f64>) -> Result<Self> {
        let t = Trajectory::SlowOscillation {
            slow,
            fast,
            switch_times,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>, tail_speed: f64) -> Result<Self> {
        let t = Trajectory::PiecewiseLinear { knots, tail_speed };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Trajectory::Linear { speed } => {
                ensure!(
                    speed.is_finite() && *speed > 0.0,
                    "patch speed must be positive, got {speed}"
                );
            }
            Trajectory::SlowOscillation {
                slow,
                fast,
                switch_times,
            } => {
                ensure!(
                    slow.is_finite() && fast.is_finite() && 0.0 < *slow && slow < fast,
                    "oscillating speeds need 0 < cA1 < cA2, got {slow} and {fast}"
                );
                ensure!(
                    !switch_times.is_empty(),
                    "at least one switch time is required"
                );
                let mut prev = 0.0;
                for &t in switch_times {
                    ensure!(
                        t.is_finite() && t > prev,
                        "switch times must be positive and strictly increasing"
                    );
                    prev = t;
                }
            }
            Trajectory::PiecewiseLinear { knots, tail_speed } => {
                ensure!(
                    tail_speed.is_finite() && *tail_speed >= 0.0,
                    "tail speed must be nonnegative"
                );
                ensure!(
                    knots.first() == Some(&(0.0, 0.0)),
                    "piecewise-linear trajectories start at the knot (0, 0)"
                );
                for w in knots.windows(2) {
                    ensure!(w[1].0 > w[0].0, "knot times must be strictly increasing");
                    ensure!(
                        w[1].1.is_finite() && w[1].1 >= 0.0,
                        "positions must be nonnegative"
                    );
                }
            }
        }
        Ok(())
    }

    /// `A(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        ensure!(t >= 0.0, "trajectory evaluated at negative time {t}");
        Ok(self.position(t))
    }

    /// Unchecked evaluation, used in hot loops where `t >= 0` is known.
    pub fn position(&self, t: f64) -> f64 {
        match self {
            Trajectory::Linear { speed } => speed * t,
            Trajectory::SlowOscillation {
                slow,
                fast,
                switch_times,
            } => {
                let mut pos = 0.0;
                let mut start = 0.0;
                for (k, &end) in switch_times.iter().enumerate() {
                    let slope = if k % 2 == 0 { *slow } else { *fast };
                    if t < end {
                        return pos + slope * (t - start);
                    }
                    pos += slope * (end - start);
                    start = end;
                }
                let slope = if switch_times.len() % 2 == 0 {
                    *slow
                } else {
                    *fast
                };
                pos + slope * (t - start)
            }
            Trajectory::PiecewiseLinear { knots, tail_speed } => {
                for w in knots.windows(2) {
                    let ((t0, a0), (t1, a1)) = (w[0], w[1]);
                    if t < t1 {
                        return a0 + (a1 - a0) * (t - t0) / (t1 - t0);
                    }
                }
                let &(tl, al) = knots.last().expect("validated trajectory");
                al + tail_speed * (t - tl)
            }
        }
    }

    /// Right derivative `A'(t)`.
    pub fn speed_at(&self, t: f64) -> f64 {
        match self {
            Trajectory::Linear { speed } => *speed,
            Trajectory::SlowOscillation {
                slow,
                fast,
                switch_times,
            } => {
                let k = switch_times.iter().take_while(|&&s| s <= t).count();
                if k % 2 == 0 {
                    *slow
                } else {
                    *fast
                }
            }
            Trajectory::PiecewiseLinear { knots, tail_speed } => {
                for w in knots.windows(2) {
                    let ((t0, a0), (t1, a1)) = (w[0], w[1]);
                    if t < t1 {
                        return (a1 - a0) / (t1 - t0);
                    }
                }
                *tail_speed
            }
        }
    }
}

/// Growth rate `r(t, x)` of the moving three-zone step.
pub fn eval_r(params: &GrowthParams, trajectory: &Trajectory, t: f64, x: f64) -> f64 {
    params.rate_at_offset(x - trajectory.position(t))
}

/// Piecewise-constant profile with constant tails, used as the potential `m`
/// of the patch-frame eigenproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepProfile {
    /// `values[k]` holds on `[breakpoints[k-1], breakpoints[k])`, with the
    /// first and last entries covering the unbounded tails.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        ensure!(
            values.len() == breakpoints.len() + 1,
            "a profile with {} breakpoints needs {} values, got {}",
            breakpoints.len(),
            breakpoints.len() + 1,
            values.len()
        );
        for w in breakpoints.windows(2) {
            ensure!(w[1] > w[0], "breakpoints must be strictly increasing");
        }
        for &v in &values {
            ensure!(
                v.is_finite() && v > 0.0,
                "profile values must be positive and finite, got {v}"
            );
        }
        Ok(StepProfile {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        StepProfile::new(Vec::new(), alloc::vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= y);
        self.values[k]
    }

    pub fn left_tail(&self) -> f64 {
        self.values[0]
    }

    pub fn right_tail(&self) -> f64 {
        *self.values.last().expect("profile has at least one value")
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Exact mean of the profile over `[a, b]`, `a < b`.
    pub fn average(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b > a);
        let mut acc = 0.0;
        let mut left = a;
        let mut k = self.breakpoints.partition_point(|&p| p <= a);
        while left < b {
            let right = self
                .breakpoints
                .get(k)
                .copied()
                .unwrap_or(f64::INFINITY)
                .min(b);
            acc += self.values[k] * (right - left);
            left = right;
            k += 1;
        }
        acc / (b - a)
    }

    /// The same profile shifted up by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        StepProfile::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v + c).collect(),
        )
    }
}

/// Logistic KPP reaction `f(u) = r u (1 - u)` with carrying capacity one.
///
/// `quadratic_bound` is the constant `M` of the KPP lower bound
/// `f >= r u - M u^2`; for the logistic form any `M >= sup r` works.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KppReaction {
    pub quadratic_bound: f64,
}

impl KppReaction {
    pub fn for_params(params: &GrowthParams) -> Self {
        KppReaction {
            quadratic_bound: params.max_rate(),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64, u: f64) -> f64 {
        r * u * (1.0 - u)
    }

    /// Worst-case KPP nonlinearity `r u - M u^2` compatible with the bound.
    #[inline]
    pub fn lower_bound(&self, r: f64, u: f64) -> f64 {
        r * u - self.quadratic_bound * u * u
    }
}

/// `r u (1 - u)`; rejects negative densities.
pub fn eval_reaction(reaction: &KppReaction, r: f64, u: f64) -> Result<f64> {
    ensure!(u >= 0.0, "density must be nonnegative, got {u}");
    Ok(reaction.eval(r, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn linear_trajectory() {
        let traj = Trajectory::linear(3.0).unwrap();
        assert_eq!(traj.eval(2.0).unwrap(), 6.0);
        assert!(traj.eval(-1.0).is_err());
    }

    #[test]
    fn oscillating_trajectory_breakpoints() {
        let traj = Trajectory::slow_oscillation(1.0, 2.0, vec![10.0, 100.0]).unwrap();
        assert_eq!(traj.eval(10.0).unwrap(), 10.0);
        assert_eq!(traj.eval(100.0).unwrap(), 190.0);
        // slope cA1 again after t2
        assert_eq!(traj.eval(110.0).unwrap(), 200.0);
        assert_eq!(traj.speed_at(50.0), 2.0);
        assert_eq!(traj.speed_at(150.0), 1.0);
    }

    #[test]
    fn bad_trajectories_rejected() {
        assert!(Trajectory::linear(0.0).is_err());
        assert!(Trajectory::slow_oscillation(2.0, 1.0, vec![1.0]).is_err());
        assert!(Trajectory::slow_oscillation(1.0, 2.0, vec![5.0, 5.0]).is_err());
        assert!(Trajectory::piecewise_linear(vec![(1.0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn piecewise_linear_envelope() {
        let t1 = 20.0 / 3.0;
        let traj = Trajectory::piecewise_linear(vec![(0.0, 0.0), (t1, 2.0 * t1)], 0.5).unwrap();
        assert!((traj.position(1.0) - 2.0).abs() < 1e-12);
        assert!((traj.position(100.0) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn growth_rate_zones() {
        let p = GrowthParams::new(1.0, 9.0, 4.0, 1.0).unwrap();
        let traj = Trajectory::linear(2.0).unwrap();
        assert_eq!(eval_r(&p, &traj, 0.0, -0.5), 1.0);
        assert_eq!(eval_r(&p, &traj, 1.0, 2.5), 9.0);
        assert_eq!(eval_r(&p, &traj, 1.0, 3.0), 4.0);
        assert_eq!(eval_r(&p, &traj, 1.0, 2.0), 9.0);
    }

    #[test]
    fn reaction_values() {
        let f = KppReaction {
            quadratic_bound: 2.0,
        };
        assert_eq!(eval_reaction(&f, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(eval_reaction(&f, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(eval_reaction(&f, 2.0, 0.5).unwrap(), 0.5);
        assert!(eval_reaction(&f, 1.0, -0.1).is_err());
    }

    #[test]
    fn profile_average_over_jump() {
        let m = GrowthParams::new(1.0, 9.0, 4.0, 1.0).unwrap().profile();
        assert_eq!(m.eval(-0.1), 1.0);
        assert_eq!(m.eval(0.0), 9.0);
        assert_eq!(m.eval(1.0), 4.0);
        assert!((m.average(-0.5, 0.5) - 5.0).abs() < 1e-15);
        assert!((m.average(0.5, 1.5) - 6.5).abs() < 1e-15);
        assert!((m.average(-3.0, -1.0) - 1.0).abs() < 1e-15);
    }
}
