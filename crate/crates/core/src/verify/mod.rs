//! Scenario harnesses comparing simulations with the speed law, and
//! pointwise certification of the super- and sub-solution constructions.

mod check;
mod interface;
mod subsolution;
mod supersolution;

pub use check::{CheckReport, Jet, SampleGrid, Violation, ViolationKind, RESIDUAL_TOL};
pub use interface::{solve_interface, InterfacePoint, InterfaceTrace, DERIVATIVE_TOL};
pub use subsolution::{check_subsolution, SubParams, SubSolutionSpec};
pub use supersolution::{check_supersolution, SuperCase, SuperSolutionSpec};

use alloc::vec::Vec;

use libm::sqrt;

use crate::eigen::lambda1_analytic;
use crate::error::ensure;
use crate::model::{GrowthParams, KppReaction, Trajectory};
use crate::sim::{FrontTrace, Grid, SimSettings, Simulation, TailWeight, U0Spec};
use crate::speed::{
    decay_rate, predict_two_interface, predict_with_lambda1, pulled_speed, Regime, SpeedPrediction,
};
use crate::Result;

/// Relative tolerance between simulated and predicted speeds.
pub const SPEED_TOLERANCE: f64 = 0.10;

/// Envelope hypotheses are sampled from this time on; `(A(t) + L) / t`
/// blows up as `t -> 0` for any trajectory.
pub const COROLLARY_T_WARM: f64 = 1.0;

/// Uniform samples of the envelope hypotheses, on top of the trajectory's
/// breakpoints.
const HYPOTHESIS_SAMPLES: usize = 2000;

/// Choice of the simulator's tail weight.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TailPolicy {
    Off,
    /// The decay rate of the expected front where the front is pulled from
    /// far ahead, off elsewhere.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub dx: f64,
    pub dt: f64,
    pub horizon: f64,
    pub theta: f64,
    pub sample_every: f64,
    pub tail: TailPolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dx: 0.05,
            dt: 0.01,
            horizon: 300.0,
            theta: 0.01,
            sample_every: 0.5,
            tail: TailPolicy::Auto,
        }
    }
}

impl RunConfig {
    /// Resolves the tail policy with `auto` as the automatic weight.
    pub fn tail_weight(&self, auto: Option<f64>) -> TailWeight {
        match self.tail {
            TailPolicy::Off => TailWeight::Off,
            TailPolicy::Fixed(k) => TailWeight::Fixed(k),
            TailPolicy::Auto => auto.map_or(TailWeight::Off, TailWeight::Fixed),
        }
    }

    fn settings(&self, tail: TailWeight) -> SimSettings {
        SimSettings {
            theta: self.theta,
            sample_every: self.sample_every,
            tail,
            ..SimSettings::default()
        }
    }
}

fn kappa_of(tail: TailWeight) -> f64 {
    match tail {
        TailWeight::Off => 0.0,
        TailWeight::Fixed(k) => k,
    }
}

/// Runs the default bump on an automatic grid.
pub fn simulate(
    params: &GrowthParams,
    trajectory: &Trajectory,
    cfg: &RunConfig,
    tail: TailWeight,
) -> Result<FrontTrace> {
    let grid = Grid::auto(params, trajectory, cfg.dx, cfg.dt, cfg.horizon)?;
    let reaction = KppReaction::for_params(params);
    Simulation::new(
        params,
        trajectory,
        &reaction,
        &grid,
        &U0Spec::default(),
        &cfg.settings(tail),
    )?
    .run()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub c_a: f64,
    pub prediction: SpeedPrediction,
    pub fitted_speed: f64,
    pub fit_residual: f64,
    /// `|fitted - c*| / c*`.
    pub rel_gap: f64,
    /// Tail weight used, `0` when off.
    pub kappa: f64,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.rel_gap <= SPEED_TOLERANCE
    }
}

/// Simulates one patch speed and compares with the prediction.
pub fn sweep_point(params: &GrowthParams, c_a: f64, cfg: &RunConfig) -> Result<SweepRow> {
    let prediction = predict_two_interface(params, c_a)?;
    let auto = match prediction.regime {
        Regime::NonlocallyPulled => Some(decay_rate(params.r1, prediction.c_star)?),
        _ => None,
    };
    let tail = cfg.tail_weight(auto);
    let trace = simulate(params, &Trajectory::linear(c_a)?, cfg, tail)?;
    let rel_gap = (trace.fitted_speed - prediction.c_star).abs() / prediction.c_star;
    Ok(SweepRow {
        c_a,
        prediction,
        fitted_speed: trace.fitted_speed,
        fit_residual: trace.fit_residual,
        rel_gap,
        kappa: kappa_of(tail),
    })
}

/// [`sweep_point`] over a grid of patch speeds, in order.
pub fn sweep_speed_curve(
    params: &GrowthParams,
    c_a_grid: &[f64],
    cfg: &RunConfig,
) -> Result<Vec<SweepRow>> {
    c_a_grid
        .iter()
        .map(|&c| sweep_point(params, c, cfg))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorollaryCase {
    /// `sup (A(t) + L) / t <= 2 sqrt(r3)`: the front runs at `2 sqrt(r3)`.
    SlowPatch,
    /// `inf A(t) / t >= 2 sqrt(r1) + 2 sqrt(r2 - r1)`: the front runs at
    /// `2 sqrt(r1)`.
    FastPatch,
    NotApplicable,
}

impl CorollaryCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorollaryCase::SlowPatch => "slow_patch",
            CorollaryCase::FastPatch => "fast_patch",
            CorollaryCase::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryVerdict {
    pub case: CorollaryCase,
    /// `sup (A(t) + L) / t` and `inf A(t) / t` over the sampled window.
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub predicted: Option<f64>,
    pub fitted: Option<f64>,
    pub rel_gap: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

fn breakpoints(trajectory: &Trajectory) -> Vec<f64> {
    match trajectory {
        Trajectory::Linear { .. } => Vec::new(),
        Trajectory::SlowOscillation { switch_times, .. } => switch_times.clone(),
        Trajectory::PiecewiseLinear { knots, .. } => knots.iter().map(|k| k.0).collect(),
    }
}

/// Classifies the trajectory against the slow- and fast-patch envelopes on
/// `[COROLLARY_T_WARM, T]`, then simulates and compares when one applies.
///
/// `A(t) / t` is monotone on each linear piece, so its extremes sit at the
/// breakpoints or the window ends, all of which are sampled.
pub fn corollary_bounds(
    params: &GrowthParams,
    trajectory: &Trajectory,
    cfg: &RunConfig,
) -> Result<CorollaryVerdict> {
    params.validate()?;
    trajectory.validate()?;
    let t_end = cfg.horizon;
    ensure!(
        t_end > COROLLARY_T_WARM,
        "horizon must exceed {COROLLARY_T_WARM}"
    );
    let mut ts: Vec<f64> = (0..=HYPOTHESIS_SAMPLES)
        .map(|k| {
            COROLLARY_T_WARM + (t_end - COROLLARY_T_WARM) * k as f64 / HYPOTHESIS_SAMPLES as f64
        })
        .collect();
    ts.extend(
        breakpoints(trajectory)
            .into_iter()
            .filter(|t| (COROLLARY_T_WARM..=t_end).contains(t)),
    );
    let sup_ratio = ts
        .iter()
        .map(|&t| (trajectory.position(t) + params.length) / t)
        .fold(f64::NEG_INFINITY, f64::max);
    let inf_ratio = ts
        .iter()
        .map(|&t| trajectory.position(t) / t)
        .fold(f64::INFINITY, f64::min);
    let slow = 2.0 * sqrt(params.r3);
    let fast = 2.0 * sqrt(params.r1) + 2.0 * sqrt(params.r2 - params.r1);
    let slack = 1e-12;
    let (case, predicted) = if sup_ratio <= slow * (1.0 + slack) {
        (CorollaryCase::SlowPatch, slow)
    } else if params.r2 > params.r1 && inf_ratio >= fast * (1.0 - slack) {
        (CorollaryCase::FastPatch, 2.0 * sqrt(params.r1))
    } else {
        return Ok(CorollaryVerdict {
            case: CorollaryCase::NotApplicable,
            sup_ratio,
            inf_ratio,
            predicted: None,
            fitted: None,
            rel_gap: None,
            tolerance: SPEED_TOLERANCE,
            passed: false,
        });
    };
    let trace = simulate(params, trajectory, cfg, cfg.tail_weight(None))?;
    let rel_gap = (trace.fitted_speed - predicted).abs() / predicted;
    Ok(CorollaryVerdict {
        case,
        sup_ratio,
        inf_ratio,
        predicted: Some(predicted),
        fitted: Some(trace.fitted_speed),
        rel_gap: Some(rel_gap),
        tolerance: SPEED_TOLERANCE,
        passed: rel_gap <= SPEED_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalFit {
    pub start: f64,
    pub end: f64,
    pub patch_speed: f64,
    /// `F(patch_speed)`.
    pub target: f64,
    pub fit_window: (f64, f64),
    pub fitted_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    /// `(F(cA1), F(cA2))`.
    pub targets: (f64, f64),
    pub intervals: Vec<IntervalFit>,
    /// Max minus min fitted speed over every interval but the first.
    pub late_spread: f64,
    /// `(F(cA1) - F(cA2)) / 2`.
    pub required_spread: f64,
    /// Every late interval is closer to its own target than to the other.
    pub alternates: bool,
    pub kappa: f64,
}

impl OscillationReport {
    pub fn passed(&self) -> bool {
        self.late_spread >= self.required_spread
    }
}

/// Runs the patch at `cA1` on `[0, t1)`, `cA2` on `[t1, t2)`, `cA1` on
/// `[t2, t3)` and so on up to the last switch time, and fits the front speed
/// on the second half of each interval.
pub fn oscillation_experiment(
    params: &GrowthParams,
    c_a1: f64,
    c_a2: f64,
    switch_times: &[f64],
    cfg: &RunConfig,
) -> Result<OscillationReport> {
    params.require_favorable_patch()?;
    let lambda1 = lambda1_analytic(params)?.lambda1;
    let r1 = params.r1;
    ensure!(lambda1 != -r1, "the oscillation needs lambda1 != -r1");
    let pred = predict_with_lambda1(r1, params.r3, lambda1, c_a1)?;
    let [_, lo, hi] = pred.thresholds;
    ensure!(
        lo < c_a1 && c_a1 <= c_a2 && c_a2 < hi,
        "need 2 sqrt(-lambda1) = {lo} < cA1 <= cA2 < {hi}, got cA1 = {c_a1}, cA2 = {c_a2}"
    );
    ensure!(switch_times.len() >= 2, "need at least two switch times");
    ensure!(
        switch_times[0] > 0.0 && switch_times.windows(2).all(|w| w[0] < w[1]),
        "switch times must be positive and increasing"
    );
    let targets = (
        pulled_speed(c_a1, r1, lambda1)?,
        pulled_speed(c_a2, r1, lambda1)?,
    );
    let trajectory = if c_a1 == c_a2 {
        Trajectory::linear(c_a1)?
    } else {
        Trajectory::slow_oscillation(c_a1, c_a2, switch_times.to_vec())?
    };
    let kappa = 0.5 * (decay_rate(r1, targets.0)? + decay_rate(r1, targets.1)?);
    let tail = cfg.tail_weight(Some(kappa));
    let horizon = *switch_times.last().expect("nonempty");
    let trace = simulate(params, &trajectory, &RunConfig { horizon, ..*cfg }, tail)?;

    let mut intervals = Vec::with_capacity(switch_times.len());
    let mut start = 0.0;
    for (k, &end) in switch_times.iter().enumerate() {
        let (patch_speed, target) = if k % 2 == 0 {
            (c_a1, targets.0)
        } else {
            (c_a2, targets.1)
        };
        let window = (0.5 * (start + end), end);
        let (fitted_speed, _) = trace.fit(window.0, window.1)?;
        intervals.push(IntervalFit {
            start,
            end,
            patch_speed,
            target,
            fit_window: window,
            fitted_speed,
        });
        start = end;
    }
    let late = &intervals[1..];
    let (lo_v, hi_v) = late
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), f| {
            (a.min(f.fitted_speed), b.max(f.fitted_speed))
        });
    let alternates = late.iter().all(|f| {
        let other = if f.target == targets.0 {
            targets.1
        } else {
            targets.0
        };
        (f.fitted_speed - f.target).abs() <= (f.fitted_speed - other).abs()
    });
    Ok(OscillationReport {
        targets,
        intervals,
        late_spread: hi_v - lo_v,
        required_spread: 0.5 * (targets.0 - targets.1),
        alternates,
        kappa: kappa_of(tail),
    })
}
