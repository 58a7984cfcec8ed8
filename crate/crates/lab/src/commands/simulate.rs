use std::path::PathBuf;

use clap::Args;
use patchfront::sim::{Grid, SimSettings, Simulation, TailWeight, U0Spec};
use patchfront::speed::{decay_rate, predict_two_interface, Regime};
use patchfront::{GrowthParams, KppReaction, Trajectory};
use serde::Serialize;

use super::{Report, ResolvedScenario};
use crate::args::SimArgs;
use crate::config::ScenarioConfig;
use crate::failure::{reject, Outcome};
use crate::output::{csv_bytes, Artifacts};

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Scenario file.
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// Writes the tracked front as `t, front_x`.
    #[arg(long, value_name = "FILE")]
    pub emit_trace: Option<PathBuf>,
    /// Snapshots `t, x, u` every N steps into `profiles.csv`.
    #[arg(long, value_name = "N")]
    pub emit_profile_every: Option<usize>,
    /// Keeps every K-th node in the snapshots.
    #[arg(long, value_name = "K", default_value_t = 10)]
    pub profile_stride: usize,
}

#[derive(Debug, Serialize)]
struct Prediction {
    regime: &'static str,
    c_star: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    fitted_speed: f64,
    fit_residual: f64,
    fit_window: (f64, f64),
    horizon: f64,
    x_min: f64,
    x_max: f64,
    nodes: usize,
    kappa: f64,
    final_front: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prediction: Option<Prediction>,
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    front_x: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    t: f64,
    x: f64,
    u: f64,
}

/// Automatic tail weight: the decay rate of the predicted front when the
/// front is pulled from ahead of the patch. For an oscillating patch the two
/// rates are averaged.
pub fn auto_kappa(params: &GrowthParams, trajectory: &Trajectory) -> Outcome<Option<f64>> {
    let pulled = |c: f64| -> Outcome<Option<f64>> {
        let s = predict_two_interface(params, c)?;
        Ok(match s.regime {
            Regime::NonlocallyPulled => Some(decay_rate(params.r1, s.c_star)?),
            _ => None,
        })
    };
    if params.require_favorable_patch().is_err() {
        return Ok(None);
    }
    Ok(match trajectory {
        Trajectory::Linear { speed } => pulled(*speed)?,
        Trajectory::SlowOscillation { slow, fast, .. } => match (pulled(*slow)?, pulled(*fast)?) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            (a, b) => a.or(b),
        },
        Trajectory::PiecewiseLinear { .. } => None,
    })
}

pub fn run(args: &SimulateArgs, out_dir: Option<&std::path::Path>) -> Outcome<Report> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let params = cfg.params()?;
    let trajectory = cfg.trajectory()?;
    let run = args.sim.run_config();
    if args.emit_profile_every.is_some() && out_dir.is_none() {
        reject!("--emit-profile-every writes profiles.csv and needs --out-dir");
    }
    if args.emit_profile_every == Some(0) || args.profile_stride == 0 {
        reject!("profile interval and stride must be positive");
    }
    let tail = run.tail_weight(auto_kappa(&params, &trajectory)?);
    let grid = Grid::auto(&params, &trajectory, run.dx, run.dt, run.horizon)?;
    let settings = SimSettings {
        theta: run.theta,
        sample_every: run.sample_every,
        tail,
        ..SimSettings::default()
    };
    let reaction = KppReaction::for_params(&params);
    let sim = Simulation::new(
        &params,
        &trajectory,
        &reaction,
        &grid,
        &U0Spec::default(),
        &settings,
    )?;

    let mut profiles = Vec::new();
    let stride = args.profile_stride;
    let trace = sim.run_with(args.emit_profile_every.unwrap_or(0), |s| {
        let t = s.time();
        for i in (0..s.grid().nodes()).step_by(stride) {
            profiles.push(ProfileRow {
                t,
                x: s.grid().x(i),
                u: s.density(i),
            });
        }
    })?;

    let prediction = match (&trajectory, params.require_favorable_patch()) {
        (Trajectory::Linear { speed }, Ok(())) => {
            let s = predict_two_interface(&params, *speed)?;
            Some(Prediction {
                regime: s.regime.as_str(),
                c_star: s.c_star,
            })
        }
        _ => None,
    };
    let summary = Summary {
        fitted_speed: trace.fitted_speed,
        fit_residual: trace.fit_residual,
        fit_window: trace.fit_window,
        horizon: trace.horizon,
        x_min: grid.x_min,
        x_max: grid.x_max,
        nodes: grid.nodes(),
        kappa: match tail {
            TailWeight::Off => 0.0,
            TailWeight::Fixed(k) => k,
        },
        final_front: trace.positions.last().copied(),
        prediction,
    };
    let rows = || {
        trace
            .times
            .iter()
            .zip(&trace.positions)
            .map(|(&t, &x)| TraceRow { t, front_x: x })
    };
    let mut out = Artifacts::new();
    out.add_json("simulate.json", &summary)?;
    out.add("trace.csv", csv_bytes(rows())?);
    if let Some(path) = &args.emit_trace {
        out.add_path(path, csv_bytes(rows())?);
    }
    if args.emit_profile_every.is_some() {
        out.add("profiles.csv", csv_bytes(profiles)?);
    }
    Report::json(&summary, out)?.resolved(&ResolvedScenario {
        scenario: &cfg,
        params: (&params).into(),
    })
}
