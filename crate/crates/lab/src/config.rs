//! Scenario files.
//!
//! ```json
//! { "r1": 1, "r2": 9, "r3": 1, "lambda1": -4,
//!   "trajectory": { "type": "linear", "cA": 5 } }
//! ```
//!
//! Exactly one of `L` and `lambda1` fixes the patch. Trajectories are
//! `linear {cA}`, `slow_oscillation {cA1, cA2, switch_times}` and
//! `piecewise_linear {knots: [[t, A], ...], tail_speed}`.

use std::fs;
use std::path::Path;

use anyhow::Context;
use patchfront::eigen::params_for_lambda1;
use patchfront::{GrowthParams, Trajectory};
use serde::{Deserialize, Serialize};

use crate::failure::{reject, Failure, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    pub trajectory: TrajectoryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    Linear {
        #[serde(rename = "cA")]
        c_a: f64,
    },
    SlowOscillation {
        #[serde(rename = "cA1")]
        c_a1: f64,
        #[serde(rename = "cA2")]
        c_a2: f64,
        switch_times: Vec<f64>,
    },
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
        tail_speed: f64,
    },
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Outcome<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))
            .map_err(Failure::usage)?;
        serde_json::from_str(&text)
            .with_context(|| format!("malformed config file {}", path.display()))
            .map_err(Failure::usage)
    }

    pub fn params(&self) -> Outcome<GrowthParams> {
        resolve_params(self.r1, self.r2, self.r3, self.length, self.lambda1)
    }

    pub fn trajectory(&self) -> Outcome<Trajectory> {
        self.trajectory.build()
    }
}

impl TrajectoryConfig {
    pub fn build(&self) -> Outcome<Trajectory> {
        Ok(match self {
            TrajectoryConfig::Linear { c_a } => Trajectory::linear(*c_a)?,
            TrajectoryConfig::SlowOscillation {
                c_a1,
                c_a2,
                switch_times,
            } => Trajectory::slow_oscillation(*c_a1, *c_a2, switch_times.clone())?,
            TrajectoryConfig::PiecewiseLinear { knots, tail_speed } => {
                Trajectory::piecewise_linear(knots.clone(), *tail_speed)?
            }
        })
    }
}

/// Growth parameters from either the patch length or the eigenvalue it
/// should produce.
pub fn resolve_params(
    r1: f64,
    r2: f64,
    r3: f64,
    length: Option<f64>,
    lambda1: Option<f64>,
) -> Outcome<GrowthParams> {
    match (length, lambda1) {
        (Some(l), None) => Ok(GrowthParams::new(r1, r2, r3, l)?),
        (None, Some(lam)) => Ok(params_for_lambda1(r1, r2, r3, lam)?),
        (Some(_), Some(_)) => reject!("give either L or lambda1, not both"),
        (None, None) => reject!("one of L and lambda1 is required"),
    }
}
