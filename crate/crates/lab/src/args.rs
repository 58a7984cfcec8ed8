//! Flag groups shared between subcommands.

use std::str::FromStr;

use clap::Args;
use patchfront::verify::{RunConfig, TailPolicy};
use patchfront::GrowthParams;
use serde::Serialize;

use crate::config::resolve_params;
use crate::failure::Outcome;

/// `--r1 --r2 --r3` plus `--L` or `--lambda1`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub r1: f64,
    #[arg(long)]
    pub r2: f64,
    #[arg(long)]
    pub r3: f64,
    /// Patch length.
    #[arg(long = "L", conflicts_with = "lambda1")]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    /// Principal eigenvalue to reach; the patch length is solved for.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "length")]
    pub lambda1: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Outcome<GrowthParams> {
        resolve_params(self.r1, self.r2, self.r3, self.length, self.lambda1)
    }
}

/// Tail weighting of the simulator: `auto`, `off` or a fixed rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail(pub TailPolicy);

impl FromStr for Tail {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Tail(TailPolicy::Auto)),
            "off" => Ok(Tail(TailPolicy::Off)),
            _ => match s.parse::<f64>() {
                Ok(k) if k.is_finite() && k > 0.0 => Ok(Tail(TailPolicy::Fixed(k))),
                _ => Err(format!("expected auto, off or a positive rate, got {s}")),
            },
        }
    }
}

impl Serialize for Tail {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            TailPolicy::Auto => s.serialize_str("auto"),
            TailPolicy::Off => s.serialize_str("off"),
            TailPolicy::Fixed(k) => s.serialize_f64(k),
        }
    }
}

/// Discretization and tracking flags.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0.05)]
    pub dx: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Horizon.
    #[arg(long = "T", default_value_t = 300.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Tracking level.
    #[arg(long, default_value_t = 0.01)]
    pub theta: f64,
    /// Time between front samples.
    #[arg(long, default_value_t = 0.5)]
    pub sample_every: f64,
    /// Tail weight ahead of the front: auto, off or a fixed rate.
    #[arg(long, default_value = "auto")]
    pub tail: Tail,
}

impl SimArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            dx: self.dx,
            dt: self.dt,
            horizon: self.horizon,
            theta: self.theta,
            sample_every: self.sample_every,
            tail: self.tail.0,
        }
    }
}

/// Comma-separated numbers, `a,b,c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("not a number: {p}"))
            })
            .collect::<Result<_, _>>()
            .map(List)
    }
}

/// `min:max:n`, `n >= 2` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected min:max:n, got {s}"));
        };
        let min = a.parse::<f64>().map_err(|_| format!("bad lower end {a}"))?;
        let max = b.parse::<f64>().map_err(|_| format!("bad upper end {b}"))?;
        let n = n
            .parse::<usize>()
            .map_err(|_| format!("bad point count {n}"))?;
        if !(min.is_finite() && max.is_finite() && min < max && n >= 2) {
            return Err(format!("need finite min < max and n >= 2, got {s}"));
        }
        Ok(Span { min, max, n })
    }
}

impl Span {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n)
            .map(|k| {
                if k + 1 == self.n {
                    self.max
                } else {
                    self.min + step * k as f64
                }
            })
            .collect()
    }
}
