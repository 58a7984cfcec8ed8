use clap::Args;
use patchfront::eigen::lambda1_analytic;
use patchfront::speed::{predict_with_lambda1, SpeedPrediction};
use serde::Serialize;

use super::{Report, ResolvedParams};
use crate::args::{ParamArgs, Span};
use crate::failure::Outcome;
use crate::output::{csv_bytes, Artifacts};

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Patch speed.
    #[arg(
        long = "cA",
        required_unless_present = "sweep",
        conflicts_with = "sweep"
    )]
    #[serde(rename = "cA")]
    pub c_a: Option<f64>,
    /// `cA_min:cA_max:n`; prints `cA, regime, c_star` as CSV.
    #[arg(long, value_name = "MIN:MAX:N")]
    pub sweep: Option<Span>,
}

#[derive(Debug, Serialize)]
struct Thresholds {
    slow: f64,
    locked: f64,
    fast: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    regime: &'static str,
    c_star: f64,
    #[serde(rename = "cA")]
    c_a: f64,
    lambda1: f64,
    #[serde(rename = "L")]
    length: f64,
    thresholds: Thresholds,
}

#[derive(Serialize)]
struct Row {
    #[serde(rename = "cA")]
    c_a: f64,
    regime: &'static str,
    c_star: f64,
}

pub fn run(args: &PredictArgs) -> Outcome<Report> {
    let p = args.params.resolve()?;
    // a requested eigenvalue is used as given rather than re-derived from L
    let lambda1 = match args.params.lambda1 {
        Some(l) => l,
        None => lambda1_analytic(&p)?.lambda1,
    };
    let predict =
        |c: f64| -> Outcome<SpeedPrediction> { Ok(predict_with_lambda1(p.r1, p.r3, lambda1, c)?) };
    let mut out = Artifacts::new();
    if let Some(span) = args.sweep {
        let rows = span
            .points()
            .into_iter()
            .map(|c| {
                predict(c).map(|s| Row {
                    c_a: c,
                    regime: s.regime.as_str(),
                    c_star: s.c_star,
                })
            })
            .collect::<Outcome<Vec<_>>>()?;
        let bytes = csv_bytes(rows)?;
        out.add("predict_sweep.csv", bytes.clone());
        return Report {
            stdout: bytes,
            artifacts: out,
            resolved: None,
        }
        .resolved(&ResolvedParams::from(&p));
    }
    let c_a = args.c_a.expect("clap requires cA without a sweep");
    let s = predict(c_a)?;
    let summary = Summary {
        regime: s.regime.as_str(),
        c_star: s.c_star,
        c_a,
        lambda1,
        length: p.length,
        thresholds: Thresholds {
            slow: s.thresholds[0],
            locked: s.thresholds[1],
            fast: s.thresholds[2],
        },
    };
    out.add_json("predict.json", &summary)?;
    Report::json(&summary, out)?.resolved(&ResolvedParams::from(&p))
}
