use std::path::PathBuf;

use clap::Args;
use patchfront::eigen::{critical_length, eigenfunction, lambda1_analytic, lambda1_general_report};
use serde::Serialize;

use super::{Report, ResolvedParams};
use crate::args::ParamArgs;
use crate::failure::Outcome;
use crate::output::Artifacts;

/// Eigenfunction samples cover `y` in `[-2, 3]` in patch units.
const Y_RANGE: (f64, f64) = (-2.0, 3.0);
const Y_SAMPLES: usize = 501;

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Use the truncated Dirichlet ladder instead of the closed form.
    #[arg(long)]
    pub numeric: bool,
    /// Writes `y, phi, dphi` of the closed-form eigenfunction.
    #[arg(long, value_name = "FILE")]
    pub emit_eigenfunction: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Summary {
    r1: f64,
    r2: f64,
    r3: f64,
    #[serde(rename = "L")]
    length: f64,
    critical_length: f64,
    method: &'static str,
    lambda1: f64,
    case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder_half_width: Option<f64>,
}

#[derive(Serialize)]
struct Sample {
    y: f64,
    phi: f64,
    dphi: f64,
}

pub fn run(args: &EigenArgs) -> Outcome<Report> {
    let p = args.params.resolve()?;
    let exact = lambda1_analytic(&p)?;
    let phi = eigenfunction(&p, &exact)?;
    let (method, lambda1, ladder_half_width) = if args.numeric {
        let ladder = lambda1_general_report(&p.profile(), p.length)?;
        (
            "numeric",
            ladder.estimate,
            ladder.half_widths.last().copied(),
        )
    } else {
        ("analytic", exact.lambda1, None)
    };
    let summary = Summary {
        r1: p.r1,
        r2: p.r2,
        r3: p.r3,
        length: p.length,
        critical_length: critical_length(p.r1, p.r2, p.r3)?,
        method,
        lambda1,
        case: format!("{:?}", exact.case),
        ladder_half_width,
    };
    let mut out = Artifacts::new();
    out.add_json("eigen.json", &summary)?;
    if let Some(path) = &args.emit_eigenfunction {
        let (a, b) = Y_RANGE;
        let rows = (0..Y_SAMPLES).map(|k| {
            let y = a + (b - a) * k as f64 / (Y_SAMPLES - 1) as f64;
            let (v, d, _) = phi.eval(y);
            Sample { y, phi: v, dphi: d }
        });
        out.add_path(path, crate::output::csv_bytes(rows)?);
    }
    Report::json(&summary, out)?.resolved(&ResolvedParams::from(&p))
}
