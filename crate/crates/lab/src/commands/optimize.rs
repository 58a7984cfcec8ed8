use clap::Args;
use patchfront::optimize::{
    brute_force_optimum, local_search, Budget, ProfileCandidate, MAX_BRUTE_FORCE_CELLS,
};
use rand::SeedableRng;
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;

use super::Report;
use crate::failure::{reject, Outcome};
use crate::output::Artifacts;

/// Agreement required between a local optimum and the exhaustive one.
pub const MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    /// Base rate.
    #[arg(long)]
    pub r1: f64,
    /// Cap on the increment over r1.
    #[arg(long)]
    pub h: f64,
    /// Cap on the integral of the increment.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub mass: f64,
    /// Width of the window holding the increment.
    #[arg(long = "W")]
    #[serde(rename = "W")]
    pub width: f64,
    #[arg(long)]
    pub cells: usize,
    /// Random starts of the local search.
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Local search over increments in [0, h] instead of {0, h}.
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Serialize)]
struct LocalSummary {
    starts: usize,
    relaxed: bool,
    best: f64,
    worst: f64,
    all_contiguous: bool,
    all_bang_bang: bool,
    /// Every start ends within the match tolerance of the exhaustive optimum.
    matches_exhaustive: Option<bool>,
}

#[derive(Serialize)]
struct Summary {
    method: &'static str,
    raised_cells: usize,
    lambda1: f64,
    lambda1_refined: f64,
    contiguous: bool,
    ties: Option<usize>,
    ties_contiguous: Option<bool>,
    evaluated: Option<usize>,
    local_search: Option<LocalSummary>,
}

#[derive(Serialize)]
struct Cell {
    cell: usize,
    increment: f64,
}

pub fn run(a: &OptimizeArgs) -> Outcome<Report> {
    let budget = Budget::new(a.r1, a.h, a.mass, a.width, a.cells)?;
    let exhaustive = a.cells <= MAX_BRUTE_FORCE_CELLS;
    if !exhaustive && a.starts == 0 {
        reject!("more than {MAX_BRUTE_FORCE_CELLS} cells needs at least one local-search start");
    }
    let brute = if exhaustive {
        Some(brute_force_optimum(&budget)?)
    } else {
        None
    };

    let mut rng = Pcg64::seed_from_u64(a.seed);
    let starts: Vec<Vec<f64>> = (0..a.starts)
        .map(|_| budget.random_start(a.relaxed, &mut rng))
        .collect();
    let outcomes = starts
        .par_iter()
        .map(|s| local_search(&budget, s, a.relaxed))
        .collect::<Result<Vec<_>, _>>()?;
    let local = (!outcomes.is_empty()).then(|| {
        let values = outcomes.iter().map(|o| o.candidate.lambda1);
        LocalSummary {
            starts: outcomes.len(),
            relaxed: a.relaxed,
            best: values.clone().fold(f64::INFINITY, f64::min),
            worst: values.fold(f64::NEG_INFINITY, f64::max),
            all_contiguous: outcomes.iter().all(|o| o.candidate.is_contiguous()),
            all_bang_bang: outcomes.iter().all(|o| o.bang_bang),
            matches_exhaustive: brute.as_ref().map(|b| {
                outcomes
                    .iter()
                    .all(|o| (o.candidate.lambda1 - b.best.lambda1).abs() < MATCH_TOL)
            }),
        }
    });

    let (best, refined): (ProfileCandidate, f64) = match &brute {
        Some(b) => (b.best.clone(), b.lambda1_refined),
        None => {
            // first start wins ties, so the choice does not depend on threads
            let o = outcomes
                .iter()
                .reduce(|x, y| {
                    if y.candidate.lambda1 < x.candidate.lambda1 {
                        y
                    } else {
                        x
                    }
                })
                .expect("at least one start");
            (
                o.candidate.clone(),
                budget.lambda1_refined(&o.candidate.increments)?,
            )
        }
    };
    let summary = Summary {
        method: if exhaustive {
            "exhaustive"
        } else {
            "local_search"
        },
        raised_cells: budget.raised_cells(),
        lambda1: best.lambda1,
        lambda1_refined: refined,
        contiguous: best.is_contiguous(),
        ties: brute.as_ref().map(|b| b.ties.len()),
        ties_contiguous: brute.as_ref().map(|b| b.all_ties_contiguous()),
        evaluated: brute.as_ref().map(|b| b.evaluated),
        local_search: local,
    };
    let cells = best
        .increments
        .iter()
        .enumerate()
        .map(|(cell, &increment)| Cell { cell, increment });
    let mut out = Artifacts::new();
    out.add_json("optimize.json", &summary)?;
    out.add_csv("profile.csv", cells)?;
    Report::json(&summary, out)
}
