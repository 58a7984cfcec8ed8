use std::path::PathBuf;

use clap::{Args, Subcommand};
use patchfront::speed::predict_two_interface;
use patchfront::verify::{
    check_subsolution, check_supersolution, corollary_bounds, oscillation_experiment,
    solve_interface, sweep_point, CheckReport, SampleGrid, SubSolutionSpec, SuperSolutionSpec,
    DERIVATIVE_TOL, SPEED_TOLERANCE,
};
use rayon::prelude::*;
use serde::Serialize;

use super::{Report, ResolvedParams, ResolvedScenario};
use crate::args::{List, ParamArgs, SimArgs, Span};
use crate::config::ScenarioConfig;
use crate::failure::{reject, Outcome};
use crate::output::Artifacts;

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VerifyMode {
    /// Simulated against predicted speeds over a set of patch speeds.
    Sweep(SweepArgs),
    /// Slow- and fast-patch envelopes for an arbitrary trajectory.
    Corollary(CorollaryArgs),
    /// Per-interval speeds under a slowly oscillating patch speed.
    Oscillate(OscillateArgs),
    /// Pointwise certification of the super- and sub-solutions.
    Supersub(SupersubArgs),
    /// The interface of the sub-solution.
    Interface(InterfaceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Comma-separated patch speeds.
    #[arg(
        long = "cA",
        required_unless_present = "sweep",
        conflicts_with = "sweep"
    )]
    #[serde(rename = "cA")]
    pub c_a: Option<List>,
    /// `cA_min:cA_max:n`.
    #[arg(long, value_name = "MIN:MAX:N")]
    pub sweep: Option<Span>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CorollaryArgs {
    /// Scenario file.
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct OscillateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long = "cA1")]
    #[serde(rename = "cA1")]
    pub c_a1: f64,
    #[arg(long = "cA2")]
    #[serde(rename = "cA2")]
    pub c_a2: f64,
    /// Comma-separated increasing switch times; the last one ends the run.
    #[arg(long, default_value = "5,50,1000")]
    pub switch_times: List,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SupersubArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long = "cA")]
    #[serde(rename = "cA")]
    pub c_a: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    /// Sample times in `[0, t_max]`.
    #[arg(long, default_value_t = 101)]
    pub nt: usize,
    /// Samples per piece and time.
    #[arg(long, default_value_t = 100)]
    pub per_piece: usize,
    /// Amplitude of the sub-solution, in `(0, 1]`.
    #[arg(long, default_value_t = 1.0)]
    pub iota: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct InterfaceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long = "cA")]
    #[serde(rename = "cA")]
    pub c_a: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 101)]
    pub nt: usize,
    /// Multiplies the default gamma.
    #[arg(long, default_value_t = 1.0)]
    pub gamma_scale: f64,
}

pub fn run(mode: &VerifyMode) -> Outcome<Report> {
    match mode {
        VerifyMode::Sweep(a) => sweep(a),
        VerifyMode::Corollary(a) => corollary(a),
        VerifyMode::Oscillate(a) => oscillate(a),
        VerifyMode::Supersub(a) => supersub(a),
        VerifyMode::Interface(a) => interface(a),
    }
}

#[derive(Serialize)]
struct SweepCsvRow {
    #[serde(rename = "cA")]
    c_a: f64,
    regime: &'static str,
    c_star: f64,
    fitted_speed: f64,
    fit_residual: f64,
    rel_gap: f64,
    kappa: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SweepSummary {
    tolerance: f64,
    points: usize,
    max_rel_gap: f64,
    passed: bool,
}

fn sweep(a: &SweepArgs) -> Outcome<Report> {
    let params = a.params.resolve()?;
    let grid = match (&a.c_a, a.sweep) {
        (Some(list), _) => list.0.clone(),
        (None, Some(span)) => span.points(),
        (None, None) => reject!("give --cA or --sweep"),
    };
    // validate every point before the first simulation starts
    for &c in &grid {
        predict_two_interface(&params, c)?;
    }
    let cfg = a.sim.run_config();
    let rows = grid
        .par_iter()
        .map(|&c| sweep_point(&params, c, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let csv_rows: Vec<SweepCsvRow> = rows
        .iter()
        .map(|r| SweepCsvRow {
            c_a: r.c_a,
            regime: r.prediction.regime.as_str(),
            c_star: r.prediction.c_star,
            fitted_speed: r.fitted_speed,
            fit_residual: r.fit_residual,
            rel_gap: r.rel_gap,
            kappa: r.kappa,
            passed: r.passed(),
        })
        .collect();
    let summary = SweepSummary {
        tolerance: SPEED_TOLERANCE,
        points: rows.len(),
        max_rel_gap: rows.iter().map(|r| r.rel_gap).fold(0.0, f64::max),
        passed: rows.iter().all(|r| r.passed()),
    };
    let mut out = Artifacts::new();
    out.add_json("sweep.json", &summary)?;
    out.add_csv("sweep.csv", csv_rows)?;
    Report::json(&summary, out)?.resolved(&ResolvedParams::from(&params))
}

#[derive(Serialize)]
struct EnvelopeRow {
    t: f64,
    position: f64,
    upper_ratio: f64,
    lower_ratio: f64,
}

#[derive(Serialize)]
struct CorollarySummary {
    case: &'static str,
    sup_ratio: f64,
    inf_ratio: f64,
    slow_envelope: f64,
    fast_envelope: f64,
    predicted: Option<f64>,
    fitted: Option<f64>,
    rel_gap: Option<f64>,
    tolerance: f64,
    passed: bool,
}

fn corollary(a: &CorollaryArgs) -> Outcome<Report> {
    let cfg = ScenarioConfig::load(&a.config)?;
    let params = cfg.params()?;
    let trajectory = cfg.trajectory()?;
    let v = corollary_bounds(&params, &trajectory, &a.sim.run_config())?;
    let summary = CorollarySummary {
        case: v.case.as_str(),
        sup_ratio: v.sup_ratio,
        inf_ratio: v.inf_ratio,
        slow_envelope: 2.0 * params.r3.sqrt(),
        fast_envelope: 2.0 * params.r1.sqrt() + 2.0 * (params.r2 - params.r1).sqrt(),
        predicted: v.predicted,
        fitted: v.fitted,
        rel_gap: v.rel_gap,
        tolerance: v.tolerance,
        passed: v.passed,
    };
    let t_end = a.sim.horizon;
    let samples = 200;
    let rows = (0..=samples).map(|k| {
        let t = 1.0 + (t_end - 1.0) * k as f64 / samples as f64;
        let position = trajectory.position(t);
        EnvelopeRow {
            t,
            position,
            upper_ratio: (position + params.length) / t,
            lower_ratio: position / t,
        }
    });
    let mut out = Artifacts::new();
    out.add_json("corollary.json", &summary)?;
    out.add_csv("envelope.csv", rows)?;
    Report::json(&summary, out)?.resolved(&ResolvedScenario {
        scenario: &cfg,
        params: (&params).into(),
    })
}

#[derive(Serialize)]
struct IntervalRow {
    start: f64,
    end: f64,
    #[serde(rename = "cA")]
    c_a: f64,
    target: f64,
    fit_start: f64,
    fit_end: f64,
    fitted_speed: f64,
}

#[derive(Serialize)]
struct OscillationSummary {
    targets: (f64, f64),
    late_spread: f64,
    required_spread: f64,
    alternates: bool,
    kappa: f64,
    passed: bool,
}

fn oscillate(a: &OscillateArgs) -> Outcome<Report> {
    let params = a.params.resolve()?;
    let mut cfg = a.sim.run_config();
    cfg.horizon = a.switch_times.0.last().copied().unwrap_or(cfg.horizon);
    let r = oscillation_experiment(&params, a.c_a1, a.c_a2, &a.switch_times.0, &cfg)?;
    let summary = OscillationSummary {
        targets: r.targets,
        late_spread: r.late_spread,
        required_spread: r.required_spread,
        alternates: r.alternates,
        kappa: r.kappa,
        passed: r.passed(),
    };
    let rows = r.intervals.iter().map(|i| IntervalRow {
        start: i.start,
        end: i.end,
        c_a: i.patch_speed,
        target: i.target,
        fit_start: i.fit_window.0,
        fit_end: i.fit_window.1,
        fitted_speed: i.fitted_speed,
    });
    let mut out = Artifacts::new();
    out.add_json("oscillation.json", &summary)?;
    out.add_csv("intervals.csv", rows)?;
    Report::json(&summary, out)?.resolved(&ResolvedParams::from(&params))
}

#[derive(Serialize)]
struct CheckSummary {
    construction: &'static str,
    speed: f64,
    samples: usize,
    corners: usize,
    worst_residual: f64,
    worst_gap: f64,
    worst_jump: f64,
    violations: usize,
    passed: bool,
}

#[derive(Serialize)]
struct ViolationRow {
    construction: &'static str,
    kind: String,
    t: f64,
    x: f64,
    piece: &'static str,
    excess: f64,
}

#[derive(Serialize)]
struct SupersubSummary {
    #[serde(rename = "cA")]
    c_a: f64,
    regime: &'static str,
    angle_margin: f64,
    supersolution: CheckSummary,
    subsolution: Option<CheckSummary>,
    /// Why the sub-solution was not built, when it was not.
    subsolution_skipped: Option<String>,
    passed: bool,
}

fn summarize(construction: &'static str, speed: f64, r: &CheckReport) -> CheckSummary {
    CheckSummary {
        construction,
        speed,
        samples: r.samples,
        corners: r.corners,
        worst_residual: r.worst_residual,
        worst_gap: r.worst_gap,
        worst_jump: r.worst_jump,
        violations: r.violations,
        passed: r.passed(),
    }
}

fn violation_rows<'a>(
    construction: &'static str,
    r: &'a CheckReport,
) -> impl Iterator<Item = ViolationRow> + 'a {
    r.examples.iter().map(move |v| ViolationRow {
        construction,
        kind: format!("{:?}", v.kind),
        t: v.t,
        x: v.x,
        piece: v.piece,
        excess: v.excess,
    })
}

fn supersub(a: &SupersubArgs) -> Outcome<Report> {
    let params = a.params.resolve()?;
    let grid = SampleGrid::new(a.t_max, a.nt, a.per_piece)?;
    let pred = predict_two_interface(&params, a.c_a)?;
    let sup = if a.c_a <= pred.thresholds[1] {
        SuperSolutionSpec::step1(&params, a.c_a)?
    } else {
        SuperSolutionSpec::step2_at_critical_speed(&params, a.c_a)?
    };
    let (sup_name, sub_name) = ("supersolution", "subsolution");
    let sup_report = check_supersolution(&sup, &grid)?;
    let (sub, skipped) = match SubSolutionSpec::default_recipe(&params, a.c_a) {
        Ok(spec) => (Some(spec.with_iota(a.iota)?), None),
        Err(e) if e.is_validation() => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let sub_report = sub
        .as_ref()
        .map(|s| check_subsolution(s, &grid))
        .transpose()?;
    let mut rows: Vec<ViolationRow> = violation_rows(sup_name, &sup_report).collect();
    if let Some(r) = &sub_report {
        rows.extend(violation_rows(sub_name, r));
    }
    let summary = SupersubSummary {
        c_a: a.c_a,
        regime: pred.regime.as_str(),
        angle_margin: sup.angle_margin(),
        passed: sup_report.passed() && sub_report.as_ref().is_none_or(|r| r.passed()),
        supersolution: summarize(
            match sup.case() {
                patchfront::verify::SuperCase::Step1 => "step1",
                patchfront::verify::SuperCase::Step2 => "step2",
            },
            sup.speed(),
            &sup_report,
        ),
        subsolution: sub
            .as_ref()
            .zip(sub_report.as_ref())
            .map(|(s, r)| summarize("step4", s.parameters().c, r)),
        subsolution_skipped: skipped,
    };
    let mut out = Artifacts::new();
    out.add_json("supersub.json", &summary)?;
    if rows.is_empty() {
        out.add(
            "violations.csv",
            b"construction,kind,t,x,piece,excess\n".to_vec(),
        );
    } else {
        out.add_csv("violations.csv", rows)?;
    }
    Report::json(&summary, out)?.resolved(&ResolvedParams::from(&params))
}

#[derive(Serialize)]
struct InterfaceRow {
    t: f64,
    position: f64,
    offset: f64,
    xi: f64,
    dp: f64,
    dq: f64,
    drift: f64,
    drift_fd: f64,
}

#[derive(Serialize)]
struct InterfaceSummary {
    #[serde(rename = "cA")]
    c_a: f64,
    initial_bracket: (f64, f64),
    offset_range: (f64, f64),
    xi_floor: f64,
    min_xi: f64,
    drift_error: f64,
    drift_tolerance: f64,
    slopes_ok: bool,
    inside_patch_frame: bool,
    above_floor: bool,
    starts_in_bracket: bool,
    passed: bool,
}

fn interface(a: &InterfaceArgs) -> Outcome<Report> {
    let params = a.params.resolve()?;
    if a.nt < 2 || a.t_max.is_nan() || a.t_max <= 0.0 {
        reject!("need nt >= 2 and t_max > 0");
    }
    let mut spec = SubSolutionSpec::default_recipe(&params, a.c_a)?;
    if a.gamma_scale != 1.0 {
        spec = spec.with_gamma_scaled(a.gamma_scale)?;
    }
    let times: Vec<f64> = (0..a.nt)
        .map(|k| a.t_max * k as f64 / (a.nt - 1) as f64)
        .collect();
    let trace = solve_interface(&spec, &times)?;
    let summary = InterfaceSummary {
        c_a: a.c_a,
        initial_bracket: trace.initial_bracket,
        offset_range: trace.offset_range(),
        xi_floor: trace.xi_floor,
        min_xi: trace.min_xi(),
        drift_error: trace.drift_error(),
        drift_tolerance: DERIVATIVE_TOL,
        slopes_ok: trace.slopes_ok(),
        inside_patch_frame: trace.inside_patch_frame(),
        above_floor: trace.above_floor(),
        starts_in_bracket: trace.starts_in_bracket(),
        passed: trace.all_hold(),
    };
    let rows = trace.points.iter().map(|p| InterfaceRow {
        t: p.t,
        position: p.position,
        offset: p.offset,
        xi: p.xi,
        dp: p.dp,
        dq: p.dq,
        drift: p.drift,
        drift_fd: p.drift_fd,
    });
    let mut out = Artifacts::new();
    out.add_json("interface.json", &summary)?;
    out.add_csv("interface.csv", rows)?;
    Report::json(&summary, out)?.resolved(&ResolvedParams::from(&params))
}
