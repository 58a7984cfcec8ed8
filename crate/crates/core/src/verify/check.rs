//! Pointwise residual and corner checks shared by the construction
//! checkers.

use alloc::vec::Vec;

use crate::error::ensure;
use crate::Result;

/// Relative tolerance of every residual, corner and continuity check.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Violations kept verbatim in a report; the rest are only counted.
const KEPT_VIOLATIONS: usize = 32;

/// Value and derivatives of a construction at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
    pub uxx: f64,
}

/// `nt` equally spaced times on `[0, t_max]` (just `t = 0` when `nt = 1`)
/// and `per_piece` interior points in every piece of the construction at
/// each of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub t_max: f64,
    pub nt: usize,
    pub per_piece: usize,
}

impl SampleGrid {
    pub fn new(t_max: f64, nt: usize, per_piece: usize) -> Result<Self> {
        ensure!(
            t_max.is_finite() && t_max >= 0.0,
            "t_max must be finite and nonnegative, got {t_max}"
        );
        ensure!(
            nt >= 1 && per_piece >= 1,
            "need at least one time and one point per piece"
        );
        Ok(SampleGrid {
            t_max,
            nt,
            per_piece,
        })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let step = if self.nt > 1 {
            self.t_max / (self.nt - 1) as f64
        } else {
            0.0
        };
        (0..self.nt).map(move |k| k as f64 * step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// The differential inequality fails at a sample.
    Residual,
    /// Wrong sign of the derivative jump at a corner.
    AngleGap,
    /// The pieces do not meet at a corner.
    Continuity,
    /// A piece that must be nonempty is empty.
    Layout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: f64,
    pub x: f64,
    pub piece: &'static str,
    /// Relative size of the violation; positive means violated.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub samples: usize,
    pub corners: usize,
    /// Largest relative excess of the differential inequality (negative when
    /// every sample satisfies it strictly).
    pub worst_residual: f64,
    /// Largest relative excess of a corner condition.
    pub worst_gap: f64,
    /// Largest relative jump of the value across a corner.
    pub worst_jump: f64,
    pub violations: usize,
    /// The first few violations.
    pub examples: Vec<Violation>,
}

impl CheckReport {
    pub(crate) fn new() -> Self {
        CheckReport {
            samples: 0,
            corners: 0,
            worst_residual: f64::NEG_INFINITY,
            worst_gap: f64::NEG_INFINITY,
            worst_jump: 0.0,
            violations: 0,
            examples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub(crate) fn flag(&mut self, v: Violation) {
        self.violations += 1;
        if self.examples.len() < KEPT_VIOLATIONS {
            self.examples.push(v);
        }
    }
}

/// Direction of the differential inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    /// `u_t - u_xx - f >= 0`, derivative may only drop across corners.
    Super,
    /// `u_t - u_xx - f <= 0`, derivative may only rise across corners.
    Sub,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment<P> {
    pub piece: P,
    pub name: &'static str,
    pub start: f64,
    pub end: f64,
}

/// Splits segments at the given points so that no segment straddles a jump
/// of the growth rate.
pub(crate) fn split_at<P: Copy>(segments: Vec<Segment<P>>, points: &[f64]) -> Vec<Segment<P>> {
    let mut out = Vec::with_capacity(segments.len() + points.len());
    for seg in segments {
        let mut start = seg.start;
        for &p in points {
            if p > start && p < seg.end {
                out.push(Segment {
                    start,
                    end: p,
                    ..seg
                });
                start = p;
            }
        }
        out.push(Segment { start, ..seg });
    }
    out
}

fn relative(num: f64, a: f64, b: f64) -> f64 {
    let scale = a.abs() + b.abs();
    if scale == 0.0 {
        0.0
    } else {
        num / scale
    }
}

/// Samples every segment at time `t` and checks each corner between
/// consecutive segments. `eval` gives the jet of a piece (continued to the
/// segment ends), `rate` the growth rate at `x` and `reaction` the
/// nonlinearity compared against.
pub(crate) fn check_segments<P, E, R, F>(
    report: &mut CheckReport,
    side: Side,
    t: f64,
    segments: &[Segment<P>],
    per_piece: usize,
    eval: E,
    rate: R,
    reaction: F,
) where
    P: Copy,
    E: Fn(P, f64) -> Jet,
    R: Fn(f64) -> f64,
    F: Fn(f64, f64) -> f64,
{
    for seg in segments {
        if seg.end < seg.start {
            report.flag(Violation {
                kind: ViolationKind::Layout,
                t,
                x: seg.start,
                piece: seg.name,
                excess: seg.start - seg.end,
            });
            continue;
        }
        let width = seg.end - seg.start;
        if width == 0.0 {
            continue;
        }
        for k in 0..per_piece {
            let x = seg.start + (k as f64 + 0.5) * width / per_piece as f64;
            let j = eval(seg.piece, x);
            let f = reaction(rate(x), j.u);
            let n = j.ut - j.uxx - f;
            let signed = if side == Side::Super { -n } else { n };
            let excess = relative(signed, j.ut.abs() + j.uxx.abs(), f);
            report.samples += 1;
            report.worst_residual = report.worst_residual.max(excess);
            if excess > RESIDUAL_TOL {
                report.flag(Violation {
                    kind: ViolationKind::Residual,
                    t,
                    x,
                    piece: seg.name,
                    excess,
                });
            }
        }
    }
    for w in segments.windows(2) {
        let (left, right) = (&w[0], &w[1]);
        if left.end < left.start || right.end < right.start {
            continue;
        }
        let x = left.end;
        let l = eval(left.piece, x);
        let r = eval(right.piece, x);
        report.corners += 1;
        // slopes enter the scale so that a piece vanishing at a support
        // edge, up to rounding, meets the zero piece
        let jump = relative(
            (l.u - r.u).abs(),
            l.u.abs() + r.u.abs(),
            l.ux.abs() + r.ux.abs(),
        );
        report.worst_jump = report.worst_jump.max(jump);
        if jump > RESIDUAL_TOL {
            report.flag(Violation {
                kind: ViolationKind::Continuity,
                t,
                x,
                piece: right.name,
                excess: jump,
            });
        }
        let rise = r.ux - l.ux;
        let gap = relative(if side == Side::Super { rise } else { -rise }, l.ux, r.ux);
        report.worst_gap = report.worst_gap.max(gap);
        if gap > RESIDUAL_TOL {
            report.flag(Violation {
                kind: ViolationKind::AngleGap,
                t,
                x,
                piece: right.name,
                excess: gap,
            });
        }
    }
}
