//! Super-solutions bounding the front from above.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, sqrt};

use super::check::{check_segments, split_at, CheckReport, Jet, SampleGrid, Segment, Side};
use crate::eigen::{eigenfunction, lambda1_analytic, PiecewiseEigenfunction};
use crate::error::ensure;
use crate::model::{GrowthParams, KppReaction};
use crate::speed::{decay_rate, predict_with_lambda1};
use crate::Result;

/// Width given to the unbounded end pieces when sampling.
const SPAN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuperCase {
    /// `2 min(1, exp(-lambda(c) (x - c t - L)))` with `c = max(2 sqrt(r3), cA)`
    /// and the `r3` decay rate; for `cA <= 2 sqrt(-lambda1)`.
    Step1,
    /// `2`, then `exp(-lambda(c) (x - c t))` up to the patch, then
    /// `exp(-lambda(c) (cA - c) t) exp(-cA (x - cA t) / 2) phi1((x - cA t) / L)`,
    /// with the `r1` decay rate; for `cA > 2 sqrt(-lambda1)`.
    Step2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperSolutionSpec {
    case: SuperCase,
    params: GrowthParams,
    c_a: f64,
    c: f64,
    lambda_c: f64,
    lambda1: f64,
    phi: Option<PiecewiseEigenfunction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Two,
    Exponential,
    Patch,
}

impl SuperSolutionSpec {
    pub fn step1(params: &GrowthParams, c_a: f64) -> Result<Self> {
        let lambda1 = lambda1_analytic(params)?.lambda1;
        ensure!(
            c_a.is_finite() && c_a > 0.0,
            "patch speed must be positive, got {c_a}"
        );
        ensure!(
            c_a <= 2.0 * sqrt(-lambda1),
            "Step1 needs cA <= 2 sqrt(-lambda1) = {}, got {c_a}",
            2.0 * sqrt(-lambda1)
        );
        let c = c_a.max(2.0 * sqrt(params.r3));
        let lambda_c = decay_rate(params.r3, c)?;
        Ok(SuperSolutionSpec {
            case: SuperCase::Step1,
            params: *params,
            c_a,
            c,
            lambda_c,
            lambda1,
            phi: None,
        })
    }

    pub fn step2(params: &GrowthParams, c_a: f64, c: f64) -> Result<Self> {
        let eig = lambda1_analytic(params)?;
        let lambda1 = eig.lambda1;
        ensure!(
            c_a.is_finite() && c_a > 2.0 * sqrt(-lambda1),
            "Step2 needs cA > 2 sqrt(-lambda1) = {}, got {c_a}",
            2.0 * sqrt(-lambda1)
        );
        let floor = 2.0 * sqrt(params.r1);
        ensure!(
            c >= floor && c < c_a,
            "Step2 needs 2 sqrt(r1) = {floor} <= c < cA = {c_a}, got c = {c}"
        );
        let lambda_c = decay_rate(params.r1, c)?;
        let phi = eigenfunction(params, &eig)?;
        Ok(SuperSolutionSpec {
            case: SuperCase::Step2,
            params: *params,
            c_a,
            c,
            lambda_c,
            lambda1,
            phi: Some(phi),
        })
    }

    /// Step 2 at the predicted speed `c*(cA)`, the slowest admissible one.
    pub fn step2_at_critical_speed(params: &GrowthParams, c_a: f64) -> Result<Self> {
        let lambda1 = lambda1_analytic(params)?.lambda1;
        let pred = predict_with_lambda1(params.r1, params.r3, lambda1, c_a)?;
        SuperSolutionSpec::step2(params, c_a, pred.c_star)
    }

    pub fn case(&self) -> SuperCase {
        self.case
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn patch_speed(&self) -> f64 {
        self.c_a
    }

    /// `lambda(c)`.
    pub fn decay(&self) -> f64 {
        self.lambda_c
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// Slack of the corner condition at the patch edge: for Step 2,
    /// `cA/2 - lambda(c) - phi1'(0)/L`, which reads
    /// `cA/2 - lambda(c) - sqrt(-r1 - lambda1)` when `lambda1 != -r1`; for
    /// Step 1 the derivative drop `2 lambda(c)` at the kink.
    pub fn angle_margin(&self) -> f64 {
        match &self.phi {
            None => 2.0 * self.lambda_c,
            Some(phi) => 0.5 * self.c_a - self.lambda_c - phi.d1(0.0) / self.params.length,
        }
    }

    /// Jet of the construction at `(t, x)`.
    pub fn jet(&self, t: f64, x: f64) -> Jet {
        let segs = self.layout(t);
        let piece = segs
            .iter()
            .rev()
            .find(|s| x >= s.start)
            .map_or(segs[0].piece, |s| s.piece);
        self.piece_jet(piece, t, x)
    }

    fn corner(&self, t: f64) -> f64 {
        match self.case {
            SuperCase::Step1 => self.c * t + self.params.length,
            SuperCase::Step2 => self.c * t - core::f64::consts::LN_2 / self.lambda_c,
        }
    }

    fn layout(&self, t: f64) -> Vec<Segment<Piece>> {
        let k = self.corner(t);
        let patch = self.c_a * t;
        let segs = match self.case {
            SuperCase::Step1 => vec![
                Segment {
                    piece: Piece::Two,
                    name: "plateau",
                    start: k - SPAN,
                    end: k,
                },
                Segment {
                    piece: Piece::Exponential,
                    name: "exponential",
                    start: k,
                    end: k + SPAN,
                },
            ],
            SuperCase::Step2 => vec![
                Segment {
                    piece: Piece::Two,
                    name: "plateau",
                    start: k - SPAN,
                    end: k,
                },
                Segment {
                    piece: Piece::Exponential,
                    name: "exponential",
                    start: k,
                    end: patch,
                },
                Segment {
                    piece: Piece::Patch,
                    name: "patch-frame",
                    start: patch,
                    end: patch + SPAN,
                },
            ],
        };
        split_at(segs, &[patch, patch + self.params.length])
    }

    fn piece_jet(&self, piece: Piece, t: f64, x: f64) -> Jet {
        let (c, lam) = (self.c, self.lambda_c);
        match piece {
            Piece::Two => Jet {
                u: 2.0,
                ..Jet::default()
            },
            Piece::Exponential => {
                let shift = if self.case == SuperCase::Step1 {
                    self.params.length
                } else {
                    0.0
                };
                let scale = if self.case == SuperCase::Step1 {
                    2.0
                } else {
                    1.0
                };
                let u = scale * exp(-lam * (x - c * t - shift));
                Jet {
                    u,
                    ut: c * lam * u,
                    ux: -lam * u,
                    uxx: lam * lam * u,
                }
            }
            Piece::Patch => {
                let phi = self.phi.as_ref().expect("Step2 carries the eigenfunction");
                let (c_a, l) = (self.c_a, self.params.length);
                let z = x - c_a * t;
                let g = exp(-lam * (c_a - c) * t - 0.5 * c_a * z);
                let (p0, p1, p2) = phi.eval(z / l);
                Jet {
                    u: g * p0,
                    ut: g * ((-lam * (c_a - c) + 0.5 * c_a * c_a) * p0 - c_a * p1 / l),
                    ux: g * (-0.5 * c_a * p0 + p1 / l),
                    uxx: g * (0.25 * c_a * c_a * p0 - c_a * p1 / l + p2 / (l * l)),
                }
            }
        }
    }
}

/// Evaluates `N[u] = u_t - u_xx - r u (1 - u)` piece by piece on the sample
/// grid, requiring `N >= 0`, and checks that the slope only drops across
/// every corner.
pub fn check_supersolution(spec: &SuperSolutionSpec, grid: &SampleGrid) -> Result<CheckReport> {
    let f = KppReaction::for_params(&spec.params);
    let mut report = CheckReport::new();
    for t in grid.times() {
        let segs = spec.layout(t);
        check_segments(
            &mut report,
            Side::Super,
            t,
            &segs,
            grid.per_piece,
            |p, x| spec.piece_jet(p, t, x),
            |x| spec.params.rate_at_offset(x - spec.c_a * t),
            |r, u| f.eval(r, u),
        );
    }
    Ok(report)
}
