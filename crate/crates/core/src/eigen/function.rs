use core::f64::consts::FRAC_PI_2;

use libm::{cos, exp, sin, sqrt};

use super::{EigenCase, EigenResult};
use crate::model::GrowthParams;

/// Closed-form principal eigenfunction `phi1(y)` with its first two
/// derivatives in `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseEigenfunction {
    case: EigenCase,
    lambda1: f64,
    length: f64,
    c: EigenResult,
    /// Rate of the exponential piece on `y <= 0` (interior, right-critical)
    /// or `y >= 1` (left-critical).
    k_exp: f64,
    /// Exponential rate of the `y >= 1` piece in the interior case.
    k_right: f64,
    /// Sine frequency inside the patch.
    b: f64,
    /// `phi(1)` in the interior case.
    edge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Left,
    Middle,
    Right,
}

impl PiecewiseEigenfunction {
    pub(super) fn new(params: &GrowthParams, c: &EigenResult) -> Self {
        let GrowthParams { r1, r2, r3, length } = *params;
        let lambda = c.lambda1;
        let (k_exp, k_right, b) = match c.case {
            EigenCase::Interior => (
                length * sqrt(-r1 - lambda),
                length * sqrt(-r3 - lambda),
                length * sqrt(r2 + lambda),
            ),
            EigenCase::RightCritical => (length * sqrt(r3 - r1), 0.0, length * sqrt(r2 - r3)),
            EigenCase::LeftCritical => (length * sqrt(r1 - r3), 0.0, length * sqrt(r2 - r1)),
        };
        let edge = sin(b + c.c3) / sin(c.c3);
        PiecewiseEigenfunction {
            case: c.case,
            lambda1: lambda,
            length,
            c: *c,
            k_exp,
            k_right,
            b,
            edge,
        }
    }

    pub fn case(&self) -> EigenCase {
        self.case
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn constants(&self) -> &EigenResult {
        &self.c
    }

    /// `phi1(y)`.
    pub fn value(&self, y: f64) -> f64 {
        self.eval(y).0
    }

    /// `phi1'(y)`.
    pub fn d1(&self, y: f64) -> f64 {
        self.eval(y).1
    }

    /// `phi1''(y)`.
    pub fn d2(&self, y: f64) -> f64 {
        self.eval(y).2
    }

    /// Value, first and second derivative at `y`. The point `y = 0` belongs
    /// to the left piece and `y = 1` to the right one.
    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        let piece = if y <= 0.0 {
            Piece::Left
        } else if y < 1.0 {
            Piece::Middle
        } else {
            Piece::Right
        };
        self.piece(piece, y)
    }

    /// Closed form of one piece, continued to any `y`.
    fn piece(&self, piece: Piece, y: f64) -> (f64, f64, f64) {
        let c = &self.c;
        let (b, l) = (self.b, self.length);
        match (self.case, piece) {
            (EigenCase::LeftCritical, Piece::Left) => {
                let c5 = c.c5.unwrap_or(1.0);
                (c5 - c.c4 * l * y, -c.c4 * l, 0.0)
            }
            (EigenCase::LeftCritical, Piece::Middle) => {
                let arg = b * (1.0 - y) + c.c3;
                let v = c.c2 * sin(arg);
                (v, -c.c2 * b * cos(arg), -b * b * v)
            }
            (EigenCase::LeftCritical, Piece::Right) => {
                let k = self.k_exp;
                let v = c.c1 * exp(-k * (y - 1.0));
                (v, -k * v, k * k * v)
            }
            (_, Piece::Left) => {
                let k = self.k_exp;
                let v = c.c1 * exp(k * y);
                (v, k * v, k * k * v)
            }
            (_, Piece::Middle) => {
                let arg = b * y + c.c3;
                let v = c.c2 * sin(arg);
                (v, c.c2 * b * cos(arg), -b * b * v)
            }
            (EigenCase::Interior, Piece::Right) => {
                // C4 e^{-k y} written around y = 1 so large k*y cannot overflow
                let k = self.k_right;
                let v = self.edge * exp(-k * (y - 1.0));
                (v, -k * v, k * k * v)
            }
            (_, Piece::Right) => {
                let c5 = c.c5.unwrap_or(self.edge);
                (c.c4 * l * (y - 1.0) + c5, c.c4 * l, 0.0)
            }
        }
    }

    /// One-sided limits `(phi(p-), phi(p+), phi'(p-), phi'(p+))` at a piece
    /// boundary `p` in `{0, 1}`, each taken from its own closed form.
    pub fn junction(&self, p: f64) -> (f64, f64, f64, f64) {
        let (below, above) = if p == 0.0 {
            (Piece::Left, Piece::Middle)
        } else {
            (Piece::Middle, Piece::Right)
        };
        let lo = self.piece(below, p);
        let hi = self.piece(above, p);
        (lo.0, hi.0, lo.1, hi.1)
    }

    /// `sup phi1`, infinite in the critical cases.
    pub fn sup(&self) -> f64 {
        if self.case != EigenCase::Interior {
            return f64::INFINITY;
        }
        let (start, end) = (self.c.c3, self.b + self.c.c3);
        let peak = if start < FRAC_PI_2 && FRAC_PI_2 < end {
            self.c.c2
        } else {
            0.0
        };
        peak.max(1.0).max(self.edge)
    }
}
