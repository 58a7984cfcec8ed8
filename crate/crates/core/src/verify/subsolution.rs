//! The compactly supported sub-solution travelling at a speed `c` just below
//! the nonlocally pulled speed.
//!
//! With `base = ln S / eta + x0` and `k = pi / (2 R')` the construction is,
//! up to the amplitude `iota`,
//!
//! * `0` left of `base - 2R'`,
//! * `O = sigma sin(k (x - base + 2R'))` up to `base - R'/3`,
//! * `sigma / 2` up to `base + c t + x1`,
//! * `P = e^{-lambda xi} - S e^{-(lambda + eta) xi}`, `xi = x - c t - x0`,
//!   up to the interface `X(t)`,
//! * `Q = gamma e^{-lambda (cA - c) t} e^{-cA z / 2} phi1^R(z / L)`,
//!   `z = x - cA t`, up to `cA t + R L`, and `0` beyond,
//!
//! where `phi1^R` is the Dirichlet eigenfunction on `(-R, R)`.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use libm::{cos, exp, log, sin, sqrt};

use super::check::{
    check_segments, split_at, CheckReport, Jet, SampleGrid, Segment, Side, Violation, ViolationKind,
};
use crate::eigen::{lambda1_analytic, TruncatedEigenpair};
use crate::error::ensure;
use crate::model::{GrowthParams, KppReaction};
use crate::roots::bisect;
use crate::speed::{decay_rate, predict_with_lambda1};
use crate::{Error, Result};

/// Width given to the zero pieces when sampling.
const SPAN: f64 = 5.0;

/// Free parameters of the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubParams {
    pub c: f64,
    pub eta: f64,
    pub s: f64,
    pub r_prime: f64,
    pub iota: f64,
    pub sigma: f64,
    pub x0: f64,
    pub gamma: f64,
    /// Half-width `R` of the truncated eigenproblem, in units of `L`.
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSolutionSpec {
    params: GrowthParams,
    c_a: f64,
    lambda1: f64,
    p: SubParams,
    lambda_c: f64,
    /// `sqrt(c^2 - 4 r1)`.
    root: f64,
    /// Constant `M` of the KPP lower bound `r u - M u^2`.
    m: f64,
    x1: f64,
    pair: TruncatedEigenpair,
    /// `lambda1^R - lambda(c) (cA - c) + cA^2 / 4`, negative when admissible.
    growth: f64,
    /// Width `r` over which `e^{-cA L y / 2} phi1^R(y)` increases, on
    /// `(-R, -R + r)`.
    rise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Zero,
    O,
    Plateau,
    P,
    Q,
}

impl SubSolutionSpec {
    /// Validates every parameter constraint of the construction.
    pub fn new(params: &GrowthParams, c_a: f64, p: SubParams) -> Result<Self> {
        let lambda1 = lambda1_analytic(params)?.lambda1;
        let GrowthParams { r1, r3, length, .. } = *params;
        let pred = predict_with_lambda1(r1, r3, lambda1, c_a)?;
        let lo = 2.0 * sqrt(r1.max(r3));
        ensure!(
            c_a > lo && c_a < pred.thresholds[2],
            "cA = {c_a} must lie in ({lo}, {}) for this construction",
            pred.thresholds[2]
        );
        ensure!(
            p.c > 2.0 * sqrt(r1) && p.c < c_a,
            "c must lie in (2 sqrt(r1), cA), got {}",
            p.c
        );
        let lambda_c = decay_rate(r1, p.c)?;
        let root = sqrt(p.c * p.c - 4.0 * r1);
        let m = KppReaction::for_params(params).quadratic_bound;
        ensure!(
            p.eta > 0.0 && p.eta < lambda_c.min(root),
            "eta must lie in (0, min(lambda(c), sqrt(c^2 - 4 r1))) = (0, {}), got {}",
            lambda_c.min(root),
            p.eta
        );
        let s_min = 1f64.max(m / (p.eta * (root - p.eta)));
        ensure!(p.s > s_min, "S must exceed {s_min}, got {}", p.s);
        ensure!(
            p.r_prime > PI / (2.0 * sqrt(r1)),
            "R' must exceed pi / (2 sqrt(r1)), got {}",
            p.r_prime
        );
        ensure!(
            p.iota > 0.0 && p.iota <= 1.0,
            "iota must lie in (0, 1], got {}",
            p.iota
        );
        let sigma_cap = 2.0 * p_max(lambda_c, p.eta, p.s);
        ensure!(
            p.sigma > 0.0 && p.sigma < sigma_cap,
            "sigma must lie in (0, 2 max P) = (0, {sigma_cap:e})"
        );
        let o_rate = PI * PI / (4.0 * p.r_prime * p.r_prime);
        ensure!(
            m * p.sigma <= r1 - o_rate,
            "sigma too large: need M sigma <= r1 - pi^2 / (4 R'^2) so that f(v) >= pi^2 v / (4 R'^2) on [0, sigma]"
        );
        ensure!(p.half_width > 1.0, "R must exceed 1, got {}", p.half_width);
        let x0_max = x0_bound(length, p.half_width, lambda_c, p.eta, p.s);
        ensure!(p.x0 < x0_max, "x0 must lie below {x0_max}, got {}", p.x0);
        ensure!(
            p.gamma > 0.0 && p.gamma.is_finite(),
            "gamma must be positive"
        );

        let pair = TruncatedEigenpair::new(params, p.half_width)?;
        let growth = pair.lambda() - lambda_c * (c_a - p.c) + 0.25 * c_a * c_a;
        ensure!(
            growth < 0.0,
            "lambda1^R - lambda(c)(cA - c) + cA^2/4 = {growth} must be negative; lower c or enlarge R"
        );
        let amplitude = p.gamma * exp(0.5 * c_a * p.half_width * length) * pair.sup();
        ensure!(
            m * amplitude <= -growth,
            "gamma too large: M gamma e^(cA R L / 2) max phi1^R = {} exceeds {}",
            m * amplitude,
            -growth
        );
        let x1 = first_level_crossing(lambda_c, p.eta, p.s, 0.5 * p.sigma)?;
        let rise = rise_width(&pair, c_a * length)?;
        Ok(SubSolutionSpec {
            params: *params,
            c_a,
            lambda1,
            p,
            lambda_c,
            root,
            m,
            x1,
            pair,
            growth,
            rise,
        })
    }

    /// The default parameter recipe: `c = c* - 0.05`,
    /// `eta = min(lambda(c), sqrt(c^2 - 4 r1)) / 2`,
    /// `S = 2 max(1, M / (eta (sqrt(c^2 - 4 r1) - eta)))`, `R' = pi / sqrt(r1)`,
    /// `R` the smallest half-width (to `1e-3`) with `lambda1^R - lambda1 < delta / 2`,
    /// `x0` at twice the upper bound, `gamma` at half the smallness bound or
    /// lower so that `X(0)` is the midpoint of `(-R L, -(R - r) L)`,
    /// `sigma` at half the bound `2 max P` (capped by the smallness needed on
    /// the `O` piece) and `iota = 1`.
    pub fn default_recipe(params: &GrowthParams, c_a: f64) -> Result<Self> {
        let lambda1 = lambda1_analytic(params)?.lambda1;
        let GrowthParams { r1, r3, length, .. } = *params;
        let pred = predict_with_lambda1(r1, r3, lambda1, c_a)?;
        let c = pred.c_star - 0.05;
        ensure!(
            c > 2.0 * sqrt(r1),
            "c* - 0.05 = {c} is not above 2 sqrt(r1)"
        );
        let lambda_c = decay_rate(r1, c)?;
        let root = sqrt(c * c - 4.0 * r1);
        let m = KppReaction::for_params(params).quadratic_bound;
        let eta = 0.5 * lambda_c.min(root);
        let s = 2.0 * 1f64.max(m / (eta * (root - eta)));
        let r_prime = PI / sqrt(r1);

        let gap = lambda1 - lambda_c * (c_a - c) + 0.25 * c_a * c_a;
        ensure!(
            gap < 0.0,
            "c = {c} is not below F(cA); the construction does not apply"
        );
        let delta = 0.5 * gap.abs();
        let half_width = smallest_half_width(params, lambda1, 0.5 * delta)?;
        let pair = TruncatedEigenpair::new(params, half_width)?;
        let x0 = 2.0 * x0_bound(length, half_width, lambda_c, eta, s);
        // gamma at half the smallness bound puts X(0) within rounding of
        // -R L, since P is tiny there; lower it so that X(0) sits in the
        // middle of (-R L, -(R - r) L)
        let small = 0.5 * delta / (m * exp(0.5 * c_a * half_width * length) * pair.sup());
        let z0 = -(half_width - 0.5 * rise_width(&pair, c_a * length)?) * length;
        let xi0 = z0 - x0;
        let p0 = exp(-lambda_c * xi0) - s * exp(-(lambda_c + eta) * xi0);
        let q0 = exp(-0.5 * c_a * z0) * pair.value(z0 / length);
        let gamma = small.min(p0 / q0);
        let o_rate = PI * PI / (4.0 * r_prime * r_prime);
        let sigma = p_max(lambda_c, eta, s).min(0.5 * (r1 - o_rate) / m);
        let p = SubParams {
            c,
            eta,
            s,
            r_prime,
            iota: 1.0,
            sigma,
            x0,
            gamma,
            half_width,
        };
        SubSolutionSpec::new(params, c_a, p)
    }

    /// Same construction with another amplitude `iota`.
    pub fn with_iota(&self, iota: f64) -> Result<Self> {
        SubSolutionSpec::new(&self.params, self.c_a, SubParams { iota, ..self.p })
    }

    /// Multiplies `gamma` by `factor` in `(0, 1]` and lowers `x0` by
    /// `ln(1 / factor) / lambda(c)`, which scales the leading part of `P` by
    /// the same factor.
    pub fn with_gamma_scaled(&self, factor: f64) -> Result<Self> {
        ensure!(
            factor > 0.0 && factor <= 1.0,
            "gamma factor must lie in (0, 1], got {factor}"
        );
        let p = SubParams {
            gamma: self.p.gamma * factor,
            x0: self.p.x0 + log(factor) / self.lambda_c,
            ..self.p
        };
        SubSolutionSpec::new(&self.params, self.c_a, p)
    }

    pub fn params(&self) -> &GrowthParams {
        &self.params
    }

    pub fn patch_speed(&self) -> f64 {
        self.c_a
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn parameters(&self) -> &SubParams {
        &self.p
    }

    /// `lambda(c)`.
    pub fn decay(&self) -> f64 {
        self.lambda_c
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    /// `lambda1^R`.
    pub fn truncated_lambda(&self) -> f64 {
        self.pair.lambda()
    }

    /// `lambda1^R - lambda(c) (cA - c) + cA^2 / 4`.
    pub fn growth_margin(&self) -> f64 {
        self.growth
    }

    pub fn rise(&self) -> f64 {
        self.rise
    }

    /// `ln S / eta + x0`.
    pub fn base(&self) -> f64 {
        log(self.p.s) / self.p.eta + self.p.x0
    }

    /// Right end `R L` of the support in the patch frame.
    pub fn reach(&self) -> f64 {
        self.p.half_width * self.params.length
    }

    /// `P / e^{-lambda (cA - c) t}` and its `z`-derivative at `z = x - cA t`.
    pub(crate) fn p_scaled(&self, t: f64, z: f64) -> (f64, f64) {
        let (lam, eta) = (self.lambda_c, self.p.eta);
        let e1 = exp(-lam * (z - self.p.x0));
        let e2 = self.p.s * exp(-eta * (self.c_a - self.p.c) * t - (lam + eta) * (z - self.p.x0));
        (e1 - e2, -lam * e1 + (lam + eta) * e2)
    }

    /// `d/dt` of the scaled `P` at fixed `z`.
    pub(crate) fn p_scaled_dt(&self, t: f64, z: f64) -> f64 {
        let (lam, eta) = (self.lambda_c, self.p.eta);
        let v = self.c_a - self.p.c;
        self.p.s * eta * v * exp(-eta * v * t - (lam + eta) * (z - self.p.x0))
    }

    /// `Q / e^{-lambda (cA - c) t}` and its `z`-derivative.
    pub(crate) fn q_scaled(&self, z: f64) -> (f64, f64) {
        let l = self.params.length;
        let (v, d, _) = self.pair.eval(z / l);
        let g = self.p.gamma * exp(-0.5 * self.c_a * z);
        (g * v, g * (-0.5 * self.c_a * v + d / l))
    }

    /// Interface offset `X(t) - cA t`: the smallest zero of `P - Q` in
    /// `(-R L, 0)`, bracketed by `(-R L, -(R - r) L)` when possible.
    pub fn interface_offset(&self, t: f64) -> Result<f64> {
        let l = self.params.length;
        let lo = -self.reach();
        let hi = -(self.p.half_width - self.rise) * l;
        let h = |z: f64| self.p_scaled(t, z).0 - self.q_scaled(z).0;
        // run to full resolution; the drift check differentiates X
        let tol = 0.0;
        if h(lo) > 0.0 && h(hi) < 0.0 {
            return bisect(h, lo, hi, tol);
        }
        // fall back to the first sign change on (-R L, 0)
        let n = 400;
        let mut a = lo;
        for k in 1..=n {
            let b = lo + (0.0 - lo) * k as f64 / n as f64;
            if h(a) > 0.0 && h(b) <= 0.0 {
                return bisect(h, a, b, tol);
            }
            a = b;
        }
        Err(Error::Inadmissible(alloc::format!(
            "P - Q has no sign change on (cA t - R L, cA t) at t = {t}; lower x0 or raise gamma"
        )))
    }

    fn layout(&self, t: f64) -> Result<Vec<Segment<Piece>>> {
        let base = self.base();
        let rp = self.p.r_prime;
        let patch = self.c_a * t;
        let x_int = patch + self.interface_offset(t)?;
        let segs = vec![
            Segment {
                piece: Piece::Zero,
                name: "zero-left",
                start: base - 2.0 * rp - SPAN,
                end: base - 2.0 * rp,
            },
            Segment {
                piece: Piece::O,
                name: "O",
                start: base - 2.0 * rp,
                end: base - rp / 3.0,
            },
            Segment {
                piece: Piece::Plateau,
                name: "plateau",
                start: base - rp / 3.0,
                end: base + self.p.c * t + self.x1,
            },
            Segment {
                piece: Piece::P,
                name: "P",
                start: base + self.p.c * t + self.x1,
                end: x_int,
            },
            Segment {
                piece: Piece::Q,
                name: "Q",
                start: x_int,
                end: patch + self.reach(),
            },
            Segment {
                piece: Piece::Zero,
                name: "zero-right",
                start: patch + self.reach(),
                end: patch + self.reach() + SPAN,
            },
        ];
        Ok(split_at(segs, &[patch, patch + self.params.length]))
    }

    fn piece_jet(&self, piece: Piece, t: f64, x: f64) -> Jet {
        let iota = self.p.iota;
        match piece {
            Piece::Zero => Jet::default(),
            Piece::O => {
                let k = PI / (2.0 * self.p.r_prime);
                let arg = k * (x - self.base() + 2.0 * self.p.r_prime);
                let u = iota * self.p.sigma * sin(arg);
                Jet {
                    u,
                    ut: 0.0,
                    ux: iota * self.p.sigma * k * cos(arg),
                    uxx: -k * k * u,
                }
            }
            Piece::Plateau => Jet {
                u: 0.5 * iota * self.p.sigma,
                ..Jet::default()
            },
            Piece::P => {
                let (lam, eta, c) = (self.lambda_c, self.p.eta, self.p.c);
                let xi = x - c * t - self.p.x0;
                let e1 = iota * exp(-lam * xi);
                let e2 = iota * self.p.s * exp(-(lam + eta) * xi);
                Jet {
                    u: e1 - e2,
                    ut: c * lam * e1 - c * (lam + eta) * e2,
                    ux: -lam * e1 + (lam + eta) * e2,
                    uxx: lam * lam * e1 - (lam + eta) * (lam + eta) * e2,
                }
            }
            Piece::Q => {
                let (c_a, l) = (self.c_a, self.params.length);
                let z = x - c_a * t;
                let g = iota
                    * self.p.gamma
                    * exp(-self.lambda_c * (c_a - self.p.c) * t - 0.5 * c_a * z);
                let (p0, p1, p2) = self.pair.eval(z / l);
                Jet {
                    u: g * p0,
                    ut: g
                        * ((-self.lambda_c * (c_a - self.p.c) + 0.5 * c_a * c_a) * p0
                            - c_a * p1 / l),
                    ux: g * (-0.5 * c_a * p0 + p1 / l),
                    uxx: g * (0.25 * c_a * c_a * p0 - c_a * p1 / l + p2 / (l * l)),
                }
            }
        }
    }
}

/// `max_x P(0, x) = e^{-lambda z*} eta / (lambda + eta)` with
/// `z* = ln(S (lambda + eta) / lambda) / eta`; independent of `x0`.
fn p_max(lambda: f64, eta: f64, s: f64) -> f64 {
    let z = log(s * (lambda + eta) / lambda) / eta;
    exp(-lambda * z) * eta / (lambda + eta)
}

/// Upper bound on `x0` keeping `P` decreasing on `[cA t - R L, cA t]`.
fn x0_bound(length: f64, half_width: f64, lambda: f64, eta: f64, s: f64) -> f64 {
    -half_width * length - log(s * (lambda + eta) / lambda) / eta
}

/// Smallest `x1 > 0` with `P(0, x0 + ln S / eta + x1) = level`, where
/// `P(0, x0 + ln S / eta + x) = S^{-lambda/eta} e^{-lambda x} (1 - e^{-eta x})`
/// rises from zero to its peak at `x = ln((lambda + eta) / lambda) / eta`.
fn first_level_crossing(lambda: f64, eta: f64, s: f64, level: f64) -> Result<f64> {
    let front = exp(-lambda / eta * log(s));
    let shape = |x: f64| front * exp(-lambda * x) * (1.0 - exp(-eta * x)) - level;
    let peak = log((lambda + eta) / lambda) / eta;
    bisect(shape, 0.0, peak, 1e-14 * (1.0 + peak))
}

/// First critical point of `y -> e^{-k y} phi1^R(y)` with `k = cA L / 2`,
/// measured from `-R` and capped at `y = 0`.
fn rise_width(pair: &TruncatedEigenpair, c_a_l: f64) -> Result<f64> {
    let r = pair.half_width();
    let slope = |y: f64| {
        let (v, d, _) = pair.eval(y);
        d - 0.5 * c_a_l * v
    };
    let top = if slope(0.0) > 0.0 {
        0.0
    } else {
        bisect(slope, -r * (1.0 - 1e-12), 0.0, 1e-13 * r)?
    };
    Ok(r + top)
}

/// Smallest half-width (to within `1e-3`) whose Dirichlet eigenvalue lies
/// within `tol` of `lambda1`.
fn smallest_half_width(params: &GrowthParams, lambda1: f64, tol: f64) -> Result<f64> {
    let close = |r: f64| {
        TruncatedEigenpair::new(params, r)
            .map(|p| p.lambda() - lambda1 < tol)
            .unwrap_or(false)
    };
    let mut hi = 2.0;
    while !close(hi) {
        hi *= 2.0;
        ensure!(hi < 1e6, "no truncation reaches lambda1 within {tol}");
    }
    let mut lo = 1.0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if close(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Evaluates `N[u] = u_t - u_xx - (r u - M u^2)` piece by piece on the
/// sample grid, requiring `N <= 0`, and checks that the slope only rises
/// across every corner. The interface `X(t)` is solved at each sampled time.
pub fn check_subsolution(spec: &SubSolutionSpec, grid: &SampleGrid) -> Result<CheckReport> {
    let f = KppReaction {
        quadratic_bound: spec.m,
    };
    let mut report = CheckReport::new();
    for t in grid.times() {
        let segs = spec.layout(t)?;
        let p = segs
            .iter()
            .find(|s| s.name == "P")
            .expect("layout has a P piece");
        if p.end <= p.start {
            report.flag(Violation {
                kind: ViolationKind::Layout,
                t,
                x: p.start,
                piece: "P",
                excess: p.start - p.end,
            });
        }
        check_segments(
            &mut report,
            Side::Sub,
            t,
            &segs,
            grid.per_piece,
            |piece, x| spec.piece_jet(piece, t, x),
            |x| spec.params.rate_at_offset(x - spec.c_a * t),
            |r, u| f.lower_bound(r, u),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::params_for_lambda1;

    fn spec() -> SubSolutionSpec {
        let p = params_for_lambda1(1.0, 9.0, 1.0, -4.0).unwrap();
        SubSolutionSpec::default_recipe(&p, 5.0).unwrap()
    }

    #[test]
    fn default_recipe_is_admissible() {
        let s = spec();
        let q = s.parameters();
        assert!((q.c - (2.0701187 - 0.05)).abs() < 1e-6);
        assert!(s.growth_margin() < 0.0);
        assert!(s.truncated_lambda() > -4.0);
        assert!(s.x1() > 0.0);
        assert!(s.rise() > 0.0 && s.rise() <= q.half_width);
        assert!(s.base() - q.r_prime / 3.0 < 0.0);
    }

    #[test]
    fn pieces_meet_at_x1() {
        let s = spec();
        let t = 2.0;
        let x = s.base() + s.parameters().c * t + s.x1();
        let plateau = s.piece_jet(Piece::Plateau, t, x).u;
        let p = s.piece_jet(Piece::P, t, x).u;
        assert!((plateau - p).abs() < 1e-9 * plateau, "{plateau} vs {p}");
    }

    #[test]
    fn certified_on_sample_grid() {
        let s = spec();
        let report = check_subsolution(&s, &SampleGrid::new(100.0, 21, 10).unwrap()).unwrap();
        assert!(report.passed(), "{:?}", report.examples);
        let half = check_subsolution(
            &s.with_iota(0.5).unwrap(),
            &SampleGrid::new(100.0, 5, 10).unwrap(),
        )
        .unwrap();
        assert!(half.passed(), "{:?}", half.examples);
    }

    #[test]
    fn eta_above_bound_rejected() {
        let s = spec();
        let q = s.parameters();
        let bad = SubParams {
            eta: s.decay().min(sqrt(q.c * q.c - 4.0)) * 1.01,
            ..*q
        };
        assert!(SubSolutionSpec::new(s.params(), 5.0, bad)
            .unwrap_err()
            .is_validation());
    }
}
