//! IMEX finite-difference solver for `u_t = u_xx + r(t, x) u (1 - u)` with
//! front tracking.
//!
//! Each step solves `(I - dt D) u' = u + dt r(t + dt/2, x) u (1 - u)` with
//! the three-point Laplacian `D` and homogeneous Dirichlet ends.
//!
//! Long runs in nonlocally pulled regimes carry exponentially small
//! densities ahead of the front that still drive it, and those underflow
//! `f64` after a few hundred time units. [`TailWeight::Fixed`] stores
//! `v = u exp(kappa max(0, x - s))` instead, where `s` trails the front;
//! the step is then the diagonally similar system, so `u` is unchanged up to
//! rounding while `v` stays representable.

use alloc::vec::Vec;

use libm::{exp, round, sqrt};

use crate::error::ensure;
use crate::model::{GrowthParams, KppReaction, Trajectory};
use crate::speed::decay_rate;
use crate::tridiag::Thomas;
use crate::{Error, Result};

/// Largest density allowed at the last interior node.
pub const BOUNDARY_LIMIT: f64 = 1e-8;

/// Values below this are flushed to zero to keep subnormals out of the
/// tridiagonal sweeps.
const FLUSH: f64 = 1e-300;

/// Relative drop between successive stored points of a prefix-minimum
/// record.
const FLOOR_RATIO: f64 = 0.95;

/// Prefix-minimum records stop below this level.
const FLOOR_CUTOFF: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub horizon: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, dx: f64, dt: f64, horizon: f64) -> Result<Self> {
        ensure!(
            x_min.is_finite() && x_max.is_finite() && x_min < x_max,
            "need x_min < x_max"
        );
        ensure!(dx.is_finite() && dx > 0.0, "dx must be positive, got {dx}");
        ensure!(dt.is_finite() && dt > 0.0, "dt must be positive, got {dt}");
        ensure!(
            horizon.is_finite() && horizon > 0.0,
            "horizon must be positive, got {horizon}"
        );
        let grid = Grid {
            x_min,
            x_max,
            dx,
            dt,
            horizon,
        };
        ensure!(grid.nodes() >= 4, "domain holds fewer than 4 nodes");
        Ok(grid)
    }

    /// Grid on `[-10, x_max]` with `x_max` past both the fastest free front
    /// `2 sqrt(max(r1, r3)) T` and the patch `A(T) + L`, plus a margin over
    /// which the slowest relevant exponential tail falls below `1e-13`.
    pub fn auto(
        params: &GrowthParams,
        trajectory: &Trajectory,
        dx: f64,
        dt: f64,
        horizon: f64,
    ) -> Result<Self> {
        params.validate()?;
        trajectory.validate()?;
        ensure!(
            horizon.is_finite() && horizon > 0.0,
            "horizon must be positive, got {horizon}"
        );
        let free = 2.0 * sqrt(params.r1.max(params.r3)) * horizon;
        let patch = trajectory.position(horizon) + params.length;
        let fastest = max_speed(trajectory).max(2.0 * sqrt(params.r3));
        let decay = decay_rate(params.r3, fastest)?;
        let margin = (30.0 / decay).max(40.0);
        Grid::new(-10.0, free.max(patch) + margin, dx, dt, horizon)
    }

    pub fn nodes(&self) -> usize {
        round((self.x_max - self.x_min) / self.dx) as usize + 1
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn steps(&self) -> usize {
        (round(self.horizon / self.dt) as usize).max(1)
    }
}

fn max_speed(trajectory: &Trajectory) -> f64 {
    match trajectory {
        Trajectory::Linear { speed } => *speed,
        Trajectory::SlowOscillation { fast, .. } => *fast,
        Trajectory::PiecewiseLinear { knots, tail_speed } => knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .fold(*tail_speed, f64::max),
    }
}

/// Density at time `t` on the nodes of a [`Grid`], ends included.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum U0Spec {
    /// `height` on `[center - half_width, center + half_width]`, falling
    /// linearly to zero over one cell on each side.
    Bump {
        center: f64,
        half_width: f64,
        height: f64,
    },
    /// Explicit nodal values, ends included.
    Nodal(Vec<f64>),
}

impl Default for U0Spec {
    fn default() -> Self {
        U0Spec::Bump {
            center: 0.0,
            half_width: 1.0,
            height: 1.0,
        }
    }
}

/// Samples the initial datum on the grid.
pub fn init(grid: &Grid, u0: &U0Spec) -> Result<State> {
    let n = grid.nodes();
    let u = match u0 {
        U0Spec::Bump {
            center,
            half_width,
            height,
        } => {
            ensure!(
                *height > 0.0 && *height <= 1.0 && *half_width >= 0.0,
                "bump needs 0 < height <= 1 and a nonnegative half-width"
            );
            let reach = half_width + grid.dx;
            ensure!(
                center - reach > grid.x_min && center + reach < grid.x_max,
                "initial support [{}, {}] must lie inside ({}, {})",
                center - reach,
                center + reach,
                grid.x_min,
                grid.x_max
            );
            let tol = 1e-9 * grid.dx;
            (0..n)
                .map(|i| {
                    let d = (grid.x(i) - center).abs() - half_width;
                    if d <= tol {
                        *height
                    } else if d >= grid.dx - tol {
                        0.0
                    } else {
                        height * (1.0 - d / grid.dx)
                    }
                })
                .collect()
        }
        U0Spec::Nodal(values) => {
            ensure!(
                values.len() == n,
                "expected {n} nodal values, got {}",
                values.len()
            );
            ensure!(
                values.iter().all(|v| (0.0..=1.0).contains(v)),
                "initial values must lie in [0, 1]"
            );
            ensure!(
                values[0] == 0.0 && values[n - 1] == 0.0,
                "initial data must vanish at both ends"
            );
            values.clone()
        }
    };
    ensure!(
        u.iter().any(|&v| v > 0.0),
        "initial datum must not vanish identically"
    );
    Ok(State { t: 0.0, u })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailWeight {
    Off,
    /// Exponential weight `kappa > 0` ahead of the front.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    /// Tracking level.
    pub theta: f64,
    /// Time between front samples.
    pub sample_every: f64,
    /// The speed fit and the persistence record cover `[fit_from T, T]`.
    pub fit_from: f64,
    pub tail: TailWeight,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            theta: 0.01,
            sample_every: 0.5,
            fit_from: 0.5,
            tail: TailWeight::Off,
        }
    }
}

impl SimSettings {
    fn validate(&self) -> Result<()> {
        ensure!(
            self.theta > 0.0 && self.theta < 1.0,
            "tracking level must lie in (0, 1), got {}",
            self.theta
        );
        ensure!(self.sample_every > 0.0, "sample interval must be positive");
        ensure!(
            (0.0..1.0).contains(&self.fit_from),
            "fit window start must be a fraction in [0, 1)"
        );
        if let TailWeight::Fixed(k) = self.tail {
            ensure!(
                k.is_finite() && k > 0.0,
                "tail weight must be positive, got {k}"
            );
        }
        Ok(())
    }
}

/// Nonincreasing prefix minimum of `u` over `x >= 0` at one time, stored at
/// the points where it drops by more than 5 percent.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorSample {
    pub t: f64,
    /// `(x, min_{0 <= y <= x} u(t, y))`, increasing `x`, decreasing value.
    pub marks: Vec<(f64, f64)>,
}

impl FloorSample {
    /// `min_{0 <= y <= x} u`, overestimated by at most 5 percent.
    pub fn prefix_min(&self, x: f64) -> f64 {
        let k = self.marks.partition_point(|&(xm, _)| xm <= x);
        if k == 0 {
            // x < 0: empty window
            return f64::INFINITY;
        }
        self.marks[k - 1].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrace {
    pub theta: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub fitted_speed: f64,
    /// Root-mean-square residual of the linear fit.
    pub fit_residual: f64,
    pub fit_window: (f64, f64),
    pub floor: Vec<FloorSample>,
}

impl FrontTrace {
    /// Least-squares slope and RMS residual over samples in `[t0, t1]`.
    pub fn fit(&self, t0: f64, t1: f64) -> Result<(f64, f64)> {
        fit_line(&self.times, &self.positions, t0, t1)
    }
}

/// Least-squares line through the `(t, x)` samples with `t` in `[t0, t1]`;
/// returns the slope and the RMS residual.
pub fn fit_line(times: &[f64], xs: &[f64], t0: f64, t1: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(xs)
        .filter(|(t, x)| **t >= t0 - 1e-9 && **t <= t1 + 1e-9 && x.is_finite())
        .map(|(t, x)| (*t, *x))
        .collect();
    ensure!(
        pts.len() >= 2,
        "fewer than two front samples in [{t0}, {t1}]"
    );
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let stx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    let slope = stx / stt;
    let sse: f64 = pts
        .iter()
        .map(|p| libm::pow(p.1 - mx - slope * (p.0 - mt), 2.0))
        .sum();
    Ok((slope, sqrt(sse / n)))
}

/// Minimum over the stored samples of `min_{0 <= x <= c t} u(t, x)`, a
/// finite-time proxy for the persistence behind speed `c`. Accurate to
/// 5 percent above; levels under `1e-30` read as zero.
pub fn persistence_floor(trace: &FrontTrace, c_probe: f64) -> Result<f64> {
    ensure!(
        c_probe.is_finite() && c_probe > 0.0,
        "probe speed must be positive, got {c_probe}"
    );
    ensure!(
        !trace.floor.is_empty(),
        "trace holds no persistence samples"
    );
    Ok(trace
        .floor
        .iter()
        .map(|s| s.prefix_min(c_probe * s.t))
        .fold(f64::INFINITY, f64::min))
}

struct Tail {
    kappa: f64,
    anchor: f64,
}

/// A running simulation.
pub struct Simulation {
    grid: Grid,
    params: GrowthParams,
    trajectory: Trajectory,
    settings: SimSettings,
    step_index: usize,
    /// Stored unknowns, `u` times the tail weight; ends included.
    v: Vec<f64>,
    /// `exp(-kappa max(0, x - s))`, all ones without a tail weight.
    inv_w: Vec<f64>,
    solver: Thomas,
    tail: Option<Tail>,
    rhs: Vec<f64>,
    /// Last node holding a value of at least [`FLUSH`].
    support: usize,
    /// Rows solved past the support.
    reach: usize,
}

impl Simulation {
    pub fn new(
        params: &GrowthParams,
        trajectory: &Trajectory,
        reaction: &KppReaction,
        grid: &Grid,
        u0: &U0Spec,
        settings: &SimSettings,
    ) -> Result<Self> {
        let state = init(grid, u0)?;
        Simulation::from_state(params, trajectory, reaction, grid, state, settings)
    }

    /// Resumes from an arbitrary state with values in `[0, 1]`; the zero
    /// state is allowed here.
    pub fn from_state(
        params: &GrowthParams,
        trajectory: &Trajectory,
        reaction: &KppReaction,
        grid: &Grid,
        state: State,
        settings: &SimSettings,
    ) -> Result<Self> {
        params.validate()?;
        trajectory.validate()?;
        settings.validate()?;
        ensure!(
            reaction.quadratic_bound >= params.max_rate(),
            "the reaction bound M must be at least sup r"
        );
        ensure!(
            grid.dt * params.max_rate() <= 1.0,
            "dt * max r = {} exceeds 1; the explicit reaction would lose positivity and ordering",
            grid.dt * params.max_rate()
        );
        let n = grid.nodes();
        ensure!(
            state.u.len() == n,
            "state has {} values for {n} nodes",
            state.u.len()
        );
        ensure!(
            state.u.iter().all(|v| (0.0..=1.0).contains(v)),
            "densities must lie in [0, 1]"
        );
        ensure!(state.t >= 0.0, "state time must be nonnegative");
        let tail = match settings.tail {
            TailWeight::Off => None,
            TailWeight::Fixed(kappa) => {
                let last = state.u.iter().rposition(|&v| v > 0.0).unwrap_or(0);
                Some(Tail {
                    kappa,
                    anchor: grid.x(last),
                })
            }
        };
        let mut sim = Simulation {
            grid: *grid,
            params: *params,
            trajectory: trajectory.clone(),
            settings: *settings,
            step_index: round(state.t / grid.dt) as usize,
            v: state.u,
            inv_w: alloc::vec![1.0; n],
            solver: Thomas::factor(&[], &[], &[])?,
            tail,
            rhs: alloc::vec![0.0; n - 2],
            support: 0,
            reach: n,
        };
        sim.support = sim.v.iter().rposition(|&v| v >= FLUSH).unwrap_or(0);
        sim.assemble(None)?;
        Ok(sim)
    }

    /// Builds the weights and the factorized implicit operator. `previous`
    /// holds the old exponents when rescaling an existing state.
    fn assemble(&mut self, previous: Option<&[f64]>) -> Result<()> {
        let n = self.grid.nodes();
        let m = n - 2;
        let rho = self.grid.dt / (self.grid.dx * self.grid.dx);
        let exponent = self.exponents();
        if let Some(old) = previous {
            for i in 0..n {
                let shrink = exponent[i] - old[i];
                if shrink != 0.0 {
                    self.v[i] *= exp(shrink);
                }
            }
        }
        for i in 0..n {
            self.inv_w[i] = exp(-exponent[i]);
        }
        let diag = alloc::vec![1.0 + 2.0 * rho; m];
        let lower: Vec<f64> = (0..m)
            .map(|j| -rho * exp(exponent[j + 1] - exponent[j]))
            .collect();
        let upper: Vec<f64> = (0..m)
            .map(|j| -rho * exp(exponent[j + 1] - exponent[j + 2]))
            .collect();
        self.solver = Thomas::factor(&lower, &diag, &upper)?;
        self.reach = self.decay_reach(rho);
        Ok(())
    }

    /// Nodes over which the far-field solution of one implicit solve falls
    /// by a factor `1e-330`, or the whole grid if it does not decay.
    fn decay_reach(&self, rho: f64) -> usize {
        // u_j ~ q^j solves -rho q^2 + (1 + 2 rho) q - rho = 0 with q < 1
        let b = 1.0 + 2.0 * rho;
        let q_u = (b - sqrt(b * b - 4.0 * rho * rho)) / (2.0 * rho);
        let kappa = self.tail.as_ref().map_or(0.0, |t| t.kappa);
        let log_q = libm::log(q_u) + kappa * self.grid.dx;
        if log_q > -1e-3 {
            return self.grid.nodes();
        }
        (-330.0 * core::f64::consts::LN_10 / log_q) as usize + 2
    }

    fn exponents(&self) -> Vec<f64> {
        match &self.tail {
            None => alloc::vec![0.0; self.grid.nodes()],
            Some(t) => (0..self.grid.nodes())
                .map(|i| t.kappa * (self.grid.x(i) - t.anchor).max(0.0))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.grid.dt
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// `u` at node `i`.
    #[inline]
    pub fn density(&self, i: usize) -> f64 {
        self.v[i] * self.inv_w[i]
    }

    pub fn state(&self) -> State {
        State {
            t: self.time(),
            u: (0..self.v.len()).map(|i| self.density(i)).collect(),
        }
    }

    /// First node index with `x >= a`.
    fn first_at_or_after(&self, a: f64) -> usize {
        let n = self.grid.nodes();
        let guess = libm::ceil((a - self.grid.x_min) / self.grid.dx);
        let mut i = if guess <= 0.0 {
            0
        } else {
            (guess as usize).min(n)
        };
        while i > 0 && self.grid.x(i - 1) >= a {
            i -= 1;
        }
        while i < n && self.grid.x(i) < a {
            i += 1;
        }
        i
    }

    /// Advances one time step.
    ///
    /// Only the leading block of rows reaching `reach` nodes past the
    /// support is solved; beyond it the exact solution lies below [`FLUSH`].
    pub fn step(&mut self) -> Result<()> {
        let n = self.grid.nodes();
        let dt = self.grid.dt;
        let t_half = self.time() + 0.5 * dt;
        let a = self.trajectory.position(t_half);
        let active = (self.support + self.reach).min(n - 2);
        let start = self.first_at_or_after(a).clamp(1, active + 1);
        let end = self
            .first_at_or_after(a + self.params.length)
            .clamp(start, active + 1);
        let GrowthParams { r1, r2, r3, .. } = self.params;
        for (range, r) in [(1..start, r1), (start..end, r2), (end..active + 1, r3)] {
            for i in range {
                let v = self.v[i];
                // w (u + dt r u (1 - u)) with w u = v
                self.rhs[i - 1] = if v < FLUSH {
                    0.0
                } else {
                    v + dt * r * v * (1.0 - v * self.inv_w[i])
                };
            }
        }
        self.solver.solve_leading(&mut self.rhs[..active]);
        self.v[1..active + 1].copy_from_slice(&self.rhs[..active]);
        self.support = (1..active + 1)
            .rev()
            .find(|&i| self.v[i] >= FLUSH)
            .unwrap_or(0);
        self.step_index += 1;
        Ok(())
    }

    /// Fails once the density at the last interior node reaches
    /// [`BOUNDARY_LIMIT`], the sign that the Dirichlet end is felt.
    pub fn check_boundary(&self) -> Result<()> {
        let edge = self.density(self.grid.nodes() - 2);
        if edge >= BOUNDARY_LIMIT {
            return Err(Error::DomainTooSmall {
                time: self.time(),
                value: edge,
            });
        }
        Ok(())
    }

    /// Rightmost crossing of the tracking level, linearly interpolated.
    pub fn front_position(&self, theta: f64) -> Option<f64> {
        let n = self.grid.nodes();
        let i = (0..n).rev().find(|&i| self.density(i) >= theta)?;
        if i + 1 >= n {
            return Some(self.grid.x(i));
        }
        let (ui, uj) = (self.density(i), self.density(i + 1));
        Some(self.grid.x(i) + self.grid.dx * (ui - theta) / (ui - uj))
    }

    fn floor_sample(&self) -> FloorSample {
        let mut marks = Vec::new();
        let mut current = f64::INFINITY;
        let mut last_mark = f64::INFINITY;
        for i in self.first_at_or_after(0.0)..self.grid.nodes() {
            current = current.min(self.density(i));
            if current < FLOOR_CUTOFF {
                marks.push((self.grid.x(i), 0.0));
                break;
            }
            if current < FLOOR_RATIO * last_mark {
                marks.push((self.grid.x(i), current));
                last_mark = current;
            }
        }
        FloorSample {
            t: self.time(),
            marks,
        }
    }

    /// Moves the weight anchor up to the front and rescales the state.
    fn reanchor(&mut self, front: f64) -> Result<()> {
        let move_to = match &self.tail {
            Some(t) if front > t.anchor + self.grid.dx => front,
            _ => return Ok(()),
        };
        let old = self.exponents();
        if let Some(t) = self.tail.as_mut() {
            t.anchor = move_to;
        }
        self.assemble(Some(&old))
    }

    /// Runs to the horizon, sampling the front every `sample_every`.
    pub fn run(self) -> Result<FrontTrace> {
        self.run_with(0, |_| {})
    }

    /// As [`Simulation::run`], calling `observe` on the initial state and
    /// then every `every` steps (never when `every == 0`).
    pub fn run_with<F>(mut self, every: usize, mut observe: F) -> Result<FrontTrace>
    where
        F: FnMut(&Simulation),
    {
        let steps = self.grid.steps();
        let horizon = steps as f64 * self.grid.dt;
        let stride =
            ((round(self.settings.sample_every / self.grid.dt) as usize).max(1)).min(steps);
        let theta = self.settings.theta;
        let fit_start = self.settings.fit_from * horizon;
        let mut times = Vec::new();
        let mut positions = Vec::new();
        let mut floor = Vec::new();

        if every > 0 {
            observe(&self);
        }
        if let Some(x) = self.front_position(theta) {
            times.push(0.0);
            positions.push(x);
        }
        for k in 1..=steps {
            self.step()?;
            self.check_boundary()?;
            if k % stride == 0 || k == steps {
                let t = self.time();
                if let Some(x) = self.front_position(theta) {
                    times.push(t);
                    positions.push(x);
                    self.reanchor(x)?;
                }
                if t >= fit_start - 1e-9 {
                    floor.push(self.floor_sample());
                }
            }
            if every > 0 && k % every == 0 {
                observe(&self);
            }
        }
        let (fitted_speed, fit_residual) = fit_line(&times, &positions, fit_start, horizon)?;
        Ok(FrontTrace {
            theta,
            horizon,
            times,
            positions,
            fitted_speed,
            fit_residual,
            fit_window: (fit_start, horizon),
            floor,
        })
    }
}

/// One IMEX step from `state`, for callers that do not keep a
/// [`Simulation`] around.
pub fn step(
    state: &State,
    grid: &Grid,
    params: &GrowthParams,
    trajectory: &Trajectory,
) -> Result<State> {
    let reaction = KppReaction::for_params(params);
    let mut sim = Simulation::from_state(
        params,
        trajectory,
        &reaction,
        grid,
        state.clone(),
        &SimSettings::default(),
    )?;
    sim.step()?;
    Ok(sim.state())
}

/// Runs the default bump to the horizon of `grid`.
pub fn run(
    grid: &Grid,
    params: &GrowthParams,
    trajectory: &Trajectory,
    reaction: &KppReaction,
    theta: f64,
) -> Result<FrontTrace> {
    let settings = SimSettings {
        theta,
        ..SimSettings::default()
    };
    Simulation::new(
        params,
        trajectory,
        reaction,
        grid,
        &U0Spec::default(),
        &settings,
    )?
    .run()
}
