//! Shape optimization of the favorable zone: among step profiles
//! `m = r1 + g` with `0 <= g <= h` supported in `[0, W]` and mass
//! `int g <= A`, find the one with the lowest principal eigenvalue.
//!
//! Profiles are piecewise constant on `n` equal cells. Candidates are
//! compared on one fixed truncation (margin `ceil(15 / w) w` on each side,
//! spacing `w / 32`) so that discretization errors cancel between them; the
//! winner is re-evaluated with [`lambda1_general`].

use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, floor, round};
use rand::seq::SliceRandom;
use rand::{Rng, RngExt};

use crate::eigen::{lambda1_general, lambda1_truncated_on};
use crate::error::ensure;
use crate::model::StepProfile;
use crate::Result;

/// Candidates within this distance of the best eigenvalue count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Largest cell count accepted by [`brute_force_optimum`].
pub const MAX_BRUTE_FORCE_CELLS: usize = 16;

/// Margin beyond `[0, W]` of the comparison grid.
const MARGIN: f64 = 15.0;

/// Grid nodes per cell of the comparison grid.
const NODES_PER_CELL: f64 = 32.0;

/// Smallest eigenvalue decrease accepted as a move; the Sturm bisection
/// resolves `1e-12`.
const MOVE_TOL: f64 = 1e-10;

/// Relaxed moves stop once the transfer falls below this fraction of `h`.
const MIN_TRANSFER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub r1: f64,
    /// Cap on `m - r1`.
    pub h: f64,
    /// Cap on `int (m - r1)`.
    pub mass: f64,
    pub width: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCandidate {
    /// `m - r1` on each cell.
    pub increments: Vec<f64>,
    /// Eigenvalue on the comparison grid.
    pub lambda1: f64,
}

impl ProfileCandidate {
    pub fn raised(&self) -> Vec<usize> {
        self.increments
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// The raised cells form one run.
    pub fn is_contiguous(&self) -> bool {
        let r = self.raised();
        r.windows(2).all(|w| w[1] == w[0] + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub best: ProfileCandidate,
    /// Every candidate within [`TIE_TOL`] of the best, in enumeration order.
    pub ties: Vec<ProfileCandidate>,
    pub evaluated: usize,
    /// [`lambda1_general`] of the best profile.
    pub lambda1_refined: f64,
}

impl OptimumReport {
    pub fn all_ties_contiguous(&self) -> bool {
        self.ties.iter().all(ProfileCandidate::is_contiguous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub candidate: ProfileCandidate,
    pub accepted_moves: usize,
    /// Eigenvalue after the start and after each accepted move.
    pub history: Vec<f64>,
    /// At most one cell strictly between `0` and `h` (to `1e-3 h`).
    pub bang_bang: bool,
}

impl Budget {
    pub fn new(r1: f64, h: f64, mass: f64, width: f64, cells: usize) -> Result<Self> {
        ensure!(r1.is_finite() && r1 > 0.0, "r1 must be positive, got {r1}");
        ensure!(
            h.is_finite() && h > 0.0,
            "height cap must be positive, got {h}"
        );
        ensure!(
            width.is_finite() && width > 0.0,
            "window width must be positive, got {width}"
        );
        ensure!(cells >= 1, "need at least one cell");
        ensure!(
            mass.is_finite() && mass > 0.0 && mass <= h * width * (1.0 + 1e-12),
            "mass cap must lie in (0, h W] = (0, {}], got {mass}",
            h * width
        );
        Ok(Budget {
            r1,
            h,
            mass,
            width,
            cells,
        })
    }

    pub fn cell_width(&self) -> f64 {
        self.width / self.cells as f64
    }

    /// Raised cells of a bang-bang profile: `floor(A / (h w))`.
    pub fn raised_cells(&self) -> usize {
        (floor(self.mass / (self.h * self.cell_width()) + 1e-9) as usize).min(self.cells)
    }

    /// The profile `r1 + increments` as a step function.
    pub fn profile(&self, increments: &[f64]) -> Result<StepProfile> {
        ensure!(
            increments.len() == self.cells,
            "need {} increments, got {}",
            self.cells,
            increments.len()
        );
        let w = self.cell_width();
        let mut breaks = Vec::new();
        let mut values = vec![self.r1];
        let mut current = 0.0;
        for (i, &g) in increments.iter().chain(core::iter::once(&0.0)).enumerate() {
            if g != current {
                breaks.push(i as f64 * w);
                values.push(self.r1 + g);
                current = g;
            }
        }
        StepProfile::new(breaks, values)
    }

    fn check(&self, increments: &[f64]) -> Result<()> {
        ensure!(
            increments.len() == self.cells,
            "need {} increments, got {}",
            self.cells,
            increments.len()
        );
        let tol = 1e-12 * self.h;
        ensure!(
            increments.iter().all(|&g| g >= -tol && g <= self.h + tol),
            "increments must lie in [0, h]"
        );
        let mass: f64 = increments.iter().sum::<f64>() * self.cell_width();
        ensure!(
            mass <= self.mass * (1.0 + 1e-12) + tol,
            "mass {mass} exceeds the cap {}",
            self.mass
        );
        Ok(())
    }

    /// Eigenvalue on the shared comparison grid.
    pub fn lambda1(&self, increments: &[f64]) -> Result<f64> {
        self.check(increments)?;
        let w = self.cell_width();
        let margin = ceil(MARGIN / w) * w;
        let nodes = round((self.width + 2.0 * margin) / w * NODES_PER_CELL) as usize;
        lambda1_truncated_on(
            &self.profile(increments)?,
            1.0,
            -margin,
            self.width + margin,
            nodes,
        )
    }

    /// Whole-line eigenvalue of the profile.
    pub fn lambda1_refined(&self, increments: &[f64]) -> Result<f64> {
        self.check(increments)?;
        lambda1_general(&self.profile(increments)?, 1.0)
    }

    fn candidate(&self, increments: Vec<f64>) -> Result<ProfileCandidate> {
        let lambda1 = self.lambda1(&increments)?;
        Ok(ProfileCandidate {
            increments,
            lambda1,
        })
    }

    /// A random bang-bang profile with the full number of raised cells, or,
    /// when `relaxed`, random increments with mass `A`.
    pub fn random_start<R: Rng + ?Sized>(&self, relaxed: bool, rng: &mut R) -> Vec<f64> {
        if !relaxed {
            let mut g = vec![0.0; self.cells];
            g[..self.raised_cells()].fill(self.h);
            g.shuffle(rng);
            return g;
        }
        let weights: Vec<f64> = (0..self.cells)
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        self.fill_mass(&weights)
    }

    /// Increments proportional to `weights` with mass `A`, capped at `h`,
    /// the overflow spread over the uncapped cells.
    pub fn fill_mass(&self, weights: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.cells];
        let mut free: Vec<usize> = (0..self.cells).collect();
        let mut left = self.mass / self.cell_width();
        while left > 1e-14 * self.h && !free.is_empty() {
            let total: f64 = free.iter().map(|&i| weights[i]).sum();
            let share = |i: usize| {
                if total > 0.0 {
                    weights[i] / total
                } else {
                    1.0 / free.len() as f64
                }
            };
            let mut spilled = 0.0;
            for &i in &free {
                g[i] += left * share(i);
                if g[i] > self.h {
                    spilled += g[i] - self.h;
                    g[i] = self.h;
                }
            }
            free.retain(|&i| g[i] < self.h);
            left = spilled;
        }
        g
    }
}

/// Exhaustive search over bang-bang profiles with exactly
/// [`Budget::raised_cells`] raised cells, in increasing bitmask order.
pub fn brute_force_optimum(budget: &Budget) -> Result<OptimumReport> {
    let n = budget.cells;
    ensure!(
        n <= MAX_BRUTE_FORCE_CELLS,
        "exhaustive search is limited to {MAX_BRUTE_FORCE_CELLS} cells, got {n}"
    );
    let k = budget.raised_cells() as u32;
    let mut all = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() != k {
            continue;
        }
        let g = (0..n)
            .map(|i| if mask >> i & 1 == 1 { budget.h } else { 0.0 })
            .collect();
        all.push(budget.candidate(g)?);
    }
    let best_value = all.iter().map(|c| c.lambda1).fold(f64::INFINITY, f64::min);
    let evaluated = all.len();
    let ties: Vec<ProfileCandidate> = all
        .into_iter()
        .filter(|c| c.lambda1 <= best_value + TIE_TOL)
        .collect();
    let best = ties
        .iter()
        .find(|c| c.lambda1 == best_value)
        .expect("minimum is attained")
        .clone();
    let lambda1_refined = budget.lambda1_refined(&best.increments)?;
    Ok(OptimumReport {
        best,
        ties,
        evaluated,
        lambda1_refined,
    })
}

/// Best-improvement descent from `start`.
///
/// Bang-bang moves swap a raised and a flat cell. Relaxed moves transfer
/// `min(step, g_i, h - g_j)` from cell `i` to cell `j`; the step starts at
/// `h / 2` and halves whenever no transfer improves, down to `1e-6 h`.
pub fn local_search(budget: &Budget, start: &[f64], relaxed: bool) -> Result<SearchOutcome> {
    let h = budget.h;
    if !relaxed {
        ensure!(
            start.iter().all(|&g| g == 0.0 || g == h),
            "bang-bang search needs increments in {{0, h}}"
        );
    }
    let mut current = budget.candidate(start.to_vec())?;
    let mut history = vec![current.lambda1];
    let mut step = 0.5 * h;
    loop {
        let mut best: Option<ProfileCandidate> = None;
        for i in 0..budget.cells {
            for j in 0..budget.cells {
                let amount = if relaxed {
                    step.min(current.increments[i])
                        .min(h - current.increments[j])
                } else {
                    h
                };
                let movable = if relaxed {
                    i != j && amount > 0.0
                } else {
                    current.increments[i] == h && current.increments[j] == 0.0
                };
                if !movable {
                    continue;
                }
                let mut g = current.increments.clone();
                g[i] -= amount;
                g[j] += amount;
                // keep exact extremes so bang-bang cells stay recognizable
                for v in [i, j] {
                    if g[v].abs() < 1e-14 * h {
                        g[v] = 0.0;
                    } else if (g[v] - h).abs() < 1e-14 * h {
                        g[v] = h;
                    }
                }
                let cand = budget.candidate(g)?;
                if best.as_ref().is_none_or(|b| cand.lambda1 < b.lambda1) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some(b) if b.lambda1 < current.lambda1 - MOVE_TOL => {
                current = b;
                history.push(current.lambda1);
            }
            _ if relaxed && step > MIN_TRANSFER * h => step *= 0.5,
            _ => break,
        }
    }
    let interior = current
        .increments
        .iter()
        .filter(|&&g| g > 1e-3 * h && g < (1.0 - 1e-3) * h)
        .count();
    Ok(SearchOutcome {
        accepted_moves: history.len() - 1,
        history,
        bang_bang: interior <= 1,
        candidate: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::lambda1_analytic;
    use crate::model::GrowthParams;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    fn budget() -> Budget {
        Budget::new(1.0, 8.0, 8.0, 3.0, 12).unwrap()
    }

    #[test]
    fn profile_merges_runs() {
        let b = budget();
        let mut g = vec![0.0; 12];
        g[3..7].fill(8.0);
        let p = b.profile(&g).unwrap();
        assert_eq!(p.breakpoints(), &[0.75, 1.75]);
        assert_eq!(p.values(), &[1.0, 9.0, 1.0]);
        assert_eq!(b.raised_cells(), 4);
    }

    #[test]
    fn full_budget_matches_closed_form() {
        let b = Budget::new(1.0, 8.0, 24.0, 3.0, 4).unwrap();
        let r = brute_force_optimum(&b).unwrap();
        assert_eq!(r.evaluated, 1);
        let exact = lambda1_analytic(&GrowthParams::new(1.0, 9.0, 1.0, 3.0).unwrap())
            .unwrap()
            .lambda1;
        assert!(
            (r.lambda1_refined - exact).abs() < 1e-5,
            "{} vs {exact}",
            r.lambda1_refined
        );
    }

    #[test]
    fn mass_is_filled_under_the_cap() {
        let b = budget();
        let g = b.fill_mass(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0]);
        assert!(g.iter().all(|&v| v <= 8.0));
        assert!((g.iter().sum::<f64>() * b.cell_width() - 8.0).abs() < 1e-12);
        let mut rng = Pcg64::seed_from_u64(7);
        let r = b.random_start(true, &mut rng);
        assert!(b.lambda1(&r).is_ok());
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let b = Budget::new(1.0, 8.0, 4.0, 2.0, 8).unwrap();
        let r = brute_force_optimum(&b).unwrap();
        assert!(r.all_ties_contiguous());
        let s = local_search(&b, &r.best.increments, false).unwrap();
        assert_eq!(s.accepted_moves, 0);
    }
}
