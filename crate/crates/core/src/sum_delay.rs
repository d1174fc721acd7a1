//! Minimum sum of delays by alternating between power allocation and mode
//! selection.
//!
//! With modes fixed the problem is convex in power. Semantic subcarriers sit
//! exactly at the power that meets their similarity requirement, and the
//! remaining budget is shared by the bit-level subcarriers through the KKT
//! condition
//!
//! ```text
//! ln2 U_l / (W c_l G (1 + x_l) ln^2(1 + x_l)) = lambda,   x_l = P_l / (c_l G)
//! ```
//!
//! whose solution is `P_l = c_l G (exp(2 W0(sqrt(d_l / 4))) - 1)` with
//! `d_l = ln2 U_l / (lambda W c_l G)`. The multiplier is found by bisection on
//! the budget equation. With powers fixed, the objective separates over
//! subcarriers, so the mode problem is solved exactly one subcarrier at a time.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::instance::{settle_all_semantic, Instance};
use crate::lambert::lambert_w0;
use crate::link::{Mode, SubcarrierAllocation};

const MAX_BISECTION: usize = 400;

/// Optimal powers for a fixed mode vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    pub powers: Vec<f64>,
    /// Dual variable of the budget constraint; `None` when no bit-level
    /// subcarrier carries data.
    pub lambda: Option<f64>,
    /// Budget left for bit-level subcarriers after semantic pinning.
    pub shannon_budget: f64,
}

/// Marginal delay reduction `-dD_l/dP_l` of a bit-level subcarrier.
pub fn marginal_gain(instance: &Instance, l: usize, power: f64) -> f64 {
    let s = &instance.subcarriers[l];
    let a = s.noise_over_gain * instance.gap;
    let x = power / a;
    let ln = x.ln_1p();
    LN_2 * s.bits / (instance.bandwidth_hz * a * (1.0 + x) * ln * ln)
}

/// Stationary power of subcarrier `l` for multiplier `lambda`.
pub fn kkt_power(instance: &Instance, l: usize, lambda: f64) -> f64 {
    let s = &instance.subcarriers[l];
    if s.bits == 0.0 {
        return 0.0;
    }
    let a = s.noise_over_gain * instance.gap;
    let delta = LN_2 * s.bits / (lambda * instance.bandwidth_hz * a);
    let w = lambert_w0((delta / 4.0).sqrt()).expect("argument is non-negative");
    a * (2.0 * w).exp_m1()
}

/// Solves the convex power problem for fixed `modes`.
pub fn solve_p2(instance: &Instance, modes: &[Mode]) -> Result<PowerSolution> {
    if modes.len() != instance.len() {
        return Err(Error::domain("modes", "one mode per subcarrier is required"));
    }
    let pinned = instance.pinned_power(modes)?;
    let budget = instance.total_power - pinned;
    let shannon: Vec<usize> = (0..instance.len()).filter(|&l| !modes[l].is_semantic()).collect();

    if shannon.is_empty() {
        if budget < -1e-12 * instance.total_power {
            return Err(Error::InfeasibleSelection {
                pinned,
                budget: instance.total_power,
            });
        }
        return Ok(PowerSolution {
            powers: settle_all_semantic(instance, budget.max(0.0)),
            lambda: None,
            shannon_budget: budget.max(0.0),
        });
    }
    if !(budget > 0.0) {
        return Err(Error::InfeasibleSelection {
            pinned,
            budget: instance.total_power,
        });
    }

    let mut powers: Vec<f64> = (0..instance.len())
        .map(|l| instance.subcarriers[l].semantic_power().filter(|_| modes[l].is_semantic()).unwrap_or(0.0))
        .collect();
    let loaded: Vec<usize> = shannon.iter().copied().filter(|&l| instance.subcarriers[l].bits > 0.0).collect();

    let lambda = if loaded.is_empty() {
        let share = budget / shannon.len() as f64;
        for &l in &shannon {
            powers[l] = share;
        }
        None
    } else {
        let lambda = solve_multiplier(instance, &loaded, budget);
        for &l in &loaded {
            powers[l] = kkt_power(instance, l, lambda);
        }
        absorb_residual(&mut powers, &loaded, budget);
        Some(lambda)
    };
    Ok(PowerSolution {
        powers,
        lambda,
        shannon_budget: budget,
    })
}

fn budget_used(instance: &Instance, loaded: &[usize], lambda: f64) -> f64 {
    loaded.iter().map(|&l| kkt_power(instance, l, lambda)).sum()
}

/// Bisection in `ln(lambda)` on the strictly decreasing budget function.
fn solve_multiplier(instance: &Instance, loaded: &[usize], budget: f64) -> f64 {
    // At the smallest marginal with all power on one subcarrier, that
    // subcarrier alone spends the budget; at the largest marginal with an
    // even split, every subcarrier spends at most its share.
    let even = budget / loaded.len() as f64;
    let mut lo = loaded
        .iter()
        .map(|&l| marginal_gain(instance, l, budget))
        .fold(f64::INFINITY, f64::min);
    let mut hi = loaded
        .iter()
        .map(|&l| marginal_gain(instance, l, even))
        .fold(0.0, f64::max);
    while budget_used(instance, loaded, lo) < budget {
        lo /= 2.0;
    }
    while budget_used(instance, loaded, hi) > budget {
        hi *= 2.0;
    }
    let (mut log_lo, mut log_hi) = (lo.ln(), hi.ln());
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (log_lo + log_hi);
        if mid <= log_lo || mid >= log_hi {
            break;
        }
        if budget_used(instance, loaded, mid.exp()) > budget {
            log_lo = mid;
        } else {
            log_hi = mid;
        }
    }
    let (lo, hi) = (log_lo.exp(), log_hi.exp());
    let err = |l: f64| (budget_used(instance, loaded, l) - budget).abs();
    if err(lo) <= err(hi) {
        lo
    } else {
        hi
    }
}

/// Places the rounding residual of the budget on the largest entry of `set`.
pub(crate) fn absorb_residual(powers: &mut [f64], set: &[usize], budget: f64) {
    let used: f64 = set.iter().map(|&l| powers[l]).sum();
    if let Some(&top) = set.iter().max_by(|&&a, &&b| powers[a].total_cmp(&powers[b])) {
        powers[top] = (powers[top] + (budget - used)).max(0.0);
    }
}

/// Exact mode selection at fixed powers: semantic exactly when the
/// subcarrier can meet its requirement at its current power and the semantic
/// delay is strictly smaller. Ties keep bit-level transmission.
pub fn select_modes_p3(instance: &Instance, powers: &[f64]) -> Vec<Mode> {
    (0..instance.len())
        .map(|l| {
            if instance.semantic_allowed(l, powers[l]) && instance.semantic_delay(l) < instance.shannon_delay(l, powers[l]) {
                Mode::Semantic
            } else {
                Mode::Shannon
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The selection repeated the previous mode vector.
    Converged,
    /// A mode vector seen earlier (not the previous one) came back.
    Cycle,
    IterationLimit,
    /// The new selection left no power for bit-level subcarriers; the
    /// previous selection was kept.
    Reverted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub modes: Vec<Mode>,
    pub objective: f64,
}

/// Result of the alternating optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSolverState {
    pub allocation: Vec<SubcarrierAllocation>,
    pub lambda: Option<f64>,
    pub total_power: f64,
    pub shannon_budget: f64,
    pub objective: f64,
    /// Objective after every power solve, starting with all bit-level.
    pub history: Vec<Iterate>,
    pub selection_passes: usize,
    pub stop: StopReason,
}

impl SumSolverState {
    pub fn modes(&self) -> Vec<Mode> {
        self.allocation.iter().map(|a| a.mode).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.allocation.iter().map(|a| a.power).collect()
    }

    pub fn semantic_count(&self) -> usize {
        self.allocation.iter().filter(|a| a.mode.is_semantic()).count()
    }

    /// Objective of the all-bit-level starting point.
    pub fn initial_objective(&self) -> f64 {
        self.history[0].objective
    }
}

/// Alternates mode selection and power allocation from the all-bit-level
/// start for at most `max_iters` selection passes and keeps the best iterate.
pub fn alternate_optimize(instance: &Instance, max_iters: usize) -> Result<SumSolverState> {
    let mut modes = vec![Mode::Shannon; instance.len()];
    let mut sol = solve_p2(instance, &modes)?;
    let mut history = vec![Iterate {
        modes: modes.clone(),
        objective: instance.sum_delay(&modes, &sol.powers),
    }];
    let mut best = (modes.clone(), sol.clone(), history[0].objective);
    let mut stop = StopReason::IterationLimit;
    let mut passes = 0;

    for _ in 0..max_iters {
        let next = select_modes_p3(instance, &sol.powers);
        passes += 1;
        if next == modes {
            stop = StopReason::Converged;
            break;
        }
        if history.iter().any(|it| it.modes == next) {
            stop = StopReason::Cycle;
            break;
        }
        match solve_p2(instance, &next) {
            Ok(s) => sol = s,
            Err(Error::InfeasibleSelection { .. }) => {
                stop = StopReason::Reverted;
                break;
            }
            Err(e) => return Err(e),
        }
        modes = next;
        let objective = instance.sum_delay(&modes, &sol.powers);
        history.push(Iterate {
            modes: modes.clone(),
            objective,
        });
        if objective < best.2 {
            best = (modes.clone(), sol.clone(), objective);
        }
    }

    let (modes, sol, objective) = best;
    Ok(SumSolverState {
        allocation: instance.allocation(&modes, &sol.powers),
        lambda: sol.lambda,
        total_power: instance.total_power,
        shannon_budget: sol.shannon_budget,
        objective,
        history,
        selection_passes: passes,
        stop,
    })
}
