//! Minimum worst-case delay with a greedy semantic switching heuristic.
//!
//! For a fixed bit-level set the optimum equalizes the delays. Relative to a
//! reference subcarrier `r`, equal delays mean
//!
//! ```text
//! P_m = c_m G ((1 + P_r / (c_r G))^(U_m / U_r) - 1)
//! ```
//!
//! so the budget equation is one-dimensional in `P_r` and strictly
//! increasing. The heuristic starts all bit-level and repeatedly moves to
//! semantic transmission the subcarrier with the smallest semantic delay that
//! beats the common delay and currently holds more power than semantic
//! transmission needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{settle_all_semantic, Instance};
use crate::link::{Mode, SubcarrierAllocation};
use crate::sum_delay::absorb_residual;

const MAX_BISECTION: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct EqualDelay {
    /// Powers indexed like the instance; zero outside the bit-level set.
    pub powers: Vec<f64>,
    /// Common delay of the loaded bit-level subcarriers.
    pub delay: f64,
}

/// Equal-delay power split of `available` over `shannon_set`.
pub fn equal_delay_allocation(instance: &Instance, shannon_set: &[usize], available: f64) -> Result<EqualDelay> {
    if shannon_set.is_empty() {
        return Err(Error::domain("shannon_set", "at least one bit-level subcarrier is required"));
    }
    if !(available > 0.0 && available.is_finite()) {
        return Err(Error::InfeasibleSelection {
            pinned: instance.total_power - available,
            budget: instance.total_power,
        });
    }
    let mut powers = vec![0.0; instance.len()];
    let loaded: Vec<usize> = shannon_set.iter().copied().filter(|&l| instance.subcarriers[l].bits > 0.0).collect();
    if loaded.is_empty() {
        let share = available / shannon_set.len() as f64;
        for &l in shannon_set {
            powers[l] = share;
        }
        return Ok(EqualDelay { powers, delay: 0.0 });
    }

    let reference = *loaded
        .iter()
        .max_by(|&&a, &&b| {
            let (ua, ub) = (instance.subcarriers[a].bits, instance.subcarriers[b].bits);
            ua.total_cmp(&ub).then(b.cmp(&a))
        })
        .expect("loaded set is non-empty");
    let gap = instance.gap;
    let a_ref = instance.subcarriers[reference].noise_over_gain * gap;
    let u_ref = instance.subcarriers[reference].bits;
    let fill = |p_ref: f64, powers: &mut [f64]| -> f64 {
        let log_ref = (p_ref / a_ref).ln_1p();
        let mut used = 0.0;
        for &m in &loaded {
            let s = &instance.subcarriers[m];
            let p = s.noise_over_gain * gap * (s.bits / u_ref * log_ref).exp_m1();
            powers[m] = p;
            used += p;
        }
        used
    };

    let (mut lo, mut hi) = (0.0, available);
    while fill(hi, &mut powers) < available {
        hi *= 2.0;
    }
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fill(mid, &mut powers) > available {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    fill(lo, &mut powers);
    absorb_residual(&mut powers, &loaded, available);
    let delay = instance.shannon_delay(reference, powers[reference]);
    Ok(EqualDelay { powers, delay })
}

/// Direction in which candidates are ranked by semantic delay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub subcarrier: usize,
    /// Bit-level power held just before the switch.
    pub power_before: f64,
    pub semantic_power: f64,
    pub semantic_delay: f64,
    /// Common delay that the semantic delay had to beat.
    pub delay_before: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxState {
    pub allocation: Vec<SubcarrierAllocation>,
    /// Final common bit-level delay; `None` once every subcarrier is semantic.
    pub shannon_delay: Option<f64>,
    /// Largest delay over all subcarriers.
    pub objective: f64,
    /// Common delay after each equal-delay solve.
    pub delay_history: Vec<f64>,
    pub switches: Vec<Switch>,
    /// Total size of the bit-level sets over all equal-delay solves.
    pub equal_delay_equations: usize,
}

impl MinMaxState {
    pub fn modes(&self) -> Vec<Mode> {
        self.allocation.iter().map(|a| a.mode).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.allocation.iter().map(|a| a.power).collect()
    }

    pub fn semantic_count(&self) -> usize {
        self.switches.len()
    }

    /// Common delay of the all-bit-level start.
    pub fn initial_delay(&self) -> f64 {
        self.delay_history[0]
    }
}

pub fn minmax_heuristic(instance: &Instance, order: CandidateOrder) -> Result<MinMaxState> {
    let n = instance.len();
    let mut modes = vec![Mode::Shannon; n];
    let mut shannon: Vec<usize> = (0..n).collect();
    let mut available = instance.total_power;
    let mut sol = equal_delay_allocation(instance, &shannon, available)?;
    let mut history = vec![sol.delay];
    let mut equations = shannon.len();
    let mut switches = Vec::new();

    let mut ranked: Vec<usize> = (0..n).filter(|&l| instance.subcarriers[l].required_snr.is_some()).collect();
    ranked.sort_by(|&a, &b| {
        let ord = instance.semantic_delay(a).total_cmp(&instance.semantic_delay(b));
        match order {
            CandidateOrder::Ascending => ord,
            CandidateOrder::Descending => ord.reverse(),
        }
        .then(a.cmp(&b))
    });

    for _ in 0..n {
        let delta = sol.delay;
        let pick = ranked.iter().copied().find(|&m| {
            !modes[m].is_semantic()
                && instance.semantic_delay(m) < delta
                && sol.powers[m] > instance.subcarriers[m].semantic_power().expect("ranked candidates are capable")
        });
        let Some(m) = pick else { break };
        let semantic_power = instance.subcarriers[m].semantic_power().expect("checked above");
        switches.push(Switch {
            subcarrier: m,
            power_before: sol.powers[m],
            semantic_power,
            semantic_delay: instance.semantic_delay(m),
            delay_before: delta,
        });
        modes[m] = Mode::Semantic;
        shannon.retain(|&l| l != m);
        available -= semantic_power;
        if shannon.is_empty() {
            break;
        }
        sol = equal_delay_allocation(instance, &shannon, available)?;
        history.push(sol.delay);
        equations += shannon.len();
    }

    let (powers, shannon_delay) = if shannon.is_empty() {
        (settle_all_semantic(instance, available.max(0.0)), None)
    } else {
        let mut powers = sol.powers;
        for (l, mode) in modes.iter().enumerate() {
            if mode.is_semantic() {
                powers[l] = instance.subcarriers[l].semantic_power().expect("semantic subcarrier");
            }
        }
        (powers, Some(sol.delay))
    };
    Ok(MinMaxState {
        objective: instance.max_delay(&modes, &powers),
        allocation: instance.allocation(&modes, &powers),
        shannon_delay,
        delay_history: history,
        switches,
        equal_delay_equations: equations,
    })
}

/// Operation count model of the heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEstimate {
    /// Sorting the candidates, `L log2 L`.
    pub sort: f64,
    /// Scanning candidates and updating the sets, `2 L^2`.
    pub scan: f64,
    /// Equal-delay root finds, `(L^2 + L) / 2` equations times `X` iterations.
    pub root_finding: f64,
}

impl ComplexityEstimate {
    pub fn total(&self) -> f64 {
        self.sort + self.scan + self.root_finding
    }
}

/// Worst-case number of equal-delay equations over a full run.
pub fn max_equal_delay_equations(subcarriers: usize) -> usize {
    (subcarriers * subcarriers + subcarriers) / 2
}

pub fn complexity_estimate(subcarriers: usize, root_iters: usize) -> Result<ComplexityEstimate> {
    if subcarriers == 0 {
        return Err(Error::domain("subcarriers", "must be >= 1"));
    }
    let l = subcarriers as f64;
    Ok(ComplexityEstimate {
        sort: l * l.log2(),
        scan: 2.0 * l * l,
        root_finding: max_equal_delay_equations(subcarriers) as f64 * root_iters as f64,
    })
}
