//! Checkers for the analytic guarantees of the fractional algorithm and the
//! coupled rounding. Each returns the offending records; an empty result
//! means the guarantee held on that run.

use serde::Serialize;

use crate::fractional::{growth_factor, AlgGState, Update};
use crate::instance::Instance;
use crate::polytope::EPS;
use crate::rounding::{CoupledTrace, COIN_DIVISOR};

/// Constant in `Σ_i z_{i,e} >= alpha / (C · ln m) · (x_e - 1/m²)`.
pub const SIZE_TO_PROFIT_CONSTANT: f64 = 48.0;

/// Constant in `Δx / x <= C · ln m / alpha` for `alpha >= 8 ln m`.
pub const RATIO_CONSTANT: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElementShortfall {
    pub element: usize,
    /// `lhs - rhs`, negative when violated.
    pub slack: f64,
}

/// Per element, `Σ_i z_{i,e} >= alpha / (constant · ln m) · (x_e - 1/m²) - EPS`.
/// Returns every element with its slack; violations have `slack < 0`.
pub fn size_to_profit_slacks(state: &AlgGState, constant: f64) -> Vec<ElementShortfall> {
    let m = state.m();
    let coeff = state.alpha().as_f64() / (constant * (m as f64).ln());
    state
        .z_totals()
        .into_iter()
        .enumerate()
        .map(|(e, total)| ElementShortfall {
            element: e,
            slack: total - coeff * (state.x()[e] - state.floor()) + EPS,
        })
        .collect()
}

pub fn size_to_profit_violations(state: &AlgGState, constant: f64) -> Vec<ElementShortfall> {
    size_to_profit_slacks(state, constant)
        .into_iter()
        .filter(|s| s.slack < 0.0)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioViolation {
    pub update: Update,
    pub ratio: f64,
    pub bound: f64,
}

/// Per update, `Δx / x_before <= exp(8 ln m / alpha) - 1`, and additionally
/// `<= 24 ln m / alpha` when `alpha >= 8 ln m`, up to a relative 1e-9.
/// Returns the worst relative margin alongside the violations.
pub fn update_ratio_check(state: &AlgGState) -> (Vec<RatioViolation>, f64) {
    let m = state.m() as f64;
    let alpha = state.alpha().as_f64();
    let exp_bound = growth_factor(state.m(), state.alpha()) - 1.0;
    let linear_bound = (alpha >= 8.0 * m.ln()).then(|| RATIO_CONSTANT * m.ln() / alpha);
    let bound = linear_bound.map_or(exp_bound, |b| b.min(exp_bound));
    let mut worst = f64::INFINITY;
    let mut violations = Vec::new();
    for u in state.trace() {
        let ratio = u.delta() / u.x_before;
        let margin = (bound * (1.0 + 1e-9) - ratio) / bound;
        worst = worst.min(margin);
        if margin < 0.0 {
            violations.push(RatioViolation {
                update: *u,
                ratio,
                bound,
            });
        }
    }
    (violations, worst)
}

/// Elements updated more than `⌈alpha/4⌉ + 1` times.
pub fn update_count_violations(state: &AlgGState) -> Vec<(usize, usize)> {
    let cap = state.alpha().get().div_ceil(4).saturating_add(1);
    let mut counts = vec![0u128; state.m()];
    for u in state.trace() {
        counts[u.element] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > cap)
        .map(|(e, c)| (e, c as usize))
        .collect()
}

/// Trace consistency: every update increases `x_e`, consecutive updates of
/// the same element chain, and the final `x` matches the last update.
pub fn monotone_trace(state: &AlgGState) -> bool {
    let mut current = vec![state.floor(); state.m()];
    for u in state.trace() {
        if u.x_before != current[u.element] || u.x_after <= u.x_before {
            return false;
        }
        current[u.element] = u.x_after;
    }
    current.as_slice() == &state.x()[..]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RoundingFault {
    Dependent { round: usize },
    NotMonotone { round: usize },
    WrongCoinProbability { index: usize },
    ProbabilityCapExceeded { element: usize, total: f64, cap: f64 },
}

/// Safety of a rounding run: every `F_i` independent in the constraint,
/// `F_i ⊆ F_{i+1}`, each coin at exactly `Δx / 4`, and cumulative coin
/// probability per element at most `x_e / 4`.
pub fn rounding_faults(instance: &Instance, state: &AlgGState, trace: &CoupledTrace) -> Vec<RoundingFault> {
    let mut faults = Vec::new();
    let constraint = instance.constraint();
    for (i, f) in trace.f_rounds.iter().enumerate() {
        if !constraint.indep(*f) {
            faults.push(RoundingFault::Dependent { round: i });
        }
        if i > 0 && !trace.f_rounds[i - 1].is_subset(*f) {
            faults.push(RoundingFault::NotMonotone { round: i });
        }
    }
    let mut totals = vec![0.0; state.m()];
    for (k, c) in trace.coin_log.iter().enumerate() {
        if c.probability != c.delta / COIN_DIVISOR {
            faults.push(RoundingFault::WrongCoinProbability { index: k });
        }
        totals[c.element] += c.probability;
    }
    for (e, total) in totals.into_iter().enumerate() {
        let cap = state.x()[e] / COIN_DIVISOR;
        if total > cap + EPS {
            faults.push(RoundingFault::ProbabilityCapExceeded {
                element: e,
                total,
                cap,
            });
        }
    }
    faults
}
