//! Randomized rounding coupled to the fractional algorithm.
//!
//! Every fractional increment `Δx` of element `e` triggers one coin with
//! success probability `Δx / 4`. On success `e` joins `F` if `F ∪ {e}` stays
//! independent in the constraint matroid. The coin is drawn even when
//! independence already fails, so the random stream stays aligned with the
//! fractional trace.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fractional::{self, AlgGState, Alpha, ElementOrder, GuessScheme};
use crate::instance::Instance;
use crate::rng::{self, Purpose};
use crate::set::ElementSet;

/// Denominator of the per-increment coin probability.
pub const COIN_DIVISOR: f64 = 4.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CoinMode {
    #[default]
    Random,
    /// Every coin lands heads. Used to exercise the independence filter.
    AlwaysHeads,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoinRecord {
    pub round: usize,
    pub element: usize,
    pub delta: f64,
    pub probability: f64,
    pub heads: bool,
    /// True iff the element was added to `F` by this coin.
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledTrace {
    pub alpha: Alpha,
    /// `F_i` after each round, as sorted element arrays when serialized.
    pub f_rounds: Vec<ElementSet>,
    pub coin_log: Vec<CoinRecord>,
    /// `f_i(F_i)` per round.
    pub profits: Vec<f64>,
    pub total_profit: f64,
    pub fractional_profit: f64,
}

impl CoupledTrace {
    /// The final independent set.
    pub fn final_set(&self) -> ElementSet {
        self.f_rounds.last().copied().unwrap_or(ElementSet::EMPTY)
    }

    /// `seed,alpha,frac_profit,int_profit`.
    pub fn csv_summary(&self, seed: u64) -> String {
        format!(
            "{seed},{},{},{}",
            self.alpha, self.fractional_profit, self.total_profit
        )
    }
}

/// Replays the increments of a finished fractional run through the coins.
pub fn round_fractional<R: Rng + ?Sized>(
    instance: &Instance,
    state: &AlgGState,
    rng: &mut R,
    mode: CoinMode,
) -> Result<CoupledTrace> {
    instance.require_unweighted()?;
    let constraint = instance.constraint();
    let trace = state.trace();
    let mut f = ElementSet::EMPTY;
    let mut f_rounds = Vec::with_capacity(state.round());
    let mut profits = Vec::with_capacity(state.round());
    let mut coin_log = Vec::with_capacity(trace.len());
    let mut next = 0;
    for (round, arrival) in instance.arrivals().iter().enumerate().take(state.round()) {
        while next < trace.len() && trace[next].round == round {
            let u = trace[next];
            next += 1;
            let delta = u.delta();
            let probability = delta / COIN_DIVISOR;
            let heads = match mode {
                CoinMode::Random => rng.gen::<f64>() < probability,
                CoinMode::AlwaysHeads => true,
            };
            let accepted = heads && !f.contains(u.element) && constraint.indep(f.with(u.element));
            if accepted {
                f.insert(u.element);
            }
            coin_log.push(CoinRecord {
                round,
                element: u.element,
                delta,
                probability,
                heads,
                accepted,
            });
        }
        f_rounds.push(f);
        profits.push(arrival.matroid.rank_of(f) as f64);
    }
    let total_profit = profits.iter().sum();
    Ok(CoupledTrace {
        alpha: state.alpha(),
        f_rounds,
        coin_log,
        profits,
        total_profit,
        fractional_profit: state.fractional_profit(),
    })
}

/// Fractional run plus rounding for a fixed `alpha`.
pub fn run_coupled<R: Rng + ?Sized>(
    instance: &Instance,
    alpha: Alpha,
    order: ElementOrder,
    rng: &mut R,
) -> Result<CoupledTrace> {
    let state = fractional::run_algg(instance, alpha, order)?;
    round_fractional(instance, &state, rng, CoinMode::Random)
}

/// `Σ_i f_i(F_i)` as recorded.
pub fn integral_profit(trace: &CoupledTrace) -> f64 {
    trace.profits.iter().sum()
}

/// `Σ_i f_i(F_i)` recomputed from the snapshots with the instance's own
/// (possibly weighted) rank functions.
pub fn recompute_profit(trace: &CoupledTrace, instance: &Instance) -> f64 {
    instance
        .arrivals()
        .iter()
        .zip(&trace.f_rounds)
        .map(|(a, &f)| a.value(f))
        .sum()
}

/// Guesses `alpha` from the scheme and runs the coupled algorithm. The guess
/// and the coins come from separate streams of `seed`.
pub fn full_pipeline(
    instance: &Instance,
    scheme: &GuessScheme,
    order: ElementOrder,
    seed: u64,
) -> Result<CoupledTrace> {
    let alpha = scheme.sample_alpha(&mut rng::stream(seed, 0, Purpose::Guess));
    let mut coins = rng::stream(seed, alpha.get(), Purpose::Rounding);
    run_coupled(instance, alpha, order, &mut coins)
}
