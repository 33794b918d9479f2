//! The online fractional algorithm.
//!
//! For a guess `alpha`, every coordinate starts at `1/m²`. When arrival `i`
//! comes in, the elements are scanned once; an element is raised only if no
//! set containing it is tight for `x` against the constraint matroid and
//! every set containing it has `z_i`-slack above one half against the
//! arriving matroid. A raised element is multiplied by
//! `exp(UPDATE_RATE · ln m / alpha)`, capped at its headroom, and `z_{i,e}` is
//! set to half the new value.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::Instance;
use crate::matroid::Matroid;
use crate::polytope::{self, FracPoint, EPS};
use crate::rng::{self, Purpose};

/// Exponent numerator of the multiplicative update, with natural log.
pub const UPDATE_RATE: f64 = 8.0;

/// Minimum `z_i`-slack (over sets containing `e`) required to update `e`.
pub const Z_SLACK_GUARD: f64 = 0.5;

/// The guess of how many arrivals benefit from each optimal element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alpha(u128);

impl Alpha {
    pub const ONE: Alpha = Alpha(1);

    pub fn new(value: u128) -> Result<Self> {
        if value == 0 {
            return invalid("alpha must be at least 1");
        }
        Ok(Alpha(value))
    }

    /// `2^exponent`, for `exponent <= 127`.
    pub fn pow2(exponent: u32) -> Self {
        assert!(exponent < 128, "alpha exponent {exponent} overflows");
        Alpha(1u128 << exponent)
    }

    pub fn get(self) -> u128 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `exp(UPDATE_RATE · ln m / alpha)`.
pub fn growth_factor(m: usize, alpha: Alpha) -> f64 {
    (UPDATE_RATE * (m as f64).ln() / alpha.as_f64()).exp()
}

/// Order in which elements are scanned on each arrival.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementOrder {
    #[default]
    Ascending,
    Descending,
    /// A fresh permutation per arrival drawn from the given seed.
    Shuffle { seed: u64 },
}

impl ElementOrder {
    fn permutation(self, m: usize, round: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..m).collect();
        match self {
            ElementOrder::Ascending => {}
            ElementOrder::Descending => order.reverse(),
            ElementOrder::Shuffle { seed } => {
                let mut r = rng::stream(seed, round as u128, Purpose::Order);
                order.shuffle(&mut r);
            }
        }
        order
    }
}

/// One fractional increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Update {
    /// Zero-based arrival index.
    pub round: usize,
    pub element: usize,
    pub x_before: f64,
    pub x_after: f64,
    /// The value written to `z_{round, element}`.
    pub z: f64,
}

impl Update {
    pub fn delta(&self) -> f64 {
        self.x_after - self.x_before
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgGState {
    alpha: Alpha,
    order: ElementOrder,
    x: FracPoint,
    /// Sparse `z_i`, one map per processed arrival; absent entries are zero.
    z: Vec<BTreeMap<usize, f64>>,
    trace: Vec<Update>,
}

impl AlgGState {
    /// Fresh state with every coordinate at `1/m²`.
    pub fn new(m: usize, alpha: Alpha) -> Result<Self> {
        if m < 2 {
            return invalid(format!("need at least two elements, got {m}"));
        }
        let floor = 1.0 / (m * m) as f64;
        Ok(AlgGState {
            alpha,
            order: ElementOrder::Ascending,
            x: FracPoint::new(vec![floor; m])?,
            z: Vec::new(),
            trace: Vec::new(),
        })
    }

    pub fn with_order(mut self, order: ElementOrder) -> Self {
        self.order = order;
        self
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.x.m()
    }

    /// Initial value of every coordinate.
    pub fn floor(&self) -> f64 {
        1.0 / (self.m() * self.m()) as f64
    }

    pub fn x(&self) -> &FracPoint {
        &self.x
    }

    /// Arrivals processed so far.
    pub fn round(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self, round: usize, e: usize) -> f64 {
        self.z
            .get(round)
            .and_then(|zi| zi.get(&e))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn z_sparse(&self) -> &[BTreeMap<usize, f64>] {
        &self.z
    }

    /// `z` as one dense vector per round.
    pub fn z_dense(&self) -> Vec<Vec<f64>> {
        self.z
            .iter()
            .map(|zi| {
                let mut v = vec![0.0; self.m()];
                for (&e, &val) in zi {
                    v[e] = val;
                }
                v
            })
            .collect()
    }

    /// All updates in processing order.
    pub fn trace(&self) -> &[Update] {
        &self.trace
    }

    /// Handles one arrival.
    pub fn process_arrival(&mut self, constraint: &Matroid, arrival: &Matroid) -> Result<()> {
        let m = self.m();
        if constraint.m() != m || arrival.m() != m {
            return invalid(format!(
                "state has {m} elements but matroids have {} and {}",
                constraint.m(),
                arrival.m()
            ));
        }
        let round = self.round();
        let factor = growth_factor(m, self.alpha);
        let mut zi = vec![0.0; m];
        let mut sparse = BTreeMap::new();
        for e in self.order.permutation(m, round) {
            let x_before = self.x[e];
            let head = polytope::headroom(constraint, &self.x, e)?;
            if head - x_before <= EPS {
                continue;
            }
            if polytope::min_slack(arrival, &zi, e)? <= Z_SLACK_GUARD + EPS {
                continue;
            }
            let x_after = (x_before * factor).min(head);
            self.x.set(e, x_after);
            let z = x_after / 2.0;
            zi[e] = z;
            sparse.insert(e, z);
            self.trace.push(Update {
                round,
                element: e,
                x_before,
                x_after,
                z,
            });
        }
        self.z.push(sparse);
        Ok(())
    }

    /// `Σ_i Σ_e z_{i,e}`.
    pub fn fractional_profit(&self) -> f64 {
        self.z.iter().flat_map(|zi| zi.values()).sum()
    }

    /// `Σ_i z_{i,e}` per element.
    pub fn z_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.m()];
        for zi in &self.z {
            for (&e, &v) in zi {
                totals[e] += v;
            }
        }
        totals
    }

    /// Writes the trace as JSON lines, one update per line.
    pub fn write_trace_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for u in &self.trace {
            serde_json::to_writer(&mut out, u)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs the fractional algorithm over a whole unweighted instance.
pub fn run_algg(instance: &Instance, alpha: Alpha, order: ElementOrder) -> Result<AlgGState> {
    instance.require_unweighted()?;
    let mut state = AlgGState::new(instance.m(), alpha)?.with_order(order);
    for arrival in instance.arrivals() {
        state.process_arrival(instance.constraint(), &arrival.matroid)?;
    }
    Ok(state)
}

/// `⌈log₂ n⌉`, with `n <= 1` mapping to 0.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// The guesses `{1, 2, 4, .., 2^⌈log₂ n⌉}`.
pub fn known_n_support(n: usize) -> Vec<Alpha> {
    (0..=ceil_log2(n)).map(Alpha::pow2).collect()
}

/// Heavy-tailed distribution over `i ∈ {1, .., i_max}` with
/// `Pr[i] = 1 / (c · i · ln(1+i)^(1+epsilon))`; rounding leftovers go to `i = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavyTail {
    epsilon: f64,
    c: f64,
    probabilities: Vec<f64>,
}

impl HeavyTail {
    pub const DEFAULT_EPSILON: f64 = 1.0;
    pub const DEFAULT_I_MAX: u32 = 64;

    pub fn new(epsilon: f64, i_max: u32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return invalid(format!("epsilon must be positive, got {epsilon}"));
        }
        if i_max == 0 || i_max > 127 {
            return invalid(format!("i_max must lie in 1..=127, got {i_max}"));
        }
        let raw: Vec<f64> = (1..=i_max)
            .map(|i| {
                let i = i as f64;
                1.0 / (i * (1.0 + i).ln().powf(1.0 + epsilon))
            })
            .collect();
        let c: f64 = raw.iter().sum();
        let mut probabilities: Vec<f64> = raw.iter().map(|p| p / c).collect();
        let leftover = 1.0 - probabilities.iter().sum::<f64>();
        if leftover > 0.0 {
            probabilities[0] += leftover;
        }
        Ok(HeavyTail {
            epsilon,
            c,
            probabilities,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn normalizer(&self) -> f64 {
        self.c
    }

    pub fn i_max(&self) -> u32 {
        self.probabilities.len() as u32
    }

    /// `Pr[i]`, zero outside `1..=i_max`.
    pub fn probability(&self, i: u32) -> f64 {
        if i == 0 {
            return 0.0;
        }
        self.probabilities.get(i as usize - 1).copied().unwrap_or(0.0)
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return k as u32 + 1;
            }
        }
        // u fell into the floating-point gap above the accumulated mass
        1
    }
}

impl Default for HeavyTail {
    fn default() -> Self {
        HeavyTail::new(Self::DEFAULT_EPSILON, Self::DEFAULT_I_MAX).expect("default parameters are valid")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GuessScheme {
    /// Uniform over `{1, 2, .., 2^⌈log₂ n⌉}`.
    KnownN { n: usize },
    /// `alpha = 2^i` with `i` drawn from the heavy tail.
    UnknownN(HeavyTail),
}

impl GuessScheme {
    pub fn unknown_n() -> Self {
        GuessScheme::UnknownN(HeavyTail::default())
    }

    pub fn sample_alpha<R: Rng + ?Sized>(&self, rng: &mut R) -> Alpha {
        match self {
            GuessScheme::KnownN { n } => {
                let top = ceil_log2(*n);
                Alpha::pow2(rng.gen_range(0..=top))
            }
            GuessScheme::UnknownN(tail) => Alpha::pow2(tail.sample_index(rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Arrival;
    use crate::matroid::MatroidSpec;
    use crate::rng::stream;

    #[test]
    fn init_examples() {
        let s = AlgGState::new(10, Alpha::ONE).unwrap();
        assert!(s.x().iter().all(|&v| (v - 0.01).abs() < 1e-15));
        let s = AlgGState::new(2, Alpha::ONE).unwrap();
        assert!(s.x().iter().all(|&v| v == 0.25));
        assert_eq!(s.round(), 0);
        assert_eq!(s.fractional_profit(), 0.0);
        assert!(AlgGState::new(1, Alpha::ONE).is_err());
        assert!(Alpha::new(0).is_err());
    }

    #[test]
    fn rank_zero_arrival_changes_nothing() {
        let loops = Matroid::new(MatroidSpec::Explicit {
            m: 4,
            circuits: (0..4).map(|e| vec![e]).collect(),
        })
        .unwrap();
        let mut s = AlgGState::new(4, Alpha::ONE).unwrap();
        let before = s.x().clone();
        s.process_arrival(&Matroid::uniform(4, 4), &loops).unwrap();
        assert_eq!(s.x(), &before);
        assert!(s.trace().is_empty());
        assert_eq!(s.round(), 1);
    }

    /// Free constraint, free arrival, alpha = 1: the factor 4^8 overshoots so
    /// each element is capped at headroom 1 with z = 1/2. In a free arrival
    /// r(S) - z(S) = Σ_{f∈S}(1 - z_f) >= 1 for any S holding an unprocessed
    /// element, so no element is blocked.
    #[test]
    fn free_matroid_trace() {
        let free = Matroid::uniform(4, 4);
        let mut s = AlgGState::new(4, Alpha::ONE).unwrap();
        s.process_arrival(&free, &free).unwrap();
        let t = s.trace();
        assert_eq!(t.len(), 4);
        for (e, u) in t.iter().enumerate() {
            assert_eq!(u.element, e);
            assert_eq!(u.x_before, 1.0 / 16.0);
            assert_eq!(u.x_after, 1.0);
            assert_eq!(u.z, 0.5);
        }
        // every coordinate is now tight, nothing moves on the next arrival
        s.process_arrival(&free, &free).unwrap();
        assert_eq!(s.trace().len(), 4);
        assert_eq!(s.fractional_profit(), 2.0);
    }

    /// Rank-one arrival: after element 0 takes z = 1/2, S = {0, e} has
    /// slack 1 - 1/2 = 1/2, which fails the strict guard for every later e.
    #[test]
    fn rank_one_arrival_blocks_after_first() {
        let mut s = AlgGState::new(4, Alpha::ONE).unwrap();
        s.process_arrival(&Matroid::uniform(4, 4), &Matroid::uniform(4, 1))
            .unwrap();
        assert_eq!(s.trace().len(), 1);
        assert_eq!(s.trace()[0].element, 0);
        assert_eq!(s.x()[0], 1.0);
        assert_eq!(s.z(0, 0), 0.5);
        assert_eq!(s.x()[1], 1.0 / 16.0);
    }

    /// m = 2, M = N_1 = Uniform(2, 1), alpha = 1. Element 0: headroom
    /// min(1, 1 - 1/4) = 3/4, raised to 3/4, z = 3/8. Element 1: the set
    /// {0, 1} now has x-slack 1 - 3/4 - 1/4 = 0, so it is tight and skipped.
    #[test]
    fn two_element_hand_trace() {
        let u = Matroid::uniform(2, 1);
        let inst = Instance::new(u.clone(), vec![Arrival::unweighted(u)]).unwrap();
        let s = run_algg(&inst, Alpha::ONE, ElementOrder::Ascending).unwrap();
        assert_eq!(s.trace().len(), 1);
        assert_eq!(s.x()[0], 0.75);
        assert_eq!(s.x()[1], 0.25);
        assert_eq!(s.z(0, 0), 0.375);
        assert_eq!(s.fractional_profit(), 0.375);
    }

    #[test]
    fn huge_alpha_is_nearly_stationary() {
        let free = Matroid::uniform(4, 4);
        let alpha = Alpha::pow2(20);
        let mut s = AlgGState::new(4, alpha).unwrap();
        s.process_arrival(&free, &free).unwrap();
        let expected = (1.0 / 16.0) * (8.0 * 4f64.ln() / 1048576.0).exp();
        assert!((s.x()[0] - expected).abs() < 1e-15);
        assert!((growth_factor(4, alpha) - 1.0 - 1.0576e-5).abs() < 1e-8);
    }

    #[test]
    fn rejects_weighted_and_mismatched() {
        let inst = Instance::new(
            Matroid::uniform(3, 1),
            vec![Arrival::weighted(
                Matroid::uniform(3, 1),
                crate::WeightVector::new(vec![1.0, 2.0, 1.0]).unwrap(),
            )],
        )
        .unwrap();
        assert!(run_algg(&inst, Alpha::ONE, ElementOrder::Ascending).is_err());
        let mut s = AlgGState::new(3, Alpha::ONE).unwrap();
        assert!(s
            .process_arrival(&Matroid::uniform(3, 1), &Matroid::uniform(4, 1))
            .is_err());
    }

    #[test]
    fn empty_instance() {
        let inst = Instance::new(Matroid::uniform(3, 1), vec![]).unwrap();
        let s = run_algg(&inst, Alpha::ONE, ElementOrder::Ascending).unwrap();
        assert_eq!(s, AlgGState::new(3, Alpha::ONE).unwrap());
        assert_eq!(s.fractional_profit(), 0.0);
    }

    #[test]
    fn orders_are_permutations() {
        for order in [
            ElementOrder::Ascending,
            ElementOrder::Descending,
            ElementOrder::Shuffle { seed: 3 },
        ] {
            let mut p = order.permutation(9, 2);
            p.sort();
            assert_eq!(p, (0..9).collect::<Vec<_>>());
        }
        assert_eq!(ElementOrder::Descending.permutation(3, 0), vec![2, 1, 0]);
    }

    #[test]
    fn trace_jsonl_format() {
        let free = Matroid::uniform(2, 2);
        let mut s = AlgGState::new(2, Alpha::ONE).unwrap();
        s.process_arrival(&free, &free).unwrap();
        let mut buf = Vec::new();
        s.write_trace_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, r#"{"round":0,"element":0,"x_before":0.25,"x_after":1.0,"z":0.5}"#);
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn known_n_support_and_sampling() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        let support: Vec<u128> = known_n_support(8).iter().map(|a| a.get()).collect();
        assert_eq!(support, vec![1, 2, 4, 8]);
        let mut r = stream(1, 0, Purpose::Guess);
        let scheme = GuessScheme::KnownN { n: 1 };
        assert!((0..100).all(|_| scheme.sample_alpha(&mut r) == Alpha::ONE));
    }

    #[test]
    fn heavy_tail_probabilities() {
        let t = HeavyTail::default();
        let total: f64 = (1..=64).map(|i| t.probability(i)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(t.probability(0), 0.0);
        assert_eq!(t.probability(65), 0.0);
        assert!(t.probability(1) > t.probability(2));
        assert!(HeavyTail::new(0.0, 10).is_err());
    }
}
