//! Covering a random sample from half the matroid polytope by few
//! independent sets.
//!
//! [`sequential_rounds_cover`] runs the round-based sampling process: each
//! round scans the surviving elements in a fixed order and tosses a coin for
//! every element that can still extend the round's independent set. The
//! union of the rounds is distributed exactly like [`sample_set`]; the
//! number of rounds is the cover size. [`last_element_order`] builds the
//! ordering that makes every toss happen with probability at least one half.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::matroid::{Matroid, RANK_TABLE_LIMIT};
use crate::polytope;
use crate::set::ElementSet;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverResult {
    pub sampled: ElementSet,
    /// Disjoint independent sets whose union is `sampled`. The round-based
    /// process may leave some of them empty.
    pub parts: Vec<ElementSet>,
    pub rounds: usize,
}

/// Includes each element independently with probability `z_e`.
pub fn sample_set<R: Rng + ?Sized>(z: &[f64], rng: &mut R) -> ElementSet {
    z.iter()
        .enumerate()
        .filter(|(_, &p)| rng.gen::<f64>() < p)
        .map(|(e, _)| e)
        .collect()
}

fn warm(matroid: &Matroid) {
    if matroid.m() <= RANK_TABLE_LIMIT {
        let _ = matroid.rank_table();
    }
}

/// Scans `d` in ascending order and puts each element into the first part
/// that stays independent, opening a new part when none does.
pub fn first_fit_cover(matroid: &Matroid, d: ElementSet) -> Result<CoverResult> {
    if !d.within(matroid.m()) {
        return invalid(format!("sample {d:?} leaves the ground set of size {}", matroid.m()));
    }
    let mut parts: Vec<ElementSet> = Vec::new();
    for e in d {
        if matroid.is_loop(e) {
            return Err(Error::Loop(e));
        }
        match parts.iter_mut().find(|p| matroid.indep(p.with(e))) {
            Some(p) => p.insert(e),
            None => parts.push(ElementSet::singleton(e)),
        }
    }
    Ok(CoverResult {
        sampled: d,
        rounds: parts.len(),
        parts,
    })
}

fn check_point(matroid: &Matroid, z: &[f64]) -> Result<()> {
    if z.len() != matroid.m() {
        return invalid(format!(
            "point has {} coordinates but the matroid has {} elements",
            z.len(),
            matroid.m()
        ));
    }
    if let Some((e, v)) = z.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return invalid(format!("probability of element {e} is {v}, outside [0, 1]"));
    }
    Ok(())
}

/// The round-based process. Loops can never be tossed and are dropped from
/// the survivor set up front; with `z` in half the polytope their
/// probability is zero anyway.
pub fn sequential_rounds_cover<R: Rng + ?Sized>(
    matroid: &Matroid,
    z: &[f64],
    rng: &mut R,
    ordering: &[usize],
) -> Result<CoverResult> {
    check_point(matroid, z)?;
    let m = matroid.m();
    let listed: ElementSet = ordering.iter().copied().filter(|&e| e < m).collect();
    if ordering.len() != m || listed != matroid.ground() {
        return invalid("ordering must be a permutation of the ground set");
    }
    let mut survivors = matroid.ground().difference(matroid.loops());
    let mut parts = Vec::new();
    let mut sampled = ElementSet::EMPTY;
    while !survivors.is_empty() {
        assert!(parts.len() < m, "round-based cover exceeded m rounds");
        let mut part = ElementSet::EMPTY;
        for &e in ordering {
            if !survivors.contains(e) || !matroid.indep(part.with(e)) {
                continue;
            }
            if rng.gen::<f64>() < z[e] {
                part.insert(e);
            }
            survivors.remove(e);
        }
        sampled = sampled.union(part);
        parts.push(part);
    }
    Ok(CoverResult {
        sampled,
        rounds: parts.len(),
        parts,
    })
}

/// `Pr[e ∉ span(D)]` for `D` drawn from `z` restricted to `preceding`, by
/// exhaustive enumeration of the outcomes.
pub fn exact_toss_probability(matroid: &Matroid, z: &[f64], preceding: ElementSet, e: usize) -> f64 {
    let preceding = preceding.without(e);
    preceding
        .subsets()
        .map(|d| {
            let p: f64 = preceding
                .iter()
                .map(|f| if d.contains(f) { z[f] } else { 1.0 - z[f] })
                .product();
            if matroid.rank_of(d.with(e)) > matroid.rank_of(d) {
                p
            } else {
                0.0
            }
        })
        .sum()
}

/// Exact toss probability of every element of `ordering` when the elements
/// before it are sampled from `z`.
pub fn exact_toss_probabilities(matroid: &Matroid, z: &[f64], ordering: &[usize]) -> Vec<f64> {
    warm(matroid);
    let mut before = ElementSet::EMPTY;
    ordering
        .iter()
        .map(|&e| {
            let p = exact_toss_probability(matroid, z, before, e);
            before.insert(e);
            p
        })
        .collect()
}

/// Monte-Carlo estimates of `Pr[e ∉ span(D \ {e})]` for every `e` in
/// `pool`, with `D` drawn from `z` restricted to `pool`.
pub fn estimate_toss_probabilities<R: Rng + ?Sized>(
    matroid: &Matroid,
    z: &[f64],
    pool: ElementSet,
    rng: &mut R,
    samples: usize,
) -> Vec<(usize, f64)> {
    let members = pool.to_vec();
    let mut hits = vec![0usize; members.len()];
    for _ in 0..samples {
        let d: ElementSet = members
            .iter()
            .copied()
            .filter(|&f| rng.gen::<f64>() < z[f])
            .collect();
        for (k, &e) in members.iter().enumerate() {
            let rest = d.without(e);
            if matroid.rank_of(rest.with(e)) > matroid.rank_of(rest) {
                hits[k] += 1;
            }
        }
    }
    members
        .into_iter()
        .zip(hits)
        .map(|(e, h)| (e, h as f64 / samples as f64))
        .collect()
}

/// Builds an ordering back to front: among the remaining elements, the one
/// with the largest estimated toss probability (ties to the lower index) is
/// placed last, provided its estimate clears `1/2 - 2σ̂`. Loops come first.
///
/// Requires `2z ∈ P(M)`.
pub fn last_element_order<R: Rng + ?Sized>(
    matroid: &Matroid,
    z: &[f64],
    rng: &mut R,
    samples: usize,
) -> Result<Vec<usize>> {
    check_point(matroid, z)?;
    if samples == 0 {
        return invalid("need at least one Monte-Carlo sample");
    }
    let doubled: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
    if !polytope::in_polytope(matroid, &doubled)? {
        return invalid("z must satisfy z(S) <= r(S)/2 for every S");
    }
    warm(matroid);
    let loops = matroid.loops();
    let mut remaining = matroid.ground().difference(loops);
    let mut back = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let estimates = estimate_toss_probabilities(matroid, z, remaining, rng, samples);
        let (e, est) = estimates
            .into_iter()
            .fold((usize::MAX, f64::NEG_INFINITY), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            });
        let sigma = (est * (1.0 - est) / samples as f64).sqrt();
        let threshold = 0.5 - 2.0 * sigma;
        if est < threshold {
            return Err(Error::Estimation {
                element: e,
                estimate: est,
                threshold,
            });
        }
        back.push(e);
        remaining.remove(e);
    }
    Ok(loops.iter().chain(back.into_iter().rev()).collect())
}
