//! Queries over the matroid polytope `P(M) = {x >= 0 : x(S) <= r(S) for all S}`.
//!
//! Uniform and partition matroids use closed forms at any ground-set size.
//! Graphic and explicit matroids are handled by exhaustive enumeration of
//! subsets, capped at [`ENUMERATION_LIMIT`] elements.

use std::ops::Deref;

use crate::error::{invalid, Error, Result};
use crate::matroid::Matroid;
use crate::set::ElementSet;

/// Absolute tolerance for every tightness and feasibility comparison.
pub const EPS: f64 = 1e-9;

/// Largest ground set the exhaustive paths will enumerate.
pub const ENUMERATION_LIMIT: usize = 16;

/// A fractional point with every coordinate in `[0, 1 + EPS]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracPoint(Vec<f64>);

impl FracPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some((e, v)) = x
            .iter()
            .enumerate()
            .find(|(_, &v)| !(0.0..=1.0 + EPS).contains(&v))
        {
            return invalid(format!("coordinate {e} is {v}, outside [0, 1]"));
        }
        Ok(FracPoint(x))
    }

    pub fn zeros(m: usize) -> Self {
        FracPoint(vec![0.0; m])
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Sum over the elements of `s`.
    pub fn sum_over(&self, s: ElementSet) -> f64 {
        sum_over(&self.0, s)
    }

    pub(crate) fn set(&mut self, e: usize, v: f64) {
        self.0[e] = v;
    }
}

impl Deref for FracPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn sum_over(x: &[f64], s: ElementSet) -> f64 {
    s.iter().map(|e| x[e]).sum()
}

fn check_dims(matroid: &Matroid, x: &[f64]) -> Result<()> {
    if x.len() != matroid.m() {
        return invalid(format!(
            "point has {} coordinates but the matroid has {} elements",
            x.len(),
            matroid.m()
        ));
    }
    Ok(())
}

fn check_element(matroid: &Matroid, e: usize) -> Result<()> {
    if e >= matroid.m() {
        return invalid(format!("element {e} out of range for ground set of size {}", matroid.m()));
    }
    Ok(())
}

fn require_enumerable(matroid: &Matroid, operation: &'static str) -> Result<()> {
    if matroid.m() > ENUMERATION_LIMIT {
        return Err(Error::Capability {
            operation,
            m: matroid.m(),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// `x(S)` for every `S ⊆ E`, indexed by bitmask.
pub(crate) fn subset_sums(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let mut sums = vec![0.0; 1 << m];
    for bits in 1usize..1 << m {
        let low = bits.trailing_zeros() as usize;
        sums[bits] = sums[bits & (bits - 1)] + x[low];
    }
    sums
}

/// Largest `x(S) - r(S)` over all `S`, with a maximizing set. Never negative
/// since `S = ∅` contributes zero.
pub fn max_violation(matroid: &Matroid, x: &[f64]) -> Result<(f64, ElementSet)> {
    check_dims(matroid, x)?;
    if let Some(blocks) = matroid.closed_form_blocks() {
        let mut total = 0.0;
        let mut witness = ElementSet::EMPTY;
        for (block, cap) in blocks {
            let mut members = block.to_vec();
            members.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
            let (mut best, mut best_len, mut prefix) = (0.0, 0, 0.0);
            for (t, &e) in members.iter().enumerate() {
                prefix += x[e];
                let v = prefix - (t + 1).min(cap) as f64;
                if v > best {
                    best = v;
                    best_len = t + 1;
                }
            }
            total += best;
            witness = witness.union(members[..best_len].iter().copied().collect());
        }
        return Ok((total, witness));
    }
    require_enumerable(matroid, "polytope membership")?;
    let ranks = matroid.rank_table()?;
    let sums = subset_sums(x);
    let mut best = (0.0, ElementSet::EMPTY);
    for (bits, (&s, &r)) in sums.iter().zip(ranks.iter()).enumerate() {
        let v = s - r as f64;
        if v > best.0 {
            best = (v, ElementSet::from_bits(bits as u64));
        }
    }
    Ok(best)
}

/// `x ∈ P(M)` within [`EPS`].
pub fn in_polytope(matroid: &Matroid, x: &[f64]) -> Result<bool> {
    check_dims(matroid, x)?;
    if x.iter().any(|&v| v < -EPS) {
        return Ok(false);
    }
    Ok(max_violation(matroid, x)?.0 <= EPS)
}

/// `min over S ∋ e of r(S) - x(S \ {e})`: the largest value `x_e` can be
/// raised to while staying in the polytope. Closed forms assume `x ∈ [0,1]^m`.
pub fn headroom(matroid: &Matroid, x: &[f64], e: usize) -> Result<f64> {
    check_dims(matroid, x)?;
    check_element(matroid, e)?;
    if let Some(blocks) = matroid.closed_form_blocks() {
        let mut deficit = 0.0;
        let mut own = 0.0;
        for (block, cap) in blocks {
            let block_rank = cap.min(block.len()) as f64;
            if block.contains(e) {
                let others = sum_over(x, block.without(e));
                own = (cap.min(1) as f64).min(block_rank - others);
            } else {
                // other blocks only lower the minimum when x overfills them
                deficit += (block_rank - sum_over(x, block)).min(0.0);
            }
        }
        return Ok(own + deficit);
    }
    headroom_exhaustive(matroid, x, e)
}

/// Headroom by enumerating every `S ∋ e`, for any family.
pub fn headroom_exhaustive(matroid: &Matroid, x: &[f64], e: usize) -> Result<f64> {
    check_dims(matroid, x)?;
    check_element(matroid, e)?;
    require_enumerable(matroid, "headroom")?;
    let ranks = matroid.rank_table()?;
    let sums = subset_sums(x);
    let rest = matroid.ground().without(e);
    let bit = 1usize << e;
    let mut best = f64::INFINITY;
    for t in rest.subsets() {
        let t = t.bits() as usize;
        let v = ranks[t | bit] as f64 - sums[t];
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// `min over S ∋ e of r(S) - x(S)`, i.e. `headroom(e) - x_e`. At most
/// [`EPS`] means `e` lies in a tight set.
pub fn min_slack(matroid: &Matroid, x: &[f64], e: usize) -> Result<f64> {
    Ok(headroom(matroid, x, e)? - x[e])
}

/// `x(S) = r(S)` within [`EPS`].
pub fn is_tight(matroid: &Matroid, x: &[f64], s: ElementSet) -> bool {
    (matroid.rank_of(s) as f64 - sum_over(x, s)).abs() <= EPS
}

/// The union of all tight sets, itself tight by uncrossing. `∅` when no
/// nonempty set is tight.
pub fn maximal_tight_set(matroid: &Matroid, x: &[f64]) -> Result<ElementSet> {
    check_dims(matroid, x)?;
    if let Some(blocks) = matroid.closed_form_blocks() {
        let mut tight = ElementSet::EMPTY;
        for (block, cap) in blocks {
            let block_rank = cap.min(block.len()) as f64;
            if sum_over(x, block) >= block_rank - EPS {
                tight = tight.union(block);
            } else if cap > 0 {
                tight = tight.union(block.iter().filter(|&e| x[e] >= 1.0 - EPS).collect());
            }
        }
        return Ok(tight);
    }
    maximal_tight_set_exhaustive(matroid, x)
}

pub fn maximal_tight_set_exhaustive(matroid: &Matroid, x: &[f64]) -> Result<ElementSet> {
    check_dims(matroid, x)?;
    require_enumerable(matroid, "maximal tight set")?;
    let ranks = matroid.rank_table()?;
    let sums = subset_sums(x);
    let mut union = ElementSet::EMPTY;
    for (bits, (&s, &r)) in sums.iter().zip(ranks.iter()).enumerate() {
        if r as f64 - s <= EPS {
            union = union.union(ElementSet::from_bits(bits as u64));
        }
    }
    Ok(union)
}
