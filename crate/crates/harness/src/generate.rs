//! Random and structured instance generators.

use anyhow::{ensure, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use onlinerank::rng::{stream, Purpose};
use onlinerank::{Arrival, ElementSet, Instance, Matroid, MatroidSpec, WeightVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    RandomPartition,
    RandomUniform,
    RandomGraphic,
    MaxCoverage,
    /// m = 8, M = Uniform(8, 3), eight partition arrivals with shifting blocks.
    FixedPartition,
}

#[derive(Clone, Debug, Default)]
pub struct GenParams {
    pub m: usize,
    pub n: usize,
    /// Rank of the constraint for `random-uniform` and `max-coverage`.
    pub k: Option<usize>,
    /// Draw weights uniformly from `[1, max_weight]`.
    pub max_weight: Option<f64>,
}

pub fn generate(kind: Kind, params: &GenParams, seed: u64) -> Result<Instance> {
    let GenParams { m, n, k, max_weight } = *params;
    if kind == Kind::FixedPartition {
        ensure!(k.is_none() && max_weight.is_none(), "fixed-partition takes no k or weights");
        return Ok(fixed_partition());
    }
    ensure!((2..=64).contains(&m), "m must lie in 2..=64, got {m}");
    if let Some(k) = k {
        ensure!(k >= 1 && k <= m, "k must lie in 1..={m}, got {k}");
    }
    if let Some(w) = max_weight {
        ensure!(w.is_finite() && w >= 1.0, "max weight must be at least 1, got {w}");
    }
    let mut rng = stream(seed, kind as u128, Purpose::Generate);
    let mut inst = match kind {
        Kind::RandomPartition => {
            let constraint = partition(&mut rng, m, 1);
            let arrivals = (0..n).map(|_| Arrival::unweighted(partition(&mut rng, m, 0))).collect();
            Instance::new(constraint, arrivals)?
        }
        Kind::RandomUniform => {
            let k = k.unwrap_or_else(|| rng.gen_range(1..=m.div_ceil(2)));
            let arrivals = (0..n)
                .map(|_| Arrival::unweighted(Matroid::uniform(m, rng.gen_range(1..=m))))
                .collect();
            Instance::new(Matroid::uniform(m, k), arrivals)?
        }
        Kind::RandomGraphic => {
            let constraint = graphic(&mut rng, m);
            let arrivals = (0..n).map(|_| Arrival::unweighted(graphic(&mut rng, m))).collect();
            Instance::new(constraint, arrivals)?
        }
        Kind::MaxCoverage => {
            let k = k.unwrap_or(m.div_ceil(4));
            let sets = random_sets(&mut rng, m, n);
            max_coverage(&sets, n, k)?
        }
        Kind::FixedPartition => unreachable!(),
    };
    if let Some(top) = max_weight {
        inst = with_weights(&mut rng, &inst, top, kind == Kind::MaxCoverage)?;
    }
    Ok(inst)
}

/// Random partition matroid with nonempty blocks and caps at least `min_cap`.
pub fn partition<R: Rng + ?Sized>(rng: &mut R, m: usize, min_cap: usize) -> Matroid {
    let nb = rng.gen_range(1..=m.div_ceil(3));
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut blocks = vec![Vec::new(); nb];
    for (i, e) in order.into_iter().enumerate() {
        let b = if i < nb { i } else { rng.gen_range(0..nb) };
        blocks[b].push(e);
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    let caps = blocks
        .iter()
        .map(|b| rng.gen_range(min_cap.min(b.len())..=b.len()))
        .collect();
    Matroid::new(MatroidSpec::Partition { m, blocks, caps }).expect("valid partition")
}

/// Random graphic matroid on `m` edges without self-loops.
pub fn graphic<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matroid {
    let vertices = rng.gen_range(2..=m / 2 + 2);
    let edges = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..vertices);
            let mut b = rng.gen_range(0..vertices - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect();
    Matroid::new(MatroidSpec::Graphic { vertices, edges }).expect("valid graphic")
}

/// Minimal dependent sets, by enumeration. Exponential in `m`.
pub fn circuits(matroid: &Matroid) -> Vec<Vec<usize>> {
    let mut all: Vec<ElementSet> = matroid.ground().subsets().collect();
    all.sort_by_key(|s| s.len());
    let mut found: Vec<ElementSet> = Vec::new();
    for s in all {
        if !matroid.indep(s) && !found.iter().any(|c| c.is_subset(s)) {
            found.push(s);
        }
    }
    found.into_iter().map(|c| c.to_vec()).collect()
}

/// Explicit matroid carrying the circuits of a random graphic or partition one.
pub fn explicit<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matroid {
    let base = if rng.gen_bool(0.5) {
        graphic(rng, m)
    } else {
        partition(rng, m, 0)
    };
    Matroid::new(MatroidSpec::Explicit {
        m,
        circuits: circuits(&base),
    })
    .expect("circuits of a matroid satisfy the axioms")
}

/// Any of the four families; explicit ones are capped at 8 elements.
pub fn any_family<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matroid {
    match rng.gen_range(0..4) {
        0 => Matroid::uniform(m, rng.gen_range(0..=m)),
        1 => partition(rng, m, 0),
        2 => graphic(rng, m),
        _ if m <= 8 => explicit(rng, m),
        _ => partition(rng, m, 0),
    }
}

/// A random unweighted instance over all four families with a loopless
/// constraint and arrivals of positive rank.
pub fn mixed<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Instance {
    let constraint = loop {
        let c = any_family(rng, m);
        if c.loops().is_empty() {
            break c;
        }
    };
    let arrivals = (0..n)
        .map(|_| loop {
            let a = any_family(rng, m);
            if a.rank_of(a.ground()) > 0 {
                break Arrival::unweighted(a);
            }
        })
        .collect();
    Instance::new(constraint, arrivals).expect("consistent ground sets")
}

/// `m` random sets over `0..universe`; every element lies in at least one.
fn random_sets<R: Rng + ?Sized>(rng: &mut R, m: usize, universe: usize) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); m];
    for i in 0..universe {
        let mut hit = false;
        for set in sets.iter_mut() {
            if rng.gen_bool(0.3) {
                set.push(i);
                hit = true;
            }
        }
        if !hit {
            sets[rng.gen_range(0..m)].push(i);
        }
    }
    for set in &mut sets {
        set.sort_unstable();
    }
    sets
}

/// Coverage instance: the ground set is the sets, the constraint picks at
/// most `k` of them, and universe element `i` arrives as a partition matroid
/// with one cap-1 block holding the sets that contain `i` (cap 0 elsewhere),
/// so its rank is 1 iff a chosen set covers `i`.
pub fn max_coverage(sets: &[Vec<usize>], universe: usize, k: usize) -> Result<Instance> {
    let m = sets.len();
    ensure!(m >= 1, "need at least one set");
    let mut containing = vec![ElementSet::EMPTY; universe];
    for (s, members) in sets.iter().enumerate() {
        for &i in members {
            ensure!(i < universe, "set {s} holds {i}, outside the universe 0..{universe}");
            containing[i].insert(s);
        }
    }
    let arrivals = containing
        .into_iter()
        .map(|inside| {
            let outside = ElementSet::full(m).difference(inside);
            let mut blocks = vec![inside.to_vec()];
            let mut caps = vec![1];
            if !outside.is_empty() {
                blocks.push(outside.to_vec());
                caps.push(0);
            }
            Ok(Arrival::unweighted(Matroid::new(MatroidSpec::Partition { m, blocks, caps })?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(Matroid::uniform(m, k.min(m)), arrivals)?)
}

fn with_weights<R: Rng + ?Sized>(rng: &mut R, inst: &Instance, top: f64, constant: bool) -> Result<Instance> {
    let m = inst.m();
    let arrivals = inst
        .arrivals()
        .iter()
        .map(|a| {
            let w: Vec<f64> = if constant {
                vec![rng.gen_range(1.0..=top); m]
            } else {
                (0..m).map(|_| rng.gen_range(1.0..=top)).collect()
            };
            Ok(Arrival::weighted(a.matroid.clone(), WeightVector::new(w)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(inst.constraint().clone(), arrivals)?)
}

pub fn fixed_partition() -> Instance {
    let m = 8;
    let arrivals = (0..8)
        .map(|i| {
            let k = 2 + i % 3;
            let mut blocks = vec![Vec::new(); k];
            for e in 0..m {
                blocks[(e + i) % k].push(e);
            }
            let caps = (0..k).map(|b| if b == 0 && i % 2 == 0 { 2 } else { 1 }).collect();
            Arrival::unweighted(Matroid::new(MatroidSpec::Partition { m, blocks, caps }).expect("valid"))
        })
        .collect();
    Instance::new(Matroid::uniform(m, 3), arrivals).expect("valid")
}
