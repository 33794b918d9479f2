#![allow(dead_code)]

use onlinerank::{Arrival, ElementSet, Instance, Matroid, MatroidSpec, WeightVector};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn set(v: &[usize]) -> ElementSet {
    v.iter().copied().collect()
}

pub fn random_uniform<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    Matroid::new(MatroidSpec::Uniform {
        m,
        k: rng.gen_range(0..=m),
    })
    .unwrap()
}

pub fn random_partition<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    let nb = rng.gen_range(1..=m.clamp(1, 4));
    let mut blocks = vec![Vec::new(); nb];
    for e in 0..m {
        blocks[rng.gen_range(0..nb)].push(e);
    }
    let caps = blocks.iter().map(|b| rng.gen_range(0..=b.len().max(1))).collect();
    Matroid::new(MatroidSpec::Partition { m, blocks, caps }).unwrap()
}

pub fn random_graphic<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    let vertices = rng.gen_range(2..=(m / 2 + 2));
    let edges = (0..m)
        .map(|_| (rng.gen_range(0..vertices), rng.gen_range(0..vertices)))
        .collect();
    Matroid::new(MatroidSpec::Graphic { vertices, edges }).unwrap()
}

/// Circuits of `matroid` by enumeration: minimal dependent sets.
pub fn circuits(matroid: &Matroid) -> Vec<Vec<usize>> {
    let mut found: Vec<ElementSet> = Vec::new();
    let mut all: Vec<ElementSet> = matroid.ground().subsets().collect();
    all.sort_by_key(|s| s.len());
    for s in all {
        if !matroid.indep(s) && !found.iter().any(|c| c.is_subset(s)) {
            found.push(s);
        }
    }
    found.into_iter().map(|c| c.to_vec()).collect()
}

/// An explicit matroid with the circuits of a random graphic or partition one.
pub fn random_explicit<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    let base = if rng.gen_bool(0.5) {
        random_graphic(rng, m)
    } else {
        random_partition(rng, m)
    };
    Matroid::new(MatroidSpec::Explicit {
        m,
        circuits: circuits(&base),
    })
    .unwrap()
}

pub fn random_matroid<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    match rng.gen_range(0..4) {
        0 => random_uniform(rng, m),
        1 => random_partition(rng, m),
        2 => random_graphic(rng, m),
        _ => random_explicit(rng, m.min(8)),
    }
}

/// Same as [`random_matroid`] but never rank zero overall.
pub fn random_loopless_ish<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    loop {
        let mm = random_matroid(rng, m);
        if mm.m() == m && mm.rank_of(mm.ground()) > 0 {
            return mm;
        }
    }
}

pub fn random_loopless<R: Rng>(rng: &mut R, m: usize) -> Matroid {
    loop {
        let mm = random_matroid(rng, m);
        if mm.m() == m && mm.loops().is_empty() {
            return mm;
        }
    }
}

/// Loopless constraint, so the starting point `1/m²` lies in its polytope.
pub fn random_instance<R: Rng>(rng: &mut R, m: usize, n: usize) -> Instance {
    let constraint = random_loopless(rng, m);
    let arrivals = (0..n)
        .map(|_| Arrival::unweighted(random_loopless_ish(rng, m)))
        .collect();
    Instance::new(constraint, arrivals).unwrap()
}

pub fn random_point_in<R: Rng>(rng: &mut R, matroid: &Matroid) -> Vec<f64> {
    // convex combination of a few random independent sets
    let k = rng.gen_range(1..=4);
    let mut x = vec![0.0; matroid.m()];
    let mut weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    for w in weights {
        let mut order: Vec<usize> = (0..matroid.m()).collect();
        order.shuffle(rng);
        let mut indep = ElementSet::EMPTY;
        for e in order {
            if rng.gen_bool(0.7) && matroid.indep(indep.with(e)) {
                indep.insert(e);
            }
        }
        for e in indep {
            x[e] += w;
        }
    }
    x
}

/// m = 8, M = Uniform(8, 3), eight partition arrivals with shifting blocks.
pub fn fixed_partition_instance() -> Instance {
    let m = 8;
    let arrivals = (0..8)
        .map(|i| {
            let k = 2 + i % 3;
            let mut blocks = vec![Vec::new(); k];
            for e in 0..m {
                blocks[(e + i) % k].push(e);
            }
            let caps = (0..k).map(|b| if b == 0 && i % 2 == 0 { 2 } else { 1 }).collect();
            Arrival::unweighted(Matroid::new(MatroidSpec::Partition { m, blocks, caps }).unwrap())
        })
        .collect();
    Instance::new(Matroid::uniform(m, 3), arrivals).unwrap()
}

/// Like [`random_instance`] with per-arrival weights in `[0.25, max_weight]`
/// and roughly one zero in ten.
pub fn random_weighted_instance<R: Rng>(rng: &mut R, m: usize, n: usize, max_weight: f64) -> Instance {
    loop {
        let constraint = random_loopless(rng, m);
        let arrivals = (0..n)
            .map(|_| {
                let w = (0..m)
                    .map(|_| {
                        if rng.gen_bool(0.1) {
                            0.0
                        } else {
                            rng.gen_range(0.25..=max_weight)
                        }
                    })
                    .collect();
                Arrival::weighted(random_loopless_ish(rng, m), WeightVector::new(w).unwrap())
            })
            .collect();
        let inst = Instance::new(constraint, arrivals).unwrap();
        if onlinerank::weighted::weight_stats(&inst).is_ok() {
            return inst;
        }
    }
}
