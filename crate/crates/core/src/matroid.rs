//! Matroid oracles for the four supported families.
//!
//! A [`MatroidSpec`] is the declarative, serializable description; a
//! [`Matroid`] is a validated spec with the lookup structures needed to answer
//! independence and rank queries quickly. All queries take an [`ElementSet`].

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::set::{ElementSet, MAX_GROUND};

/// Ground sets up to this size get a memoized rank table on first use.
pub const RANK_TABLE_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatroidSpec {
    /// Independent iff `|S| <= k`.
    Uniform { m: usize, k: usize },
    /// Independent iff `|S ∩ blocks[b]| <= caps[b]` for every block.
    Partition {
        m: usize,
        blocks: Vec<Vec<usize>>,
        caps: Vec<usize>,
    },
    /// Element `i` is the edge `edges[i]`; independent iff the edges form a
    /// forest. A self-loop `(v, v)` is a loop of the matroid.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Given by its circuits (minimal dependent sets).
    Explicit { m: usize, circuits: Vec<Vec<usize>> },
}

impl MatroidSpec {
    pub fn ground_size(&self) -> usize {
        match self {
            MatroidSpec::Uniform { m, .. }
            | MatroidSpec::Partition { m, .. }
            | MatroidSpec::Explicit { m, .. } => *m,
            MatroidSpec::Graphic { edges, .. } => edges.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MatroidSpec::Uniform { .. } => "uniform",
            MatroidSpec::Partition { .. } => "partition",
            MatroidSpec::Graphic { .. } => "graphic",
            MatroidSpec::Explicit { .. } => "explicit",
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Uniform {
        k: usize,
    },
    Partition {
        masks: Vec<ElementSet>,
        caps: Vec<usize>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Explicit {
        circuits: Vec<ElementSet>,
    },
}

/// A validated matroid over `{0, .., m-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatroidSpec", into = "MatroidSpec")]
pub struct Matroid {
    spec: MatroidSpec,
    m: usize,
    kind: Kind,
    rank_table: OnceLock<Box<[u8]>>,
}

impl PartialEq for Matroid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl From<Matroid> for MatroidSpec {
    fn from(m: Matroid) -> Self {
        m.spec
    }
}

impl TryFrom<MatroidSpec> for Matroid {
    type Error = Error;

    fn try_from(spec: MatroidSpec) -> Result<Self> {
        Matroid::new(spec)
    }
}


struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl Matroid {
    pub fn new(spec: MatroidSpec) -> Result<Self> {
        let m = spec.ground_size();
        if m > MAX_GROUND {
            return invalid(format!("ground set of size {m} exceeds {MAX_GROUND}"));
        }
        let kind = match &spec {
            MatroidSpec::Uniform { k, .. } => Kind::Uniform { k: *k },
            MatroidSpec::Partition { blocks, caps, .. } => {
                if blocks.len() != caps.len() {
                    return invalid(format!(
                        "partition has {} blocks but {} caps",
                        blocks.len(),
                        caps.len()
                    ));
                }
                let mut block_of = vec![usize::MAX; m];
                let mut masks = Vec::with_capacity(blocks.len());
                for (b, block) in blocks.iter().enumerate() {
                    masks.push(ElementSet::from_indices(block, m)?);
                    for &e in block {
                        if block_of[e] != usize::MAX {
                            return invalid(format!("element {e} appears in more than one block"));
                        }
                        block_of[e] = b;
                    }
                }
                if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
                    return invalid(format!("element {e} is not covered by any block"));
                }
                Kind::Partition {
                    masks,
                    caps: caps.clone(),
                }
            }
            MatroidSpec::Graphic { vertices, edges } => {
                if let Some((i, _)) = edges
                    .iter()
                    .enumerate()
                    .find(|(_, &(u, v))| u >= *vertices || v >= *vertices)
                {
                    return invalid(format!("edge {i} has an endpoint outside 0..{vertices}"));
                }
                Kind::Graphic {
                    vertices: *vertices,
                    edges: edges.clone(),
                }
            }
            MatroidSpec::Explicit { circuits, .. } => {
                let circuits = circuits
                    .iter()
                    .map(|c| ElementSet::from_indices(c, m))
                    .collect::<Result<Vec<_>>>()?;
                validate_circuits(&circuits)?;
                Kind::Explicit { circuits }
            }
        };
        Ok(Matroid {
            spec,
            m,
            kind,
            rank_table: OnceLock::new(),
        })
    }

    pub fn uniform(m: usize, k: usize) -> Self {
        Matroid::new(MatroidSpec::Uniform { m, k }).expect("uniform matroid is always valid")
    }

    pub fn spec(&self) -> &MatroidSpec {
        &self.spec
    }

    /// Ground-set size.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ground(&self) -> ElementSet {
        ElementSet::full(self.m)
    }

    /// True for families whose polytope has a closed form (uniform, partition).
    pub fn has_closed_form(&self) -> bool {
        matches!(self.kind, Kind::Uniform { .. } | Kind::Partition { .. })
    }

    /// Capacity structure of a closed-form family: `(block mask, cap)` pairs
    /// whose product of uniform matroids is this matroid.
    pub(crate) fn closed_form_blocks(&self) -> Option<Vec<(ElementSet, usize)>> {
        match &self.kind {
            Kind::Uniform { k } => Some(vec![(self.ground(), *k)]),
            Kind::Partition { masks, caps, .. } => {
                Some(masks.iter().copied().zip(caps.iter().copied()).collect())
            }
            _ => None,
        }
    }

    fn check(&self, s: ElementSet) -> Result<()> {
        if s.within(self.m) {
            Ok(())
        } else {
            let bad = s.difference(self.ground()).iter().next().unwrap_or(0);
            invalid(format!(
                "element {bad} out of range for ground set of size {}",
                self.m
            ))
        }
    }

    pub fn is_independent(&self, s: ElementSet) -> Result<bool> {
        self.check(s)?;
        Ok(self.indep(s))
    }

    pub fn rank(&self, s: ElementSet) -> Result<usize> {
        self.check(s)?;
        Ok(self.rank_of(s))
    }

    pub fn span(&self, s: ElementSet) -> Result<ElementSet> {
        self.check(s)?;
        Ok(self.span_of(s))
    }

    pub fn weighted_rank(&self, s: ElementSet, w: &WeightVector) -> Result<f64> {
        self.check(s)?;
        self.check_weights(w)?;
        Ok(self.weighted_rank_of(s, w))
    }

    /// Maximum-weight basis by the matroid greedy, ties broken towards the
    /// lower index.
    pub fn max_weight_basis(&self, w: &WeightVector) -> Result<ElementSet> {
        self.check_weights(w)?;
        Ok(self.max_weight_subset(self.ground(), w))
    }

    fn check_weights(&self, w: &WeightVector) -> Result<()> {
        if w.len() != self.m {
            return invalid(format!(
                "weight vector has length {} but ground set has size {}",
                w.len(),
                self.m
            ));
        }
        Ok(())
    }

    /// Independence test without range checking.
    pub fn indep(&self, s: ElementSet) -> bool {
        debug_assert!(s.within(self.m));
        match &self.kind {
            Kind::Uniform { k } => s.len() <= *k,
            Kind::Partition { masks, caps, .. } => masks
                .iter()
                .zip(caps)
                .all(|(b, &c)| s.intersection(*b).len() <= c),
            Kind::Graphic { vertices, edges } => {
                let mut dsu = Dsu::new(*vertices);
                s.iter().all(|e| dsu.union(edges[e].0, edges[e].1))
            }
            Kind::Explicit { circuits } => !circuits.iter().any(|c| c.is_subset(s)),
        }
    }

    /// Rank without range checking; uses the memoized table when present.
    pub fn rank_of(&self, s: ElementSet) -> usize {
        debug_assert!(s.within(self.m));
        if let Some(table) = self.rank_table.get() {
            return table[s.bits() as usize] as usize;
        }
        self.rank_direct(s)
    }

    fn rank_direct(&self, s: ElementSet) -> usize {
        match &self.kind {
            Kind::Uniform { k } => s.len().min(*k),
            Kind::Partition { masks, caps, .. } => masks
                .iter()
                .zip(caps)
                .map(|(b, &c)| s.intersection(*b).len().min(c))
                .sum(),
            Kind::Graphic { vertices, edges } => {
                let mut dsu = Dsu::new(*vertices);
                s.iter().filter(|&e| dsu.union(edges[e].0, edges[e].1)).count()
            }
            Kind::Explicit { .. } => self.greedy_rank(s),
        }
    }

    /// Rank by greedy augmentation through the independence oracle alone.
    pub fn greedy_rank(&self, s: ElementSet) -> usize {
        let mut basis = ElementSet::EMPTY;
        for e in s {
            if self.indep(basis.with(e)) {
                basis.insert(e);
            }
        }
        basis.len()
    }

    /// Full rank table indexed by bitmask, built on first call.
    ///
    /// Returns a capability error above [`RANK_TABLE_LIMIT`].
    pub fn rank_table(&self) -> Result<&[u8]> {
        if self.m > RANK_TABLE_LIMIT {
            return Err(Error::Capability {
                operation: "rank table",
                m: self.m,
                limit: RANK_TABLE_LIMIT,
            });
        }
        Ok(self.rank_table.get_or_init(|| {
            (0u64..1 << self.m)
                .map(|bits| self.rank_direct(ElementSet::from_bits(bits)) as u8)
                .collect()
        }))
    }

    pub fn span_of(&self, s: ElementSet) -> ElementSet {
        let r = self.rank_of(s);
        let outside = self.ground().difference(s);
        let mut closure = s;
        for e in outside {
            if self.rank_of(s.with(e)) == r {
                closure.insert(e);
            }
        }
        closure
    }

    pub fn is_loop(&self, e: usize) -> bool {
        !self.indep(ElementSet::singleton(e))
    }

    pub fn loops(&self) -> ElementSet {
        (0..self.m).filter(|&e| self.is_loop(e)).collect()
    }

    pub fn weighted_rank_of(&self, s: ElementSet, w: &WeightVector) -> f64 {
        self.max_weight_subset(s, w).iter().map(|e| w[e]).sum()
    }

    /// Maximum-weight independent subset of `s` by the matroid greedy.
    /// Zero-weight elements are still added when independent, so the result
    /// is a basis of `s`.
    pub fn max_weight_subset(&self, s: ElementSet, w: &WeightVector) -> ElementSet {
        let mut order: Vec<usize> = s.to_vec();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        let mut basis = ElementSet::EMPTY;
        for e in order {
            if self.indep(basis.with(e)) {
                basis.insert(e);
            }
        }
        basis
    }

    /// The deletion `M \ d` kept on the same ground set: every element of `d`
    /// becomes a loop, ranks of sets avoiding `d` are unchanged.
    pub fn delete(&self, d: ElementSet) -> Matroid {
        let d = d.intersection(self.ground());
        let m = self.m;
        let spec = match &self.spec {
            MatroidSpec::Uniform { k, .. } => {
                let keep = self.ground().difference(d);
                let mut blocks = vec![keep.to_vec()];
                let mut caps = vec![*k];
                if !d.is_empty() {
                    blocks.push(d.to_vec());
                    caps.push(0);
                }
                MatroidSpec::Partition { m, blocks, caps }
            }
            MatroidSpec::Partition { blocks, caps, .. } => {
                let mut nb: Vec<Vec<usize>> = blocks
                    .iter()
                    .map(|b| b.iter().copied().filter(|&e| !d.contains(e)).collect())
                    .collect();
                let mut nc = caps.clone();
                if !d.is_empty() {
                    nb.push(d.to_vec());
                    nc.push(0);
                }
                MatroidSpec::Partition {
                    m,
                    blocks: nb,
                    caps: nc,
                }
            }
            MatroidSpec::Graphic { vertices, edges } => MatroidSpec::Graphic {
                vertices: *vertices,
                edges: edges
                    .iter()
                    .enumerate()
                    .map(|(i, &(u, v))| if d.contains(i) { (u, u) } else { (u, v) })
                    .collect(),
            },
            MatroidSpec::Explicit { circuits, .. } => {
                let mut kept: Vec<Vec<usize>> = circuits
                    .iter()
                    .filter(|c| c.iter().all(|&e| !d.contains(e)))
                    .cloned()
                    .collect();
                kept.extend(d.iter().map(|e| vec![e]));
                MatroidSpec::Explicit { m, circuits: kept }
            }
        };
        Matroid::new(spec).expect("deletion of a valid matroid is valid")
    }
}

/// Circuit axioms: nonempty, no circuit contains another, weak elimination.
fn validate_circuits(circuits: &[ElementSet]) -> Result<()> {
    if circuits.iter().any(|c| c.is_empty()) {
        return invalid("the empty set cannot be a circuit");
    }
    for (i, &a) in circuits.iter().enumerate() {
        for (j, &b) in circuits.iter().enumerate() {
            if i != j && a.is_subset(b) {
                return invalid(format!("circuit {a:?} is contained in circuit {b:?}"));
            }
        }
    }
    for (i, &a) in circuits.iter().enumerate() {
        for &b in &circuits[i + 1..] {
            let union = a.union(b);
            for e in a.intersection(b) {
                let rest = union.without(e);
                if !circuits.iter().any(|c| c.is_subset(rest)) {
                    return invalid(format!(
                        "circuits {a:?} and {b:?} violate elimination on element {e}"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Nonnegative per-element weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some((e, v)) = w.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return invalid(format!("weight of element {e} is {v}; weights must be finite and >= 0"));
        }
        Ok(WeightVector(w))
    }

    pub fn unit(m: usize) -> Self {
        WeightVector(vec![1.0; m])
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&v| v == 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}
