//! Problem instances: a constraint matroid plus a sequence of arrivals.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matroid::{Matroid, WeightVector};
use crate::set::ElementSet;

/// One arriving weighted rank function `f_i(S) = max weight of an
/// independent subset of S in `matroid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub matroid: Matroid,
    /// Omitted for unit weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightVector>,
}

impl Arrival {
    pub fn unweighted(matroid: Matroid) -> Self {
        Arrival {
            matroid,
            weights: None,
        }
    }

    pub fn weighted(matroid: Matroid, weights: WeightVector) -> Self {
        Arrival {
            matroid,
            weights: Some(weights),
        }
    }

    pub fn weights(&self) -> WeightVector {
        self.weights
            .clone()
            .unwrap_or_else(|| WeightVector::unit(self.matroid.m()))
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.as_ref().is_none_or(WeightVector::is_unit)
    }

    /// `f_i(s)`.
    pub fn value(&self, s: ElementSet) -> f64 {
        match &self.weights {
            None => self.matroid.rank_of(s) as f64,
            Some(w) => self.matroid.weighted_rank_of(s, w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    m: usize,
    constraint: Matroid,
    arrivals: Vec<Arrival>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    m: usize,
    constraint: Matroid,
    arrivals: Vec<Arrival>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = crate::Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let inst = Instance::new(raw.constraint, raw.arrivals)?;
        if inst.m != raw.m {
            return invalid(format!(
                "declared m = {} but the constraint matroid has {} elements",
                raw.m, inst.m
            ));
        }
        Ok(inst)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            m: inst.m,
            constraint: inst.constraint,
            arrivals: inst.arrivals,
        }
    }
}

impl Instance {
    pub fn new(constraint: Matroid, arrivals: Vec<Arrival>) -> Result<Self> {
        let m = constraint.m();
        for (i, a) in arrivals.iter().enumerate() {
            if a.matroid.m() != m {
                return invalid(format!(
                    "arrival {i} has ground set of size {} but the constraint has {m}",
                    a.matroid.m()
                ));
            }
            if let Some(w) = &a.weights {
                if w.len() != m {
                    return invalid(format!(
                        "arrival {i} has {} weights for {m} elements",
                        w.len()
                    ));
                }
            }
        }
        Ok(Instance {
            m,
            constraint,
            arrivals,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of arrivals.
    pub fn n(&self) -> usize {
        self.arrivals.len()
    }

    pub fn constraint(&self) -> &Matroid {
        &self.constraint
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn is_unweighted(&self) -> bool {
        self.arrivals.iter().all(Arrival::is_unweighted)
    }

    pub(crate) fn require_unweighted(&self) -> Result<()> {
        if self.is_unweighted() {
            Ok(())
        } else {
            invalid("instance has non-unit weights; reduce it with the `weighted` module first")
        }
    }

    /// `Σ_i f_i(s)`.
    pub fn objective(&self, s: ElementSet) -> f64 {
        self.arrivals.iter().map(|a| a.value(s)).sum()
    }
}
