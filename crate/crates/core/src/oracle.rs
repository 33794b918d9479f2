//! Offline ground truth: exhaustive and greedy optima, feasibility checkers
//! for the two linear programs, and the per-guess decomposition of an
//! integral optimum.
//!
//! Both LPs share the objective `Σ_i Σ_e z_{i,e}` and the constraints
//!
//! 1. `x ∈ P(M)`,
//! 2. `z_i ∈ P(N_i)` for every arrival,
//! 3. `z_{i,e} <= x_e`,
//! 4. nonnegativity.
//!
//! The restricted program for a guess `alpha` adds, per element,
//! `Σ_i z_{i,e} <= alpha · x_e` and `Σ_i z_{i,e} >= alpha · x_e / 2`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fractional::{known_n_support, Alpha};
use crate::instance::Instance;
use crate::matroid::Matroid;
use crate::polytope::{self, EPS, ENUMERATION_LIMIT};
use crate::set::ElementSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OfflineSolution {
    /// Independent in the constraint matroid.
    pub set: ElementSet,
    /// `Σ_i f_i(set)`.
    pub value: f64,
    /// Per arrival, a maximum-weight independent subset of `set` in `N_i`.
    pub witnesses: Vec<ElementSet>,
}

/// Scores `set` and records greedy witnesses.
pub fn evaluate(instance: &Instance, set: ElementSet) -> OfflineSolution {
    let witnesses: Vec<ElementSet> = instance
        .arrivals()
        .iter()
        .map(|a| a.matroid.max_weight_subset(set, &a.weights()))
        .collect();
    let value = instance
        .arrivals()
        .iter()
        .zip(&witnesses)
        .map(|(a, &o)| match &a.weights {
            None => o.len() as f64,
            Some(w) => o.iter().map(|e| w[e]).sum(),
        })
        .sum();
    OfflineSolution {
        set,
        value,
        witnesses,
    }
}

fn warm_tables(instance: &Instance) {
    let _ = instance.constraint().rank_table();
    for a in instance.arrivals() {
        let _ = a.matroid.rank_table();
    }
}

/// Exhaustive optimum over the independent sets of the constraint matroid,
/// visited depth-first in lexicographic order so ties keep the
/// lexicographically smallest set.
pub fn brute_force_opt(instance: &Instance) -> Result<OfflineSolution> {
    if instance.m() > ENUMERATION_LIMIT {
        return Err(Error::Capability {
            operation: "brute-force optimum",
            m: instance.m(),
            limit: ENUMERATION_LIMIT,
        });
    }
    warm_tables(instance);
    let mut best = (instance.objective(ElementSet::EMPTY), ElementSet::EMPTY);
    let mut stack = vec![(ElementSet::EMPTY, 0usize)];
    // explicit stack in reverse child order keeps the preorder lexicographic
    while let Some((set, start)) = stack.pop() {
        for e in (start..instance.m()).rev() {
            let child = set.with(e);
            if instance.constraint().indep(child) {
                stack.push((child, e + 1));
            }
        }
        if set.is_empty() {
            continue;
        }
        let value = instance.objective(set);
        if value > best.0 + EPS {
            best = (value, set);
        }
    }
    Ok(evaluate(instance, best.1))
}

/// Greedy by marginal gain under the constraint matroid, stopping when no
/// element improves the objective. Ties go to the lower index.
pub fn greedy_opt(instance: &Instance) -> OfflineSolution {
    let constraint = instance.constraint();
    let mut set = ElementSet::EMPTY;
    let mut current = instance.objective(set);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for e in constraint.ground().difference(set) {
            let cand = set.with(e);
            if !constraint.indep(cand) {
                continue;
            }
            let value = instance.objective(cand);
            if value - current > EPS && best.is_none_or(|(_, v)| value > v) {
                best = Some((e, value));
            }
        }
        match best {
            Some((e, v)) => {
                set.insert(e);
                current = v;
            }
            None => break,
        }
    }
    evaluate(instance, set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// `x(S) <= r(S)`.
    ConstraintPolytope,
    /// `z_i(S) <= r_i(S)`.
    ArrivalPolytope,
    /// `z_{i,e} <= x_e`.
    ZAtMostX,
    Nonnegative,
    /// `Σ_i z_{i,e} <= alpha · x_e`.
    CoverageUpper,
    /// `Σ_i z_{i,e} >= alpha · x_e / 2`.
    CoverageLower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub round: Option<usize>,
    pub element: Option<usize>,
    pub witness: Option<ElementSet>,
    /// How far the constraint is exceeded.
    pub amount: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, constraint: Constraint) -> usize {
        self.violations
            .iter()
            .filter(|v| v.constraint == constraint)
            .count()
    }

    /// Violations outside `allowed`.
    pub fn excluding(&self, allowed: &[Constraint]) -> Vec<&Violation> {
        self.violations
            .iter()
            .filter(|v| !allowed.contains(&v.constraint))
            .collect()
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

fn polytope_violation(
    report: &mut ViolationReport,
    matroid: &Matroid,
    point: &[f64],
    constraint: Constraint,
    round: Option<usize>,
) -> Result<()> {
    let (amount, witness) = polytope::max_violation(matroid, point)?;
    if amount > EPS {
        report.push(Violation {
            constraint,
            round,
            element: None,
            witness: Some(witness),
            amount,
        });
    }
    for (e, &v) in point.iter().enumerate() {
        if v < -EPS {
            report.push(Violation {
                constraint: Constraint::Nonnegative,
                round,
                element: Some(e),
                witness: None,
                amount: -v,
            });
        }
    }
    Ok(())
}

/// Checks the natural LP's constraints.
pub fn check_lp1(instance: &Instance, x: &[f64], z: &[Vec<f64>]) -> Result<ViolationReport> {
    let m = instance.m();
    if x.len() != m || z.len() != instance.n() || z.iter().any(|zi| zi.len() != m) {
        return invalid(format!(
            "expected x of length {m} and {} z-vectors of length {m}",
            instance.n()
        ));
    }
    let mut report = ViolationReport::default();
    polytope_violation(&mut report, instance.constraint(), x, Constraint::ConstraintPolytope, None)?;
    for (i, (arrival, zi)) in instance.arrivals().iter().zip(z).enumerate() {
        polytope_violation(
            &mut report,
            &arrival.matroid,
            zi,
            Constraint::ArrivalPolytope,
            Some(i),
        )?;
        for e in 0..m {
            if zi[e] > x[e] + EPS {
                report.push(Violation {
                    constraint: Constraint::ZAtMostX,
                    round: Some(i),
                    element: Some(e),
                    witness: None,
                    amount: zi[e] - x[e],
                });
            }
        }
    }
    Ok(report)
}

/// Checks the restricted LP for `alpha`: everything in [`check_lp1`] plus the
/// two per-element coverage bands, reported separately.
pub fn check_lp2(
    instance: &Instance,
    alpha: Alpha,
    x: &[f64],
    z: &[Vec<f64>],
) -> Result<ViolationReport> {
    let mut report = check_lp1(instance, x, z)?;
    let a = alpha.as_f64();
    for e in 0..instance.m() {
        let total: f64 = z.iter().map(|zi| zi[e]).sum();
        if total > a * x[e] + EPS {
            report.push(Violation {
                constraint: Constraint::CoverageUpper,
                round: None,
                element: Some(e),
                witness: None,
                amount: total - a * x[e],
            });
        }
        if total < a * x[e] / 2.0 - EPS {
            report.push(Violation {
                constraint: Constraint::CoverageLower,
                round: None,
                element: Some(e),
                witness: None,
                amount: a * x[e] / 2.0 - total,
            });
        }
    }
    Ok(report)
}

/// An integral solution of the restricted LP for one guess.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lp2Solution {
    pub alpha: Alpha,
    pub x: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub objective: f64,
}

/// Splits an integral optimum into one restricted-LP solution per guess
/// `alpha ∈ {1, 2, .., 2^⌈log₂ n⌉}`: an element used by `c` witnesses goes to
/// the guess with `alpha/2 < c <= alpha`, carrying its `z` entries and its
/// `x` coordinate. Unused elements go nowhere. The objectives sum to
/// `opt.value` for unit weights.
pub fn decompose_optimal(instance: &Instance, opt: &OfflineSolution) -> Result<Vec<Lp2Solution>> {
    let (m, n) = (instance.m(), instance.n());
    if opt.witnesses.len() != n || opt.witnesses.iter().any(|o| !o.is_subset(opt.set)) {
        return invalid("witness sets must be one subset of the solution per arrival");
    }
    let mut coverage = vec![0u128; m];
    for o in &opt.witnesses {
        for e in *o {
            coverage[e] += 1;
        }
    }
    Ok(known_n_support(n)
        .into_iter()
        .map(|alpha| {
            let a = alpha.get();
            let bucket: ElementSet = (0..m)
                .filter(|&e| 2 * coverage[e] > a && coverage[e] <= a)
                .collect();
            let x: Vec<f64> = (0..m).map(|e| f64::from(u8::from(bucket.contains(e)))).collect();
            let z: Vec<Vec<f64>> = opt
                .witnesses
                .iter()
                .map(|o| {
                    (0..m)
                        .map(|e| f64::from(u8::from(bucket.contains(e) && o.contains(e))))
                        .collect()
                })
                .collect();
            let objective = z.iter().flatten().sum();
            Lp2Solution {
                alpha,
                x,
                z,
                objective,
            }
        })
        .collect())
}
