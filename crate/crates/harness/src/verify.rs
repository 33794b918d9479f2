//! Invariant suites over seeded random instances. Each suite reports, per
//! check, how many cases it examined, how many failed and the smallest
//! slack seen (negative means violated).

use std::collections::BTreeMap;
use std::fmt;

use anyhow::Result;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use onlinerank::covering::{
    exact_toss_probabilities, first_fit_cover, last_element_order, sample_set, sequential_rounds_cover,
};
use onlinerank::fractional::{known_n_support, run_algg, Alpha, ElementOrder, GuessScheme};
use onlinerank::invariants::{
    rounding_faults, size_to_profit_slacks, update_count_violations, update_ratio_check,
    SIZE_TO_PROFIT_CONSTANT,
};
use onlinerank::oracle::{brute_force_opt, check_lp2, decompose_optimal, greedy_opt, Constraint};
use onlinerank::rng::{derive_seed, stream, Purpose, StreamRng};
use onlinerank::rounding::{round_fractional, CoinMode};
use onlinerank::weighted::{run_weighted, verify_bucket_bound, weight_stats};
use onlinerank::polytope::EPS;
use onlinerank::{Arrival, ElementSet, Instance, Matroid, WeightVector};

use crate::generate::{any_family, explicit, fixed_partition, graphic, mixed, partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MatroidAxioms,
    Lemma4Feasibility,
    Lemma5Bound,
    Lemma7Size,
    Lemma8Ratio,
    Lemma9Cover,
    Lemma3Decomposition,
    WeightedBound,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::MatroidAxioms,
        Suite::Lemma4Feasibility,
        Suite::Lemma5Bound,
        Suite::Lemma7Size,
        Suite::Lemma8Ratio,
        Suite::Lemma9Cover,
        Suite::Lemma3Decomposition,
        Suite::WeightedBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MatroidAxioms => "matroid-axioms",
            Suite::Lemma4Feasibility => "lemma4-feasibility",
            Suite::Lemma5Bound => "lemma5-bound",
            Suite::Lemma7Size => "lemma7-size",
            Suite::Lemma8Ratio => "lemma8-ratio",
            Suite::Lemma9Cover => "lemma9-cover",
            Suite::Lemma3Decomposition => "lemma3-decomposition",
            Suite::WeightedBound => "weighted-bound",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    pub worst_slack: Option<f64>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            violations: 0,
            worst_slack: None,
        }
    }

    /// Records one case with its slack; negative slack is a violation.
    fn slack(&mut self, slack: f64) {
        self.cases += 1;
        if slack < 0.0 {
            self.violations += 1;
        }
        self.worst_slack = Some(self.worst_slack.map_or(slack, |w| w.min(slack)));
    }

    fn outcome(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0 && c.cases > 0)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", if self.passed() { "PASS" } else { "FAIL" }, self.suite)?;
        for c in &self.checks {
            let slack = c.worst_slack.map_or("-".to_string(), |s| format!("{s:.3e}"));
            writeln!(
                f,
                "  {:<28} cases={:<8} violations={:<6} worst_slack={slack}",
                c.name, c.cases, c.violations
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Constant in the size-to-profit bound; lowering it must break the suite.
    pub lemma5_constant: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 2024,
            lemma5_constant: SIZE_TO_PROFIT_CONSTANT,
        }
    }
}

fn rng_for(config: &VerifyConfig, suite: Suite) -> StreamRng {
    stream(config.seed, suite as u128, Purpose::Generate)
}

pub fn run(suite: Suite, config: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    if suite == Suite::All {
        return Suite::EACH.iter().map(|&s| run_one(s, config)).collect();
    }
    Ok(vec![run_one(suite, config)?])
}

pub fn run_one(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::MatroidAxioms => matroid_axioms(config),
        Suite::Lemma4Feasibility => lemma4(config)?,
        Suite::Lemma5Bound => lemma5(config)?,
        Suite::Lemma7Size => lemma7(config)?,
        Suite::Lemma8Ratio => lemma8(config)?,
        Suite::Lemma9Cover => lemma9(config)?,
        Suite::Lemma3Decomposition => lemma3(config)?,
        Suite::WeightedBound => weighted(config)?,
        Suite::All => unreachable!("expanded by run"),
    };
    Ok(SuiteReport {
        suite: suite.name(),
        checks,
    })
}

fn matroid_axioms(config: &VerifyConfig) -> Vec<Check> {
    let mut rng = rng_for(config, Suite::MatroidAxioms);
    let (mut hereditary, mut exchange, mut submodular, mut rank) = (
        Check::new("hereditary"),
        Check::new("exchange"),
        Check::new("rank-submodular"),
        Check::new("rank-matches-greedy"),
    );
    let m = 8;
    let full = 1u64 << m;
    for family in 0..4 {
        for _ in 0..3 {
            let matroid = match family {
                0 => Matroid::uniform(m, rng.gen_range(0..=m)),
                1 => partition(&mut rng, m, 0),
                2 => graphic(&mut rng, m),
                _ => explicit(&mut rng, m),
            };
            let table = matroid.rank_table().expect("m = 8 is tabulated");
            let indep: Vec<ElementSet> = (0..full)
                .map(ElementSet::from_bits)
                .filter(|&s| matroid.indep(s))
                .collect();
            for &s in &indep {
                hereditary.outcome(s.iter().all(|e| matroid.indep(s.without(e))));
            }
            for &a in &indep {
                for &b in &indep {
                    if a.len() < b.len() {
                        exchange.outcome(b.difference(a).iter().any(|e| matroid.indep(a.with(e))));
                    }
                }
            }
            for a in 0..full {
                let s = ElementSet::from_bits(a);
                rank.outcome(table[a as usize] as usize == matroid.greedy_rank(s));
                for b in 0..full {
                    let r = |bits: u64| table[bits as usize] as f64;
                    submodular.slack(r(a) + r(b) - r(a | b) - r(a & b));
                }
            }
        }
    }
    vec![hereditary, exchange, submodular, rank]
}

/// The shared workload of the fractional suites: 200 mixed-family
/// instances with `m <= 12`, `n <= 16`, run at every known-n guess.
fn fractional_runs<F>(config: &VerifyConfig, mut visit: F) -> Result<()>
where
    F: FnMut(&Instance, &onlinerank::fractional::AlgGState) -> Result<()>,
{
    let mut rng = stream(config.seed, 0xf4, Purpose::Generate);
    for _ in 0..200 {
        let m = rng.gen_range(2..=12);
        let n = rng.gen_range(1..=16);
        let inst = mixed(&mut rng, m, n);
        for alpha in known_n_support(n) {
            let state = run_algg(&inst, alpha, ElementOrder::Ascending)?;
            visit(&inst, &state)?;
        }
    }
    Ok(())
}

fn lemma4(config: &VerifyConfig) -> Result<Vec<Check>> {
    let classes = [
        (Constraint::ConstraintPolytope, "x-in-constraint-polytope"),
        (Constraint::ArrivalPolytope, "z-in-arrival-polytopes"),
        (Constraint::ZAtMostX, "z-at-most-x"),
        (Constraint::Nonnegative, "nonnegative"),
    ];
    let mut checks: Vec<Check> = classes.iter().map(|&(_, name)| Check::new(name)).collect();
    let mut coverage = Check::new("coverage-upper");
    let mut half = Check::new("z-at-most-half-x");
    fractional_runs(config, |inst, state| {
        let z = state.z_dense();
        let report = check_lp2(inst, state.alpha(), state.x(), &z)?;
        for (check, &(class, _)) in checks.iter_mut().zip(&classes) {
            let worst = report
                .violations
                .iter()
                .filter(|v| v.constraint == class)
                .map(|v| v.amount)
                .fold(0.0, f64::max);
            check.slack(0.0 - worst);
        }
        let alpha = state.alpha().as_f64();
        for e in 0..inst.m() {
            let total: f64 = z.iter().map(|zi| zi[e]).sum();
            coverage.slack(alpha * state.x()[e] - total + EPS);
            for zi in &z {
                half.slack(state.x()[e] / 2.0 - zi[e] + 1e-12);
            }
        }
        Ok(())
    })?;
    checks.push(coverage);
    checks.push(half);
    Ok(checks)
}

fn lemma5(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut check = Check::new("size-to-profit");
    fractional_runs(config, |_, state| {
        for s in size_to_profit_slacks(state, config.lemma5_constant) {
            check.slack(s.slack);
        }
        Ok(())
    })?;
    Ok(vec![check])
}

fn lemma8(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut ratio = Check::new("update-ratio");
    let mut count = Check::new("update-count");
    fractional_runs(config, |_, state| {
        let (violations, margin) = update_ratio_check(state);
        ratio.cases += state.trace().len();
        ratio.violations += violations.len();
        if margin.is_finite() {
            ratio.worst_slack = Some(ratio.worst_slack.map_or(margin, |w| w.min(margin)));
        }
        count.outcome(update_count_violations(state).is_empty());
        Ok(())
    })?;
    Ok(vec![ratio, count])
}

fn lemma7(config: &VerifyConfig) -> Result<Vec<Check>> {
    let inst = fixed_partition();
    let mut size = Check::new("mean-size-vs-eighth-mass");
    let mut safety = Check::new("rounding-safety");
    for k in 0..4 {
        let alpha = Alpha::pow2(k);
        let state = run_algg(&inst, alpha, ElementOrder::Ascending)?;
        let target = state.x().iter().sum::<f64>() / 8.0;
        let trials = 10_000u64;
        let mut sizes = Vec::with_capacity(trials as usize);
        for t in 0..trials {
            let seed = derive_seed(config.seed, t);
            let mut coins = stream(seed, alpha.get(), Purpose::Rounding);
            let trace = round_fractional(&inst, &state, &mut coins, CoinMode::Random)?;
            safety.outcome(rounding_faults(&inst, &state, &trace).is_empty());
            sizes.push(trace.final_set().len() as f64);
        }
        let mean = sizes.iter().sum::<f64>() / trials as f64;
        let var = sizes.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        size.slack(mean - (target - 3.0 * se));
    }
    Ok(vec![size, safety])
}

/// A point of the polytope: a random convex combination of independent sets.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, matroid: &Matroid) -> Vec<f64> {
    let k = rng.gen_range(1..=4);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
    let total: f64 = weights.iter().sum();
    let mut x = vec![0.0; matroid.m()];
    for w in weights {
        let mut order: Vec<usize> = (0..matroid.m()).collect();
        order.shuffle(rng);
        let mut s = ElementSet::EMPTY;
        for e in order {
            if rng.gen_bool(0.8) && matroid.indep(s.with(e)) {
                s.insert(e);
            }
        }
        for e in s {
            x[e] += w / total;
        }
    }
    x
}

fn half_point<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (Matroid, Vec<f64>) {
    let matroid = any_family(rng, m);
    let z = random_point(rng, &matroid).into_iter().map(|v| v / 2.0).collect();
    (matroid, z)
}

/// Pearson statistic with bins of expected count below 5 pooled.
fn chi_square_p(observed: &BTreeMap<u64, usize>, expected: &BTreeMap<u64, f64>, total: usize) -> f64 {
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (k, p) in expected {
        let e = p * total as f64;
        let o = observed.get(k).copied().unwrap_or(0) as f64;
        if e < 5.0 {
            pooled_o += o;
            pooled_e += e;
        } else {
            stat += (o - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        bins += 1;
    }
    if bins < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((bins - 1) as f64).expect("positive dof").cdf(stat)
}

fn lemma9(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = rng_for(config, Suite::Lemma9Cover);
    let mut cover = Check::new("first-fit-within-bound");
    let mut envelope = Check::new("first-fit-envelope");
    for _ in 0..20 {
        let m = rng.gen_range(2..=12);
        let (matroid, z) = half_point(&mut rng, m);
        let bound = 4.0 * ((m as f64).log2() + 16f64.log2()) + 2.0;
        let rank = matroid.rank_of(matroid.ground()).max(1);
        let samples = 10_000;
        let mut within = 0;
        for _ in 0..samples {
            let d = sample_set(&z, &mut rng);
            let c = first_fit_cover(&matroid, d)?;
            let parts = c.parts.len();
            envelope.outcome(
                parts >= d.len().div_ceil(rank)
                    && parts <= d.len()
                    && c.parts.iter().all(|p| matroid.indep(*p)),
            );
            if parts as f64 <= bound {
                within += 1;
            }
        }
        cover.slack(within as f64 / samples as f64 - 0.99);
    }

    let mut equivalence = Check::new("rounds-union-chi-square");
    for _ in 0..5 {
        let m = rng.gen_range(2..=6);
        let (matroid, z) = half_point(&mut rng, m);
        let mut expected = BTreeMap::new();
        for s in matroid.ground().subsets() {
            let p: f64 = (0..m).map(|e| if s.contains(e) { z[e] } else { 1.0 - z[e] }).product();
            if p > 0.0 {
                expected.insert(s.bits(), p);
            }
        }
        let mut ordering: Vec<usize> = (0..m).collect();
        ordering.shuffle(&mut rng);
        let samples = 10_000;
        let mut observed = BTreeMap::new();
        for _ in 0..samples {
            let c = sequential_rounds_cover(&matroid, &z, &mut rng, &ordering)?;
            *observed.entry(c.sampled.bits()).or_insert(0) += 1;
        }
        let support_ok = observed.keys().all(|k| expected.contains_key(k));
        let p = if support_ok { chi_square_p(&observed, &expected, samples) } else { 0.0 };
        equivalence.slack(p - 0.01);
    }

    let mut toss = Check::new("last-element-toss-half");
    for _ in 0..20 {
        let m = rng.gen_range(2..=6);
        let (matroid, z) = half_point(&mut rng, m);
        let order = last_element_order(&matroid, &z, &mut rng, 10_000)?;
        let probs = exact_toss_probabilities(&matroid, &z, &order);
        for (&e, p) in order.iter().zip(probs) {
            if !matroid.is_loop(e) {
                toss.slack(p - 0.5 + 1e-12);
            }
        }
    }
    Ok(vec![cover, envelope, equivalence, toss])
}

fn lemma3(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = rng_for(config, Suite::Lemma3Decomposition);
    let mut feasible = Check::new("decomposition-lp2-clean");
    let mut exact = Check::new("decomposition-sums-to-opt");
    for _ in 0..100 {
        let m = rng.gen_range(2..=10);
        let n = rng.gen_range(1..=12);
        let inst = mixed(&mut rng, m, n);
        let opt = brute_force_opt(&inst)?;
        let parts = decompose_optimal(&inst, &opt)?;
        for p in &parts {
            feasible.outcome(check_lp2(&inst, p.alpha, &p.x, &p.z)?.is_clean());
        }
        let total: f64 = parts.iter().map(|p| p.objective).sum();
        exact.outcome(total == opt.value);
    }
    let mut greedy = Check::new("greedy-half-opt");
    for _ in 0..500 {
        let m = rng.gen_range(2..=10);
        let n = rng.gen_range(1..=10);
        let inst = mixed(&mut rng, m, n);
        let opt = brute_force_opt(&inst)?.value;
        greedy.slack(greedy_opt(&inst).value - opt / 2.0 + 1e-9);
    }
    Ok(vec![feasible, exact, greedy])
}

fn weighted_instance<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Instance {
    loop {
        let base = mixed(rng, m, n);
        let arrivals = base
            .arrivals()
            .iter()
            .map(|a| {
                let w = (0..m)
                    .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.25..=64.0) })
                    .collect();
                Arrival::weighted(a.matroid.clone(), WeightVector::new(w).expect("finite weights"))
            })
            .collect();
        let inst = Instance::new(base.constraint().clone(), arrivals).expect("same ground set");
        if weight_stats(&inst).is_ok() {
            return inst;
        }
    }
}

fn weighted(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = rng_for(config, Suite::WeightedBound);
    let mut bound = Check::new("bucket-bound");
    let mut scaled = Check::new("scaled-at-most-exact");
    for t in 0..200u64 {
        let m = rng.gen_range(2..=10);
        let n = rng.gen_range(1..=8);
        let inst = weighted_instance(&mut rng, m, n);
        for _ in 0..5 {
            let s = ElementSet::from_bits(rng.gen::<u64>()).intersection(ElementSet::full(m));
            bound.outcome(verify_bucket_bound(&inst, s)?);
        }
        let scheme = GuessScheme::KnownN { n };
        for ratio_known in [true, false] {
            let run = run_weighted(&inst, &scheme, ratio_known, ElementOrder::Ascending, derive_seed(config.seed, t))?;
            scaled.slack(run.exact_profit - run.scaled_profit + 1e-9);
        }
    }
    Ok(vec![bound, scaled])
}
