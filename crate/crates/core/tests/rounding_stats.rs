mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;

use common::*;
use onlinerank::fractional::{run_algg, Alpha, ElementOrder, GuessScheme};
use onlinerank::invariants::rounding_faults;
use onlinerank::rng::{stream, Purpose};
use onlinerank::rounding::{full_pipeline, round_fractional, CoinMode};
use onlinerank::{Arrival, ElementSet, Instance, Matroid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn expected_size_meets_eighth_of_mass() {
    let inst = fixed_partition_instance();
    for k in 0..4 {
        let alpha = Alpha::pow2(k);
        let state = run_algg(&inst, alpha, ElementOrder::Ascending).unwrap();
        let target: f64 = state.x().iter().sum::<f64>() / 8.0;
        let trials = 10_000u64;
        let sizes: Vec<f64> = (0..trials)
            .map(|s| {
                let mut rng = stream(s, alpha.get(), Purpose::Rounding);
                let t = round_fractional(&inst, &state, &mut rng, CoinMode::Random).unwrap();
                t.final_set().len() as f64
            })
            .collect();
        let mean = sizes.iter().sum::<f64>() / trials as f64;
        let var = sizes.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(mean >= target - 3.0 * se, "alpha {alpha}: {mean} < {target} - 3*{se}");
    }
}

#[test]
fn runs_are_safe() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..60 {
        let m = rng.gen_range(2..=12);
        let n = rng.gen_range(1..=16);
        let inst = random_instance(&mut rng, m, n);
        let state = run_algg(&inst, Alpha::pow2(rng.gen_range(0..5)), ElementOrder::Ascending).unwrap();
        for mode in [CoinMode::Random, CoinMode::AlwaysHeads] {
            let t = round_fractional(&inst, &state, &mut rng, mode).unwrap();
            assert!(rounding_faults(&inst, &state, &t).is_empty());
            // once spanned, an element never becomes addable again
            let mut spanned = ElementSet::EMPTY;
            for f in &t.f_rounds {
                let now = inst.constraint().span_of(*f);
                assert!(spanned.is_subset(now));
                spanned = now;
            }
        }
    }
}

/// Exact distribution of the final set by enumerating every coin outcome.
fn exact_final_distribution(inst: &Instance, alpha: Alpha) -> BTreeMap<u64, f64> {
    let state = run_algg(inst, alpha, ElementOrder::Ascending).unwrap();
    let updates = state.trace();
    let mut dist = BTreeMap::new();
    for outcome in 0u64..(1 << updates.len()) {
        let mut p = 1.0;
        let mut f = ElementSet::EMPTY;
        for (k, u) in updates.iter().enumerate() {
            let q = (u.x_after - u.x_before) / 4.0;
            if outcome >> k & 1 == 1 {
                p *= q;
                if inst.constraint().indep(f.with(u.element)) {
                    f.insert(u.element);
                }
            } else {
                p *= 1.0 - q;
            }
        }
        *dist.entry(f.bits()).or_insert(0.0) += p;
    }
    dist
}

#[test]
fn single_round_distribution_matches_enumeration() {
    let inst = Instance::new(
        Matroid::uniform(2, 1),
        vec![Arrival::unweighted(Matroid::uniform(2, 2))],
    )
    .unwrap();
    let alpha = Alpha::ONE;
    let exact = exact_final_distribution(&inst, alpha);
    assert!((exact.values().sum::<f64>() - 1.0).abs() < 1e-12);
    let state = run_algg(&inst, alpha, ElementOrder::Ascending).unwrap();
    let trials = 200_000;
    let mut observed: BTreeMap<u64, f64> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..trials {
        let t = round_fractional(&inst, &state, &mut rng, CoinMode::Random).unwrap();
        *observed.entry(t.final_set().bits()).or_insert(0.0) += 1.0;
    }
    let mut stat = 0.0;
    for (bits, p) in &exact {
        let expected = p * trials as f64;
        let o = observed.get(bits).copied().unwrap_or(0.0);
        stat += (o - expected).powi(2) / expected;
    }
    assert!(observed.keys().all(|k| exact.contains_key(k)));
    let dof = (exact.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
    assert!(p_value > 0.01, "chi2 {stat} on {dof} dof, p = {p_value}");
}

#[test]
fn inclusion_probability_capped_by_x_over_four() {
    let inst = fixed_partition_instance();
    let alpha = Alpha::pow2(2);
    let state = run_algg(&inst, alpha, ElementOrder::Ascending).unwrap();
    let trials = 20_000;
    let mut hits = vec![0usize; inst.m()];
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..trials {
        let t = round_fractional(&inst, &state, &mut rng, CoinMode::Random).unwrap();
        for e in t.final_set() {
            hits[e] += 1;
        }
    }
    for (e, &h) in hits.iter().enumerate() {
        let cap = (state.x()[e] - state.floor()) / 4.0;
        let p = h as f64 / trials as f64;
        let sigma = (cap * (1.0 - cap) / trials as f64).sqrt();
        assert!(p <= cap + 3.0 * sigma + 1e-12, "element {e}: {p} > {cap}");
    }
}

#[test]
fn golden_trace_for_fixed_instance() {
    let inst = fixed_partition_instance();
    let trace = full_pipeline(&inst, &GuessScheme::KnownN { n: inst.n() }, ElementOrder::Ascending, 42)
        .unwrap();
    let actual = serde_json::to_string_pretty(&trace).unwrap() + "\n";
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/fixed_partition_seed42.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(actual, expected);
}
