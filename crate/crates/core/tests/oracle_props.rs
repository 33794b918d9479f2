mod common;

use common::*;
use onlinerank::fractional::known_n_support;
use onlinerank::oracle::*;
use onlinerank::ElementSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_independent<R: Rng>(rng: &mut R, inst: &onlinerank::Instance) -> ElementSet {
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.shuffle(rng);
    let mut s = ElementSet::EMPTY;
    for e in order {
        if rng.gen_bool(0.6) && inst.constraint().indep(s.with(e)) {
            s.insert(e);
        }
    }
    s
}

fn draw<R: Rng>(rng: &mut R, max_m: usize, max_n: usize) -> onlinerank::Instance {
    let m = rng.gen_range(2..=max_m);
    let n = rng.gen_range(1..=max_n);
    random_instance(rng, m, n)
}

#[test]
fn brute_force_dominates_sampled_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..30 {
        let inst = draw(&mut rng, 10, 8);
        let opt = brute_force_opt(&inst).unwrap();
        assert!(inst.constraint().indep(opt.set));
        assert_eq!(opt.value, inst.objective(opt.set));
        for _ in 0..1000 {
            let s = random_independent(&mut rng, &inst);
            assert!(inst.objective(s) <= opt.value + 1e-9);
        }
    }
}

#[test]
fn brute_force_matches_plain_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..40 {
        let inst = draw(&mut rng, 9, 6);
        let best = inst
            .constraint()
            .ground()
            .subsets()
            .filter(|&s| inst.constraint().indep(s))
            .map(|s| inst.objective(s))
            .fold(0.0, f64::max);
        assert_eq!(brute_force_opt(&inst).unwrap().value, best);
    }
}

#[test]
fn greedy_is_half_approximate() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..200 {
        let inst = draw(&mut rng, 10, 10);
        let opt = brute_force_opt(&inst).unwrap().value;
        let greedy = greedy_opt(&inst);
        assert!(inst.constraint().indep(greedy.set));
        assert!(greedy.value >= 0.5 * opt - 1e-9, "{} < {opt}/2", greedy.value);
    }
}

#[test]
fn decomposition_is_feasible_and_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..60 {
        let n = rng.gen_range(1..=12);
        let m = rng.gen_range(2..=10);
        let inst = random_instance(&mut rng, m, n);
        let opt = brute_force_opt(&inst).unwrap();
        let parts = decompose_optimal(&inst, &opt).unwrap();
        assert_eq!(
            parts.iter().map(|p| p.alpha).collect::<Vec<_>>(),
            known_n_support(n)
        );
        for p in &parts {
            let report = check_lp2(&inst, p.alpha, &p.x, &p.z).unwrap();
            assert!(report.is_clean(), "alpha {}: {:?}", p.alpha, report.violations);
        }
        assert_eq!(parts.iter().map(|p| p.objective).sum::<f64>(), opt.value);
    }
}

#[test]
fn doubled_z_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let mut caught = 0;
    for _ in 0..30 {
        let inst = random_instance(&mut rng, 6, 4);
        let opt = brute_force_opt(&inst).unwrap();
        for p in decompose_optimal(&inst, &opt).unwrap() {
            if p.objective == 0.0 {
                continue;
            }
            let z: Vec<Vec<f64>> = p.z.iter().map(|zi| zi.iter().map(|v| 2.0 * v).collect()).collect();
            let report = check_lp2(&inst, p.alpha, &p.x, &z).unwrap();
            assert!(!report.is_clean());
            caught += 1;
        }
    }
    assert!(caught > 0);
}
