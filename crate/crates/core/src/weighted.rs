//! Reduction from weighted to unit-weight rank functions by weight classes.
//!
//! With `f_min` the smallest positive singleton value, class `j` holds the
//! pairs `(i, e)` with `2^j · f_min <= w_{i,e} < 2^{j+1} · f_min`. Restricting
//! every arrival to one class (other elements become loops) gives a
//! unit-weight instance whose profit, scaled by `2^j · f_min`, never exceeds
//! the weighted profit of the same sets.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fractional::{ElementOrder, GuessScheme, HeavyTail};
use crate::instance::{Arrival, Instance};
use crate::rng::{self, Purpose};
use crate::rounding::{self, CoupledTrace};
use crate::set::ElementSet;

use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightStats {
    pub f_min: f64,
    pub f_max: f64,
    /// `2 · f_max / f_min`.
    pub f_ratio: f64,
    /// `⌈log₂ f_ratio⌉ + 1`.
    pub num_buckets: u32,
}

/// Positive singleton values `f_i({e})` of one arrival; loops contribute zero.
fn singleton_values(arrival: &Arrival) -> impl Iterator<Item = (usize, f64)> + '_ {
    let w = arrival.weights();
    (0..arrival.matroid.m())
        .filter(move |&e| !arrival.matroid.is_loop(e))
        .map(move |e| (e, w[e]))
        .filter(|&(_, v)| v > 0.0)
}

pub fn weight_stats(instance: &Instance) -> Result<WeightStats> {
    let (mut f_min, mut f_max) = (f64::INFINITY, 0.0f64);
    for a in instance.arrivals() {
        for (_, v) in singleton_values(a) {
            f_min = f_min.min(v);
            f_max = f_max.max(v);
        }
    }
    if f_max == 0.0 {
        return Err(Error::Degenerate(
            "no arrival has a positive singleton value".into(),
        ));
    }
    let f_ratio = 2.0 * f_max / f_min;
    Ok(WeightStats {
        f_min,
        f_max,
        f_ratio,
        num_buckets: f_ratio.log2().ceil() as u32 + 1,
    })
}

/// Class of a positive weight relative to `f_min`; `None` below `f_min`.
pub fn bucket_of(w: f64, f_min: f64) -> Option<u32> {
    if !(w >= f_min && f_min > 0.0) {
        return None;
    }
    let scale = |j: i32| f_min * 2f64.powi(j);
    let mut j = (w / f_min).log2().floor().max(0.0) as i32;
    while scale(j + 1) <= w {
        j += 1;
    }
    while j > 0 && scale(j) > w {
        j -= 1;
    }
    Some(j as u32)
}

fn restrict(arrival: &Arrival, j: u32, f_min: Option<f64>) -> Arrival {
    let keep: ElementSet = match f_min {
        Some(f_min) => singleton_values(arrival)
            .filter(|&(_, v)| bucket_of(v, f_min) == Some(j))
            .map(|(e, _)| e)
            .collect(),
        None => ElementSet::EMPTY,
    };
    let dropped = arrival.matroid.ground().difference(keep);
    Arrival::unweighted(arrival.matroid.delete(dropped))
}

/// The unit-weight instance of class `j`: in each arrival, elements outside
/// the class are deleted (made loops).
pub fn bucketize(instance: &Instance, j: u32) -> Result<Instance> {
    let stats = weight_stats(instance)?;
    if j >= stats.num_buckets {
        return invalid(format!(
            "bucket {j} out of range; the instance has {} buckets",
            stats.num_buckets
        ));
    }
    Instance::new(
        instance.constraint().clone(),
        instance
            .arrivals()
            .iter()
            .map(|a| restrict(a, j, Some(stats.f_min)))
            .collect(),
    )
}

/// Checks `f_i(S) <= 2 · Σ_j 2^j · f_min · f_ij(S)` for every arrival.
pub fn verify_bucket_bound(instance: &Instance, s: ElementSet) -> Result<bool> {
    if !s.within(instance.m()) {
        return invalid(format!("set {s:?} leaves the ground set"));
    }
    let stats = weight_stats(instance)?;
    let buckets = (0..stats.num_buckets)
        .map(|j| bucketize(instance, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(instance.arrivals().iter().enumerate().all(|(i, a)| {
        let lhs = a.value(s);
        let rhs: f64 = buckets
            .iter()
            .enumerate()
            .map(|(j, b)| {
                2f64.powi(j as i32) * stats.f_min * b.arrivals()[i].matroid.rank_of(s) as f64
            })
            .sum::<f64>()
            * 2.0;
        lhs <= rhs + 1e-9 * lhs.max(1.0)
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedRun {
    pub trace: CoupledTrace,
    pub bucket: u32,
    /// `2^bucket · f_min`.
    pub scale: f64,
    pub unweighted_profit: f64,
    pub scaled_profit: f64,
    /// `Σ_i f_i(F_i)` with the real weights.
    pub exact_profit: f64,
    /// Unknown-ratio runs only: the running `f_min` decreased after the
    /// first arrival with a positive value, so early rounds were bucketed
    /// against a larger minimum.
    pub running_min_changed: bool,
}

/// Runs the unit-weight pipeline on class `bucket` with the global `f_min`.
pub fn run_bucket(
    instance: &Instance,
    bucket: u32,
    scheme: &GuessScheme,
    order: ElementOrder,
    seed: u64,
) -> Result<WeightedRun> {
    let stats = weight_stats(instance)?;
    let reduced = bucketize(instance, bucket)?;
    finish(instance, &reduced, bucket, stats.f_min, false, scheme, order, seed)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    instance: &Instance,
    reduced: &Instance,
    bucket: u32,
    f_min: f64,
    running_min_changed: bool,
    scheme: &GuessScheme,
    order: ElementOrder,
    seed: u64,
) -> Result<WeightedRun> {
    let trace = rounding::full_pipeline(reduced, scheme, order, seed)?;
    let scale = 2f64.powi(bucket as i32) * f_min;
    let unweighted_profit = trace.total_profit;
    let exact_profit = rounding::recompute_profit(&trace, instance);
    Ok(WeightedRun {
        bucket,
        scale,
        unweighted_profit,
        scaled_profit: scale * unweighted_profit,
        exact_profit,
        running_min_changed,
        trace,
    })
}

/// Guesses a weight class and runs the unit-weight pipeline on it.
///
/// With `ratio_known` the class is uniform over all classes of the instance.
/// Otherwise class `i - 1` is chosen with the heavy-tailed probability of
/// `i`, and each arrival is bucketed against the smallest positive value
/// seen up to and including it.
pub fn run_weighted(
    instance: &Instance,
    scheme: &GuessScheme,
    ratio_known: bool,
    order: ElementOrder,
    seed: u64,
) -> Result<WeightedRun> {
    let stats = weight_stats(instance)?;
    let mut guess = rng::stream(seed, 0, Purpose::Bucket);
    if ratio_known {
        let bucket = guess.gen_range(0..stats.num_buckets);
        return run_bucket(instance, bucket, scheme, order, seed);
    }
    let bucket = HeavyTail::default().sample_index(&mut guess) - 1;
    let mut running: Option<f64> = None;
    let mut first_min: Option<f64> = None;
    let mut arrivals = Vec::with_capacity(instance.n());
    for a in instance.arrivals() {
        if let Some(v) = singleton_values(a).map(|(_, v)| v).reduce(f64::min) {
            running = Some(running.map_or(v, |r| r.min(v)));
            first_min.get_or_insert(v);
        }
        arrivals.push(restrict(a, bucket, running));
    }
    let reduced = Instance::new(instance.constraint().clone(), arrivals)?;
    let f_min = running.expect("weight_stats guarantees a positive value");
    let changed = first_min.is_some_and(|f| f != f_min);
    finish(instance, &reduced, bucket, f_min, changed, scheme, order, seed)
}
