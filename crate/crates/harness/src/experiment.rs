//! Seeded multi-trial runs with CSV rows and a JSON aggregate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use onlinerank::fractional::{run_algg, AlgGState, Alpha, ElementOrder, GuessScheme};
use onlinerank::oracle::{brute_force_opt, greedy_opt};
use onlinerank::polytope::ENUMERATION_LIMIT;
use onlinerank::rng::{derive_seed, stream, Purpose};
use onlinerank::rounding::{round_fractional, CoinMode, CoupledTrace};
use onlinerank::weighted::run_weighted;
use onlinerank::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Known,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    Asc,
    Desc,
    Shuffle,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instance: Instance,
    pub trials: usize,
    pub master_seed: u64,
    pub scheme: Scheme,
    pub order: Order,
    /// Weighted instances only: pick the weight class uniformly instead of
    /// from the heavy tail.
    pub ratio_known: bool,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(instance: Instance, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            instance,
            trials,
            master_seed,
            scheme: Scheme::Known,
            order: Order::Asc,
            ratio_known: true,
            csv: None,
            json: None,
        }
    }

    fn guess_scheme(&self) -> GuessScheme {
        match self.scheme {
            Scheme::Known => GuessScheme::KnownN { n: self.instance.n() },
            Scheme::Unknown => GuessScheme::unknown_n(),
        }
    }

    fn element_order(&self, seed: u64) -> ElementOrder {
        match self.order {
            Order::Asc => ElementOrder::Ascending,
            Order::Desc => ElementOrder::Descending,
            Order::Shuffle => ElementOrder::Shuffle { seed },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub seed: u64,
    pub alpha: String,
    pub frac_profit: f64,
    pub int_profit: f64,
    #[serde(rename = "F_size")]
    pub f_size: usize,
    /// Arrivals with positive profit.
    pub covered_rounds: usize,
    /// Weighted unknown-ratio runs: early arrivals were bucketed against a
    /// running minimum larger than the final one.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub running_min_changed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count();
        if n == 0 {
            return MeanSe { mean: 0.0, se: 0.0 };
        }
        let mean = values.clone().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        MeanSe { mean, se }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub frac_profit: MeanSe,
    pub int_profit: MeanSe,
    pub f_size: MeanSe,
    pub covered_rounds: MeanSe,
    /// `opt / mean int_profit`; absent when the mean is zero.
    pub empirical_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub scheme: Scheme,
    pub order: Order,
    pub weighted: bool,
    pub opt: f64,
    /// `brute-force`, or `greedy-lower-bound` beyond the enumeration limit.
    pub opt_kind: &'static str,
    pub greedy: f64,
    /// Trials flagged with `running_min_changed`.
    pub running_min_changed: usize,
    pub aggregate: Aggregate,
    pub rows: Vec<TrialRow>,
}

impl RunReport {
    pub fn aggregate_of(rows: &[TrialRow], opt: f64) -> Aggregate {
        let int_profit = MeanSe::of(rows.iter().map(|r| r.int_profit));
        Aggregate {
            frac_profit: MeanSe::of(rows.iter().map(|r| r.frac_profit)),
            f_size: MeanSe::of(rows.iter().map(|r| r.f_size as f64)),
            covered_rounds: MeanSe::of(rows.iter().map(|r| r.covered_rounds as f64)),
            empirical_ratio: (int_profit.mean > 0.0).then(|| opt / int_profit.mean),
            int_profit,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["seed", "alpha", "frac_profit", "int_profit", "F_size", "opt", "opt_kind"])?;
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.alpha.clone(),
                r.frac_profit.to_string(),
                r.int_profit.to_string(),
                r.f_size.to_string(),
                self.opt.to_string(),
                self.opt_kind.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

fn row(seed: u64, trace: &CoupledTrace, frac_profit: f64, int_profit: f64) -> TrialRow {
    TrialRow {
        seed,
        alpha: trace.alpha.to_string(),
        frac_profit,
        int_profit,
        f_size: trace.final_set().len(),
        covered_rounds: trace.profits.iter().filter(|&&p| p > 0.0).count(),
        running_min_changed: false,
    }
}

/// Fractional runs depend on the guess alone, so each distinct guess is run
/// once and shared by every trial that drew it. The guess and coin streams
/// are those of [`onlinerank::rounding::full_pipeline`].
fn unweighted_rows(config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<TrialRow>> {
    let scheme = config.guess_scheme();
    let alphas: Vec<Alpha> = seeds
        .iter()
        .map(|&s| scheme.sample_alpha(&mut stream(s, 0, Purpose::Guess)))
        .collect();
    let mut distinct: Vec<Alpha> = alphas.clone();
    distinct.sort();
    distinct.dedup();
    let inst = &config.instance;
    let states: BTreeMap<Alpha, AlgGState> = match config.order {
        Order::Shuffle => BTreeMap::new(),
        _ => distinct
            .par_iter()
            .map(|&a| Ok((a, run_algg(inst, a, config.element_order(0))?)))
            .collect::<Result<_>>()?,
    };
    seeds
        .par_iter()
        .zip(&alphas)
        .map(|(&seed, &alpha)| {
            let owned;
            let state = match states.get(&alpha) {
                Some(s) => s,
                None => {
                    owned = run_algg(inst, alpha, config.element_order(seed))?;
                    &owned
                }
            };
            let mut coins = stream(seed, alpha.get(), Purpose::Rounding);
            let trace = round_fractional(inst, state, &mut coins, CoinMode::Random)?;
            Ok(row(seed, &trace, trace.fractional_profit, trace.total_profit))
        })
        .collect()
}

fn weighted_rows(config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<TrialRow>> {
    let scheme = config.guess_scheme();
    seeds
        .par_iter()
        .map(|&seed| {
            let order = config.element_order(seed);
            let run = run_weighted(&config.instance, &scheme, config.ratio_known, order, seed)?;
            Ok(TrialRow {
                running_min_changed: run.running_min_changed,
                ..row(seed, &run.trace, run.scale * run.trace.fractional_profit, run.exact_profit)
            })
        })
        .collect()
}

/// Offline reference value and its label.
pub fn reference_opt(instance: &Instance) -> (f64, &'static str) {
    if instance.m() <= ENUMERATION_LIMIT {
        if let Ok(opt) = brute_force_opt(instance) {
            return (opt.value, "brute-force");
        }
    }
    (greedy_opt(instance).value, "greedy-lower-bound")
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    ensure!(config.trials >= 1, "need at least one trial");
    let seeds: Vec<u64> = (0..config.trials as u64)
        .map(|t| derive_seed(config.master_seed, t))
        .collect();
    let weighted = !config.instance.is_unweighted();
    let rows = if weighted {
        weighted_rows(config, &seeds)?
    } else {
        unweighted_rows(config, &seeds)?
    };
    let (opt, opt_kind) = reference_opt(&config.instance);
    let report = RunReport {
        m: config.instance.m(),
        n: config.instance.n(),
        trials: config.trials,
        master_seed: config.master_seed,
        scheme: config.scheme,
        order: config.order,
        weighted,
        opt,
        opt_kind,
        greedy: greedy_opt(&config.instance).value,
        running_min_changed: rows.iter().filter(|r| r.running_min_changed).count(),
        aggregate: RunReport::aggregate_of(&rows, opt),
        rows,
    };
    if let Some(path) = &config.csv {
        report.write_csv(create(path)?)?;
    }
    if let Some(path) = &config.json {
        report.write_json(create(path)?)?;
    }
    Ok(report)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid instance in {}", path.display()))
}
