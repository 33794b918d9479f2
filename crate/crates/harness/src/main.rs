use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use onlinerank_harness::experiment::{load_instance, run_experiment, ExperimentConfig, Order, Scheme};
use onlinerank_harness::generate::{generate, GenParams, Kind};
use onlinerank_harness::verify::{self, Suite, VerifyConfig};

#[derive(Parser)]
#[command(name = "onlinerank", version, about = "Online matroid-constrained rank maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constraint rank for random-uniform and max-coverage.
        #[arg(long)]
        k: Option<usize>,
        /// Attach weights drawn from [1, W].
        #[arg(long, value_name = "W")]
        max_weight: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run seeded trials of the online algorithm on an instance.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Scheme::Known)]
        scheme: Scheme,
        #[arg(long, value_enum, default_value_t = Order::Asc)]
        order: Order,
        /// Weighted instances: draw the weight class from the heavy tail
        /// instead of uniformly.
        #[arg(long)]
        unknown_ratio: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run an invariant suite; exits nonzero on any violation.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        /// Override the size-to-profit constant (mutation testing).
        #[arg(long)]
        lemma5_constant: Option<f64>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            kind,
            m,
            n,
            seed,
            k,
            max_weight,
            output,
        } => {
            let inst = generate(kind, &GenParams { m, n, k, max_weight }, seed)?;
            let text = serde_json::to_string_pretty(&inst)? + "\n";
            std::fs::write(&output, text).with_context(|| format!("cannot write {}", output.display()))?;
            Ok(true)
        }
        Command::Run {
            instance,
            trials,
            seed,
            scheme,
            order,
            unknown_ratio,
            csv,
            json,
        } => {
            let mut config = ExperimentConfig::new(load_instance(&instance)?, trials, seed);
            config.scheme = scheme;
            config.order = order;
            config.ratio_known = !unknown_ratio;
            config.csv = csv;
            config.json = json;
            let report = run_experiment(&config)?;
            let a = &report.aggregate;
            println!(
                "trials={} opt={} ({}) greedy={} mean_int={:.4}±{:.4} mean_frac={:.4} ratio={}",
                report.trials,
                report.opt,
                report.opt_kind,
                report.greedy,
                a.int_profit.mean,
                a.int_profit.se,
                a.frac_profit.mean,
                a.empirical_ratio.map_or("-".into(), |r| format!("{r:.3}")),
            );
            if report.running_min_changed > 0 {
                println!(
                    "note: running minimum weight changed mid-run in {} trials",
                    report.running_min_changed
                );
            }
            Ok(true)
        }
        Command::Verify {
            suite,
            seed,
            lemma5_constant,
        } => {
            let mut config = VerifyConfig { seed, ..VerifyConfig::default() };
            if let Some(c) = lemma5_constant {
                config.lemma5_constant = c;
            }
            let reports = verify::run(suite, &config)?;
            let mut ok = true;
            for r in &reports {
                print!("{r}");
                ok &= r.passed();
            }
            Ok(ok)
        }
    }
}
