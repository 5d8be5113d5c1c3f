// SPDX-License-Identifier: MIT OR Apache-2.0

//! `tivacpd`: detect change points in a CSV series, simulate benchmark
//! data, score detections and run the benchmark.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 numerical
//! failure (the solver not converging in strict mode).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::TableFormat;
use config::{RunConfig, CONFIG_ENV};

#[derive(Parser, Debug)]
#[command(name = "tivacpd", version, about = "Change-point detection for multivariate time series")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML run configuration.
    #[arg(long, short = 'c', global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Override any config field, e.g. `--set detect.tvgl.beta=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Seed for the simulator and the permutation tests.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Fail with exit code 2 when the solver does not converge.
    #[arg(long, global = true)]
    strict: bool,
    /// Repeat for more logging.
    #[arg(long, short = 'v', action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect change points in a CSV file with a header row of feature names.
    Detect {
        input: Option<PathBuf>,
        /// `tivacpd`, `cov` or `dist`.
        #[arg(long)]
        detector: Option<String>,
        /// Apply the tuned thresholds of a simulated family.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, short = 'k')]
        threshold: Option<f64>,
        /// Also write ensemble, solver and window traces.
        #[arg(long)]
        traces: bool,
    },
    /// Write a simulated series and its ground truth.
    Simulate {
        family: String,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        segments: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        /// Per-segment correlations, e.g. `0,0.9`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        rho: Option<Vec<f64>>,
    },
    /// Score predicted change points against ground truth.
    Eval {
        #[arg(long)]
        cps: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Repeat for a margin sweep; defaults to the configured margins.
        #[arg(long = "margin", short = 'm')]
        margins: Vec<usize>,
        /// Write the reports here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run every detector on seeded replicates of every family.
    Benchmark {
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: TableFormat,
        /// Ignore the tuned per-family thresholds.
        #[arg(long)]
        no_presets: bool,
        /// Write the table here instead of stdout.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Random-search peak thresholds on the tuning seeds.
    Tune {
        families: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn set(over: &mut Vec<String>, key: &str, value: impl std::fmt::Display) {
    over.push(format!("{key}={value}"));
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let mut over = g.set.clone();
    if let Some(s) = g.seed {
        set(&mut over, "seed", s);
    }
    if let Some(o) = &g.output {
        set(&mut over, "output", format!("{:?}", o.display().to_string()));
    }
    if g.strict {
        set(&mut over, "detect.strict", true);
    }
    match &cli.command {
        Command::Detect {
            input,
            detector,
            preset,
            threshold,
            traces,
        } => {
            if let Some(i) = input {
                set(&mut over, "input", format!("{:?}", i.display().to_string()));
            }
            if let Some(d) = detector {
                set(&mut over, "detector", format!("{d:?}"));
            }
            if let Some(p) = preset {
                set(&mut over, "preset", format!("{p:?}"));
            }
            if *traces {
                set(&mut over, "traces", true);
            }
            if let Some(k) = threshold {
                for key in ["ensemble.peak_threshold", "ablation.cov_threshold", "ablation.dist_threshold"] {
                    set(&mut over, &format!("detect.{key}"), k);
                }
            }
        }
        Command::Simulate {
            length,
            segments,
            dim,
            rho,
            ..
        } => {
            if let Some(v) = length {
                set(&mut over, "sim.length", v);
            }
            if let Some(v) = segments {
                set(&mut over, "sim.n_segments", v);
            }
            if let Some(v) = dim {
                set(&mut over, "sim.dim", v);
            }
            if let Some(r) = rho {
                set(&mut over, "sim.rho", format!("{r:?}"));
            }
        }
        Command::Eval { margins, .. } if !margins.is_empty() => {
            set(&mut over, "eval.margins", format!("{margins:?}"));
        }
        Command::Benchmark {
            seeds, no_presets, ..
        } => {
            if let Some(k) = seeds {
                set(&mut over, "bench.n_seeds", k);
            }
            if *no_presets {
                set(&mut over, "use_presets", false);
            }
        }
        Command::Tune { trials: Some(n), .. } => set(&mut over, "tune.n_trials", n),
        _ => {}
    }
    if g.verbose > 0 {
        set(&mut over, "verbosity", g.verbose);
    }

    let mut config = RunConfig::load(g.config.as_deref(), &over)?;
    config.apply_seed();
    init_logging(config.verbosity);

    match &cli.command {
        Command::Detect { .. } => {
            let input = config
                .input
                .clone()
                .context("config: no input file given")?;
            for path in commands::detect(&config, &input)? {
                println!("{}", path.display());
            }
        }
        Command::Simulate { family, .. } => {
            let (csv, truth) = commands::simulate_cmd(&config, family)?;
            println!("{}\n{}", csv.display(), truth.display());
        }
        Command::Eval {
            cps, truth, report, ..
        } => {
            let reports = commands::eval(&config, cps, truth)?;
            let text = serde_json::to_string_pretty(&reports)? + "\n";
            match report {
                Some(p) => std::fs::write(p, text).with_context(|| format!("io: {}", p.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Benchmark { format, table, .. } => {
            commands::benchmark(&config, *format, table.as_deref())?
        }
        Command::Tune {
            families, report, ..
        } => {
            let families = if families.is_empty() {
                tivacpd::datagen::family_names().iter().map(|s| s.to_string()).collect()
            } else {
                families.clone()
            };
            commands::tune(&config, &families, report.as_deref())?
        }
        Command::Config => print!("{}", config.to_toml()?),
    }
    Ok(())
}

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .any(|e| e.downcast_ref::<tivacpd::error::Error>().is_some_and(|e| e.is_numerical()));
    if numerical {
        2
    } else {
        1
    }
}

/// The error chain, skipping causes whose text the message already holds.
fn render(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
