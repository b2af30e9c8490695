use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cds_core::io::{self, Format};
use cds_core::throughput::{self, DEFAULT_REPEATS};
use cds_core::{price_batch, run_engines, CurveKind, EngineConfig, SpreadResult};

#[derive(Parser)]
#[command(
    name = "cds",
    version,
    about = "Credit default swap fair-spread pricing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Oracle,
    Pipeline,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Price a batch of options.
    Price {
        #[arg(long)]
        options: PathBuf,
        #[arg(long)]
        interest: PathBuf,
        #[arg(long)]
        hazard: PathBuf,
        #[arg(long, value_enum, default_value = "pipeline")]
        engine: Engine,
        #[arg(long, default_value_t = 1)]
        engines: usize,
        #[arg(long, default_value_t = 6)]
        replication: usize,
        #[arg(long, default_value_t = cds_core::reduce::DEFAULT_LANES)]
        lanes: usize,
        /// Output file; results go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to the output file's extension, else csv.
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
    },
    /// Measure options/second for the oracle and swept pipeline variants.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        num_options: usize,
        #[arg(long, default_value_t = io::DEFAULT_RATE_NODES)]
        rates: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// `engines=1,2,5` or `replication=1,6`; repeatable.
        #[arg(long = "sweep", value_parser = parse_sweep)]
        sweeps: Vec<Sweep>,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long, default_value_t = cds_core::reduce::DEFAULT_LANES)]
        lanes: usize,
        /// Where to write the JSON report.
        #[arg(long, default_value = "bench_report.json")]
        report: PathBuf,
    },
    /// Write a seeded workload: interest.csv, hazard.csv and options.csv.
    Gen {
        #[arg(long, default_value_t = 1000)]
        num_options: usize,
        #[arg(long, default_value_t = io::DEFAULT_RATE_NODES)]
        rates: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Debug)]
enum Sweep {
    Engines(Vec<usize>),
    Replication(Vec<usize>),
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let (key, values) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=v1,v2,... in `{s}`"))?;
    let values = values
        .split(',')
        .map(|v| match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("`{v}` is not a positive integer")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    match key.trim() {
        "engines" => Ok(Sweep::Engines(values)),
        "replication" => Ok(Sweep::Replication(values)),
        other => Err(format!(
            "unknown sweep key `{other}` (engines, replication)"
        )),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Price {
            options,
            interest,
            hazard,
            engine,
            engines,
            replication,
            lanes,
            out,
            format,
        } => {
            let options = io::load_options(&options)?;
            let interest = io::load_term_structure(&interest, CurveKind::Interest)?;
            let hazard = io::load_term_structure(&hazard, CurveKind::Hazard)?;
            let results = match engine {
                Engine::Oracle => price_batch(&options, &interest, &hazard),
                Engine::Pipeline => {
                    let config = EngineConfig {
                        engines,
                        replication,
                        lanes,
                        ..EngineConfig::default()
                    };
                    run_engines(&options, &interest, &hazard, &config)?
                }
            };
            let mut priced: Vec<SpreadResult> = Vec::with_capacity(results.len());
            let mut failures = 0usize;
            for result in results {
                match result {
                    Ok(r) => priced.push(r),
                    Err(e) => {
                        failures += 1;
                        eprintln!("error: {e}");
                    }
                }
            }
            let format = format
                .map(Format::from)
                .or_else(|| out.as_deref().map(Format::from_path))
                .unwrap_or(Format::Csv);
            match out {
                Some(path) => io::write_results(&priced, path, format)?,
                None => print!("{}", io::render_results(&priced, format)?),
            }
            if failures > 0 {
                eprintln!("{failures} option(s) failed to price");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench {
            num_options,
            rates,
            seed,
            sweeps,
            repeats,
            lanes,
            report,
        } => {
            if num_options == 0 {
                bail!("--num-options must be at least 1");
            }
            let mut engines = vec![1, 2, 5];
            let mut replication = vec![1, 6];
            for sweep in sweeps {
                match sweep {
                    Sweep::Engines(v) => engines = v,
                    Sweep::Replication(v) => replication = v,
                }
            }
            let workload = io::generate_workload(num_options, rates, seed)?;
            let base = EngineConfig {
                lanes,
                ..EngineConfig::default()
            };
            let variants = throughput::sweep_variants(&engines, &replication);
            let result = throughput::run_sweep(&workload, &variants, &base, repeats)?;
            print!("{}", throughput::render_table(&result));
            let json = serde_json::to_string_pretty(&result)?;
            fs::write(&report, json + "\n")
                .with_context(|| format!("writing {}", report.display()))?;
            println!("\nreport written to {}", report.display());
        }
        Command::Gen {
            num_options,
            rates,
            seed,
            out_dir,
        } => {
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let workload = io::generate_workload(num_options, rates, seed)?;
            io::save_term_structure(&workload.interest, out_dir.join("interest.csv"))?;
            io::save_term_structure(&workload.hazard, out_dir.join("hazard.csv"))?;
            io::save_options(&workload.options, out_dir.join("options.csv"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
