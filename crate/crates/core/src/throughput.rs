//! Options-per-second measurement for the oracle and pipeline variants.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::error::{CdsError, Result};
use crate::io::Workload;
use crate::pipeline::EngineConfig;
use crate::pricing::price_batch;
use crate::scaler::run_engines;

/// Timings are averaged over this many runs unless told otherwise.
pub const DEFAULT_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Sequential reference engine on the calling thread.
    Oracle,
    Pipeline {
        engines: usize,
        replication: usize,
    },
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Oracle => f.write_str("oracle"),
            Variant::Pipeline {
                engines,
                replication,
            } => {
                write!(f, "pipeline engines={engines} replication={replication}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub variant: String,
    /// Batch size divided by the mean wall time.
    pub options_per_second: f64,
    pub repeats: usize,
    /// Mean wall time per run, seconds.
    pub mean: f64,
    /// Sample standard deviation of wall time, seconds.
    pub stddev: f64,
    /// Throughput relative to the oracle row, when one was measured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup_vs_oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub num_options: usize,
    pub rate_nodes: usize,
    pub hardware_threads: usize,
    pub note: &'static str,
    pub rows: Vec<BenchRow>,
}

pub fn hardware_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run_once(variant: Variant, workload: &Workload, base: &EngineConfig) -> Result<()> {
    let results = match variant {
        Variant::Oracle => price_batch(&workload.options, &workload.interest, &workload.hazard),
        Variant::Pipeline {
            engines,
            replication,
        } => {
            let config = EngineConfig {
                engines,
                replication,
                ..*base
            };
            run_engines(
                &workload.options,
                &workload.interest,
                &workload.hazard,
                &config,
            )?
        }
    };
    if let Some(Err(e)) = results.iter().find(|r| r.is_err()) {
        return Err(e.clone());
    }
    std::hint::black_box(results);
    Ok(())
}

/// Times `repeats` runs of `variant` over the whole workload.
pub fn measure(
    variant: Variant,
    workload: &Workload,
    base: &EngineConfig,
    repeats: usize,
) -> Result<BenchRow> {
    if repeats == 0 {
        return Err(CdsError::InvalidConfig("repeats must be >= 1".into()));
    }
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        run_once(variant, workload, base)?;
        times.push(start.elapsed().as_secs_f64());
    }
    let mean = times.iter().sum::<f64>() / repeats as f64;
    let stddev = if repeats > 1 {
        (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(BenchRow {
        variant: variant.to_string(),
        options_per_second: workload.options.len() as f64 / mean.max(f64::MIN_POSITIVE),
        repeats,
        mean,
        stddev,
        speedup_vs_oracle: None,
    })
}

/// Cartesian sweep over engine counts and replication factors, preceded by
/// the oracle.
pub fn sweep_variants(engines: &[usize], replication: &[usize]) -> Vec<Variant> {
    let mut variants = vec![Variant::Oracle];
    for &n in engines {
        for &v in replication {
            variants.push(Variant::Pipeline {
                engines: n,
                replication: v,
            });
        }
    }
    variants
}

pub fn run_sweep(
    workload: &Workload,
    variants: &[Variant],
    base: &EngineConfig,
    repeats: usize,
) -> Result<BenchReport> {
    let mut rows = variants
        .iter()
        .map(|&v| measure(v, workload, base, repeats))
        .collect::<Result<Vec<_>>>()?;
    let oracle = variants
        .iter()
        .position(|v| *v == Variant::Oracle)
        .map(|i| rows[i].options_per_second);
    if let Some(oracle) = oracle {
        for row in &mut rows {
            row.speedup_vs_oracle = Some(row.options_per_second / oracle);
        }
    }
    Ok(BenchReport {
        num_options: workload.options.len(),
        rate_nodes: workload.hazard.len(),
        hardware_threads: hardware_threads(),
        note: "absolute throughput is hardware-dependent; compare the speedup column",
        rows,
    })
}

/// Plain-text table of a report.
pub fn render_table(report: &BenchReport) -> String {
    let mut out = format!(
        "{} options, {} rate nodes, {} hardware threads\n{}\n\n",
        report.num_options, report.rate_nodes, report.hardware_threads, report.note
    );
    let width = report
        .rows
        .iter()
        .map(|r| r.variant.len())
        .max()
        .unwrap_or(7)
        .max(7);
    out.push_str(&format!(
        "{:<width$}  {:>16}  {:>10}  {:>10}  {:>8}\n",
        "variant", "options/second", "mean [s]", "stddev [s]", "speedup"
    ));
    for r in &report.rows {
        let speedup = r
            .speedup_vs_oracle
            .map_or("-".to_owned(), |s| format!("{s:.2}x"));
        out.push_str(&format!(
            "{:<width$}  {:>16.2}  {:>10.4}  {:>10.4}  {:>8}\n",
            r.variant, r.options_per_second, r.mean, r.stddev, speedup
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::generate_workload;

    #[test]
    fn sweep_rows_and_ratios() {
        let w = generate_workload(40, 64, 3).unwrap();
        let variants = sweep_variants(&[1, 2], &[1, 3]);
        assert_eq!(variants.len(), 5);
        let report = run_sweep(&w, &variants, &EngineConfig::default(), 2).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.rows[0].speedup_vs_oracle, Some(1.0));
        for row in &report.rows {
            assert!(row.options_per_second.is_finite() && row.options_per_second > 0.0);
            assert_eq!(row.repeats, 2);
        }
        let table = render_table(&report);
        assert!(table.contains("pipeline engines=2 replication=3"));
        let json = serde_json::to_value(&report).unwrap();
        for key in ["variant", "options_per_second", "repeats", "mean", "stddev"] {
            assert!(json["rows"][0].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn zero_repeats_rejected() {
        let w = generate_workload(1, 4, 3).unwrap();
        assert!(measure(Variant::Oracle, &w, &EngineConfig::default(), 0).is_err());
    }
}
