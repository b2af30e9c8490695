//! Multi-engine decomposition: the batch is cut into `N` contiguous chunks,
//! each priced by its own pipeline over the same shared curves, and the
//! results are concatenated back in input order.

use std::thread;

use crate::curves::TermStructure;
use crate::error::{CdsError, Result};
use crate::pipeline::{self, BatchResults, EngineConfig, Probe};
use crate::schedule::CdsOption;

/// Contiguous chunk bounds: chunk `i` starts at `ceil(len / engines) * i`.
/// Fewer than `engines` chunks come back when the batch is small.
pub fn partition(len: usize, engines: usize) -> Vec<std::ops::Range<usize>> {
    assert!(engines >= 1, "engines must be >= 1");
    if len == 0 {
        return Vec::new();
    }
    let chunk = len.div_ceil(engines);
    (0..len)
        .step_by(chunk)
        .map(|start| start..(start + chunk).min(len))
        .collect()
}

/// Prices `options` across `config.engines` independent pipelines.
pub fn run_engines(
    options: &[CdsOption],
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
) -> Result<BatchResults> {
    run_engines_inner(options, interest, hazard, config, None)
}

/// [`run_engines`] with stage counters recorded under `engine{i}/` prefixes.
pub fn run_engines_probed(
    options: &[CdsOption],
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
    probe: &Probe,
) -> Result<BatchResults> {
    run_engines_inner(options, interest, hazard, config, Some(probe))
}

fn run_engines_inner(
    options: &[CdsOption],
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
    probe: Option<&Probe>,
) -> Result<BatchResults> {
    config.validate()?;
    if config.engines == 1 {
        return pipeline::run_graph(
            options.iter().copied(),
            0,
            "",
            interest,
            hazard,
            config,
            probe,
            None,
        );
    }
    let chunks = partition(options.len(), config.engines);
    let per_engine: Vec<Result<BatchResults>> = thread::scope(|s| {
        let handles: Vec<_> = chunks
            .iter()
            .enumerate()
            .map(|(engine, range)| {
                let slice = &options[range.clone()];
                let base = range.start;
                s.spawn(move || {
                    let prefix = format!("engine{engine}/");
                    pipeline::run_graph(
                        slice.iter().copied(),
                        base,
                        &prefix,
                        interest,
                        hazard,
                        config,
                        probe,
                        None,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .enumerate()
            .map(|(engine, h)| {
                h.join().unwrap_or_else(|_| {
                    Err(CdsError::Stage {
                        stage: format!("engine{engine}"),
                        reason: "engine driver panicked".into(),
                    })
                })
            })
            .collect()
    });
    let mut merged = Vec::with_capacity(options.len());
    for results in per_engine {
        merged.extend(results?);
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_shapes() {
        assert_eq!(partition(10, 1), vec![0..10]);
        assert_eq!(partition(10, 3), vec![0..4, 4..8, 8..10]);
        assert_eq!(partition(1000, 5).len(), 5);
        assert_eq!(partition(3, 8), vec![0..1, 1..2, 2..3]);
        assert!(partition(0, 4).is_empty());
    }

    #[test]
    fn partition_covers_everything_once() {
        for len in 0..60 {
            for n in 1..12 {
                let parts = partition(len, n);
                assert!(parts.len() <= n);
                let flat: Vec<usize> = parts.into_iter().flatten().collect();
                assert_eq!(flat, (0..len).collect::<Vec<_>>());
            }
        }
    }
}
