//! Shared fixtures for the criterion benchmarks.

use cds_core::io::{generate_workload, Workload, DEFAULT_RATE_NODES};

/// Seeded workload over the default 1024-node curves.
pub fn workload(num_options: usize) -> Workload {
    generate_workload(num_options, DEFAULT_RATE_NODES, 0xC0FFEE).expect("valid workload parameters")
}

/// Deterministic values in [-1, 1).
pub fn noise(len: usize) -> Vec<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}
