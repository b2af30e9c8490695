//! Strided partial-sum accumulation.
//!
//! A single running sum serialises every addition behind the previous one.
//! Spreading the terms over `L` independent partial sums (term `k` goes to lane
//! `k mod L`) removes that chain; the lanes are folded left to right at the
//! end. The result differs from a naive left fold only by rounding.

use crate::error::{CdsError, Result};

/// Lane count used when none is configured: one lane per cycle of a
/// seven-cycle double-precision add.
pub const DEFAULT_LANES: usize = 7;

/// `L` replicated partial sums fed cyclically.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneAccumulator {
    lanes: Vec<f64>,
    next: usize,
}

impl LaneAccumulator {
    pub fn new(lanes: usize) -> Result<Self> {
        if lanes == 0 {
            return Err(CdsError::ZeroLanes);
        }
        Ok(Self {
            lanes: vec![0.0; lanes],
            next: 0,
        })
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    /// Adds `value` into the lane after the one used last.
    #[inline]
    pub fn push(&mut self, value: f64) {
        self.lanes[self.next] += value;
        self.next += 1;
        if self.next == self.lanes.len() {
            self.next = 0;
        }
    }

    /// Partial sums, lane 0 first.
    pub fn partials(&self) -> &[f64] {
        &self.lanes
    }

    /// Sequential left-to-right fold over the lanes.
    pub fn total(&self) -> f64 {
        self.lanes.iter().fold(0.0, |acc, &lane| acc + lane)
    }

    /// Zeroes every lane and rewinds to lane 0.
    pub fn reset(&mut self) {
        self.lanes.iter_mut().for_each(|lane| *lane = 0.0);
        self.next = 0;
    }
}

/// Sum of `values`, element `k` accumulated into lane `k mod lanes`.
///
/// Lengths that are not a multiple of `lanes` are handled: the trailing
/// partial chunk lands in the leading lanes. Empty input sums to `0.0`.
pub fn strided_sum(values: &[f64], lanes: usize) -> Result<f64> {
    if lanes == 0 {
        return Err(CdsError::ZeroLanes);
    }
    Ok(strided_fold(values.iter().copied(), lanes))
}

/// Strided sum of `weight * value` products, same lane assignment as
/// [`strided_sum`].
pub fn strided_weighted_sum(pairs: &[(f64, f64)], lanes: usize) -> Result<f64> {
    if lanes == 0 {
        return Err(CdsError::ZeroLanes);
    }
    Ok(strided_fold(pairs.iter().map(|&(w, v)| w * v), lanes))
}

/// Lane-structured fold over an iterator of terms. `lanes` must be non-zero.
pub(crate) fn strided_fold(terms: impl Iterator<Item = f64>, lanes: usize) -> f64 {
    debug_assert!(lanes > 0);
    // Stack lanes cover every configuration we ship; larger counts spill.
    const INLINE: usize = 16;
    if lanes <= INLINE {
        let mut partial = [0.0f64; INLINE];
        let mut lane = 0;
        for term in terms {
            partial[lane] += term;
            lane += 1;
            if lane == lanes {
                lane = 0;
            }
        }
        partial[..lanes].iter().fold(0.0, |acc, &p| acc + p)
    } else {
        let mut acc = LaneAccumulator {
            lanes: vec![0.0; lanes],
            next: 0,
        };
        terms.for_each(|t| acc.push(t));
        acc.total()
    }
}
