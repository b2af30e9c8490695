//! Interest and hazard term structures.
//!
//! Interest curves hold continuously-compounded zero rates, linearly
//! interpolated, with `D(t) = exp(-r(t) t)`. Hazard curves are piecewise
//! constant: node `i` applies on `[t_i, t_{i+1})`, the first node also covers
//! `[0, t_0)` and the last node extends to infinity. Both extrapolate flat.

use serde::{Deserialize, Serialize};

use crate::error::{CdsError, Result};
use crate::reduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Interest,
    Hazard,
}

impl std::fmt::Display for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveKind::Interest => f.write_str("interest"),
            CurveKind::Hazard => f.write_str("hazard"),
        }
    }
}

/// One curve node: a year fraction and an annualised decimal rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub time: f64,
    #[serde(rename = "rate")]
    pub value: f64,
}

impl RatePoint {
    pub fn new(time: f64, value: f64) -> Self {
        Self { time, value }
    }
}

/// Immutable, validated term structure.
#[derive(Debug, Clone, PartialEq)]
pub struct TermStructure {
    kind: CurveKind,
    times: Vec<f64>,
    rates: Vec<f64>,
}

impl TermStructure {
    /// Builds a curve, checking that nodes are non-empty, times are finite,
    /// non-negative and strictly increasing, rates are finite, and hazard
    /// rates are non-negative.
    pub fn new(kind: CurveKind, nodes: impl IntoIterator<Item = RatePoint>) -> Result<Self> {
        let mut times = Vec::new();
        let mut rates = Vec::new();
        for (index, node) in nodes.into_iter().enumerate() {
            check_node(kind, index, node, times.last().copied())?;
            times.push(node.time);
            rates.push(node.value);
        }
        if times.is_empty() {
            return Err(CdsError::InvalidCurve {
                index: 0,
                reason: "term structure has no nodes".into(),
            });
        }
        Ok(Self { kind, times, rates })
    }

    /// Single-node curve, flat at `rate` for all times.
    pub fn flat(kind: CurveKind, rate: f64) -> Result<Self> {
        Self::new(kind, [RatePoint::new(0.0, rate)])
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = RatePoint> + '_ {
        self.times
            .iter()
            .zip(&self.rates)
            .map(|(&time, &value)| RatePoint { time, value })
    }

    /// Same node times with every rate transformed by `f`, revalidated.
    pub fn map_rates(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.kind,
            self.nodes().map(|n| RatePoint::new(n.time, f(n.value))),
        )
    }

    /// Hazard segments overlapping `[0, t]` as `(width, rate)` pairs, in
    /// time order. Segments starting at or after `t` are not produced.
    pub fn hazard_segments(&self, t: f64) -> HazardSegments<'_> {
        HazardSegments {
            curve: self,
            t,
            next: 0,
        }
    }

    fn expect_kind(&self, kind: CurveKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(CdsError::Domain(format!(
                "expected a {kind} curve, got a {} curve",
                self.kind
            )))
        }
    }
}

pub(crate) fn check_node(
    kind: CurveKind,
    index: usize,
    node: RatePoint,
    prev_time: Option<f64>,
) -> Result<()> {
    let fail = |reason: String| Err(CdsError::InvalidCurve { index, reason });
    if !node.time.is_finite() || node.time < 0.0 {
        return fail(format!("time {} must be finite and >= 0", node.time));
    }
    if !node.value.is_finite() {
        return fail(format!("rate {} is not finite", node.value));
    }
    if kind == CurveKind::Hazard && node.value < 0.0 {
        return fail(format!("hazard rate {} is negative", node.value));
    }
    if let Some(prev) = prev_time {
        if node.time <= prev {
            return fail(format!(
                "time {} does not follow previous time {prev}",
                node.time
            ));
        }
    }
    Ok(())
}

/// Iterator returned by [`TermStructure::hazard_segments`].
pub struct HazardSegments<'a> {
    curve: &'a TermStructure,
    t: f64,
    next: usize,
}

impl Iterator for HazardSegments<'_> {
    type Item = (f64, f64);

    #[inline]
    fn next(&mut self) -> Option<(f64, f64)> {
        let i = self.next;
        let times = &self.curve.times;
        if i >= times.len() {
            return None;
        }
        let start = if i == 0 { 0.0 } else { times[i] };
        if start >= self.t {
            return None;
        }
        let end = match times.get(i + 1) {
            Some(&next) if next < self.t => next,
            _ => self.t,
        };
        self.next = i + 1;
        Some((end - start, self.curve.rates[i]))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(CdsError::Domain(format!(
            "time {t} must be finite and >= 0"
        )))
    }
}

/// Linear interpolation between bracketing nodes, flat outside the node range.
pub fn interpolate_rate(ts: &TermStructure, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(interpolate_unchecked(ts, t))
}

#[inline]
pub(crate) fn interpolate_unchecked(ts: &TermStructure, t: f64) -> f64 {
    let times = &ts.times;
    let rates = &ts.rates;
    let hi = times.partition_point(|&x| x <= t);
    if hi == 0 {
        return rates[0];
    }
    if hi == times.len() {
        return rates[hi - 1];
    }
    let lo = hi - 1;
    let w = (t - times[lo]) / (times[hi] - times[lo]);
    rates[lo] + w * (rates[hi] - rates[lo])
}

/// `exp(-r(t) t)` with `r` linearly interpolated.
pub fn discount_factor(interest: &TermStructure, t: f64) -> Result<f64> {
    interest.expect_kind(CurveKind::Interest)?;
    let r = interpolate_rate(interest, t)?;
    Ok((-r * t).exp())
}

/// Cumulative hazard `H(t)`, accumulated with a single running sum.
pub fn cumulative_hazard(hazard: &TermStructure, t: f64) -> Result<f64> {
    hazard.expect_kind(CurveKind::Hazard)?;
    check_time(t)?;
    Ok(hazard
        .hazard_segments(t)
        .fold(0.0, |acc, (width, rate)| acc + width * rate))
}

/// Cumulative hazard `H(t)` accumulated over `lanes` strided partial sums.
pub fn cumulative_hazard_strided(hazard: &TermStructure, t: f64, lanes: usize) -> Result<f64> {
    hazard.expect_kind(CurveKind::Hazard)?;
    check_time(t)?;
    if lanes == 0 {
        return Err(CdsError::ZeroLanes);
    }
    Ok(reduce::strided_fold(
        hazard.hazard_segments(t).map(|(width, rate)| width * rate),
        lanes,
    ))
}

/// `exp(-H(t))`.
pub fn survival_probability(hazard: &TermStructure, t: f64) -> Result<f64> {
    Ok((-cumulative_hazard(hazard, t)?).exp())
}

/// `exp(-H(t))` with `H` from the strided accumulation.
pub fn survival_probability_strided(hazard: &TermStructure, t: f64, lanes: usize) -> Result<f64> {
    Ok((-cumulative_hazard_strided(hazard, t, lanes)?).exp())
}

/// `1 - S(t)`.
pub fn default_probability(hazard: &TermStructure, t: f64) -> Result<f64> {
    Ok(1.0 - survival_probability(hazard, t)?)
}
