//! Per-option time grids.

use serde::{Deserialize, Serialize};

use crate::error::{CdsError, Result};

/// Tolerance below which two grid times are considered the same point.
pub const TIME_EPSILON: f64 = 1e-12;

/// One pricing request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdsOption {
    /// Year fraction at which protection ends.
    pub maturity: f64,
    /// Premium payments per year.
    #[serde(rename = "frequency")]
    pub payment_frequency: u32,
    #[serde(rename = "recovery")]
    pub recovery_rate: f64,
}

impl CdsOption {
    pub fn new(maturity: f64, payment_frequency: u32, recovery_rate: f64) -> Result<Self> {
        let option = Self {
            maturity,
            payment_frequency,
            recovery_rate,
        };
        option.validate()?;
        Ok(option)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.maturity.is_finite() || self.maturity <= 0.0 {
            return Err(CdsError::InvalidOption(format!(
                "maturity {} must be finite and > 0",
                self.maturity
            )));
        }
        if self.payment_frequency < 1 {
            return Err(CdsError::InvalidOption(
                "payment frequency must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.recovery_rate) {
            return Err(CdsError::InvalidOption(format!(
                "recovery rate {} must lie in [0, 1]",
                self.recovery_rate
            )));
        }
        Ok(())
    }
}

/// Payment times `t_1 < ... < t_n = maturity`; `t_0 = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn maturity(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }

    /// `(t_{i-1}, t_i)` pairs starting from `(0, t_1)`.
    pub fn periods(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.points.iter().enumerate().map(|(i, &t)| {
            let prev = if i == 0 { 0.0 } else { self.points[i - 1] };
            (prev, t)
        })
    }
}

/// Regular points `k / frequency` up to maturity, plus a short stub period
/// ending exactly at maturity when maturity is off the regular grid.
pub fn generate_time_points(option: &CdsOption) -> Result<TimeGrid> {
    option.validate()?;
    let freq = f64::from(option.payment_frequency);
    let maturity = option.maturity;
    let whole = ((maturity + TIME_EPSILON) * freq).floor() as u64;

    let mut points = Vec::with_capacity(whole as usize + 1);
    points.extend((1..=whole).map(|k| k as f64 / freq));
    match points.last_mut() {
        Some(last) if (maturity - *last).abs() <= TIME_EPSILON => *last = maturity,
        _ => points.push(maturity),
    }
    Ok(TimeGrid { points })
}
