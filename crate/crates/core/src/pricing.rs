//! Sequential reference engine.
//!
//! For a grid `t_1 < ... < t_n` with `t_0 = 0`, `D` the discount factor,
//! `S` the survival probability and `m_i` the period midpoint:
//!
//! * premium  = Σ Δt_i · D(t_i) · S(t_i)
//! * payoff   = (1 − R) · Σ D(m_i) · (S(t_{i−1}) − S(t_i))
//! * accrual  = Σ (Δt_i / 2) · D(m_i) · (S(t_{i−1}) − S(t_i))
//! * spread   = 10000 · payoff / (premium + accrual)   [bps]
//!
//! Every sum here is a plain running sum; the dataflow engine computes the
//! same terms with strided accumulation and is checked against this module.

use serde::{Deserialize, Serialize};

use crate::curves::{self, CurveKind, TermStructure};
use crate::error::{CdsError, Result};
use crate::schedule::{generate_time_points, CdsOption, TimeGrid};

/// Basis points per unit of spread.
pub const BPS: f64 = 10_000.0;

/// Present values per unit notional. `premium_pv` and `accrual_pv` are
/// additionally per unit of running spread.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LegValues {
    pub premium_pv: f64,
    pub payoff_pv: f64,
    pub accrual_pv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadResult {
    pub option_index: usize,
    pub spread_bps: f64,
    pub legs: LegValues,
}

fn check_curves(interest: &TermStructure, hazard: &TermStructure) -> Result<()> {
    if interest.kind() != CurveKind::Interest {
        return Err(CdsError::Domain(
            "first curve must be an interest curve".into(),
        ));
    }
    if hazard.kind() != CurveKind::Hazard {
        return Err(CdsError::Domain(
            "second curve must be a hazard curve".into(),
        ));
    }
    Ok(())
}

pub fn premium_leg(
    grid: &TimeGrid,
    interest: &TermStructure,
    hazard: &TermStructure,
) -> Result<f64> {
    check_curves(interest, hazard)?;
    let mut sum = 0.0;
    for (prev, t) in grid.periods() {
        sum += (t - prev)
            * curves::discount_factor(interest, t)?
            * curves::survival_probability(hazard, t)?;
    }
    Ok(sum)
}

/// Σ D(m_i) · (S(t_{i−1}) − S(t_i)): protection before the loss-given-default factor.
fn default_weighted_sums(
    grid: &TimeGrid,
    interest: &TermStructure,
    hazard: &TermStructure,
) -> Result<(f64, f64)> {
    check_curves(interest, hazard)?;
    let mut protection = 0.0;
    let mut accrual = 0.0;
    let mut s_prev = 1.0;
    for (prev, t) in grid.periods() {
        let s = curves::survival_probability(hazard, t)?;
        let weighted = curves::discount_factor(interest, 0.5 * (prev + t))? * (s_prev - s);
        protection += weighted;
        accrual += 0.5 * (t - prev) * weighted;
        s_prev = s;
    }
    Ok((protection, accrual))
}

pub fn payoff_leg(
    grid: &TimeGrid,
    interest: &TermStructure,
    hazard: &TermStructure,
    recovery_rate: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&recovery_rate) {
        return Err(CdsError::InvalidOption(format!(
            "recovery rate {recovery_rate} must lie in [0, 1]"
        )));
    }
    let (protection, _) = default_weighted_sums(grid, interest, hazard)?;
    Ok((1.0 - recovery_rate) * protection)
}

pub fn accrual_leg(
    grid: &TimeGrid,
    interest: &TermStructure,
    hazard: &TermStructure,
) -> Result<f64> {
    Ok(default_weighted_sums(grid, interest, hazard)?.1)
}

/// All three legs in one pass over the grid.
pub fn leg_values(
    grid: &TimeGrid,
    interest: &TermStructure,
    hazard: &TermStructure,
    recovery_rate: f64,
) -> Result<LegValues> {
    check_curves(interest, hazard)?;
    let mut premium = 0.0;
    let mut protection = 0.0;
    let mut accrual = 0.0;
    let mut s_prev = 1.0;
    for (prev, t) in grid.periods() {
        let dt = t - prev;
        let s = curves::survival_probability(hazard, t)?;
        premium += dt * curves::discount_factor(interest, t)? * s;
        let weighted = curves::discount_factor(interest, 0.5 * (prev + t))? * (s_prev - s);
        protection += weighted;
        accrual += 0.5 * dt * weighted;
        s_prev = s;
    }
    Ok(LegValues {
        premium_pv: premium,
        payoff_pv: (1.0 - recovery_rate) * protection,
        accrual_pv: accrual,
    })
}

/// `10000 · payoff / (premium + accrual)`.
pub fn fair_spread(legs: &LegValues) -> Result<f64> {
    let denominator = legs.premium_pv + legs.accrual_pv;
    if denominator.is_nan() || denominator <= 0.0 || denominator.is_infinite() {
        return Err(CdsError::DegenerateLegs(denominator));
    }
    let spread = BPS * legs.payoff_pv / denominator;
    if !spread.is_finite() {
        return Err(CdsError::Domain(format!("spread {spread} is not finite")));
    }
    Ok(spread)
}

/// Prices one option; errors carry `option_index`.
pub fn price_option(
    option: &CdsOption,
    interest: &TermStructure,
    hazard: &TermStructure,
    option_index: usize,
) -> Result<SpreadResult> {
    let run = || -> Result<SpreadResult> {
        let grid = generate_time_points(option)?;
        let legs = leg_values(&grid, interest, hazard, option.recovery_rate)?;
        Ok(SpreadResult {
            option_index,
            spread_bps: fair_spread(&legs)?,
            legs,
        })
    };
    run().map_err(|e| e.at_option(option_index))
}

/// Prices a batch in order, one result per option.
pub fn price_batch(
    options: &[CdsOption],
    interest: &TermStructure,
    hazard: &TermStructure,
) -> Vec<Result<SpreadResult>> {
    options
        .iter()
        .enumerate()
        .map(|(i, option)| price_option(option, interest, hazard, i))
        .collect()
}
