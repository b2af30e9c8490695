//! Credit default swap fair-spread pricing.
//!
//! Two engines compute the same model:
//!
//! * [`pricing`]: a sequential reference implementation with plain running
//!   sums, used as the oracle.
//! * [`pipeline`]: a staged dataflow engine with one thread per stage,
//!   bounded streams, replicated survival workers behind a round-robin
//!   scheduler, and strided accumulation ([`reduce`]). [`scaler`] splits a
//!   batch across several such engines.
//!
//! Curves live in [`curves`], time grids in [`schedule`], file formats and
//! workload generation in [`io`], throughput measurement in [`throughput`].

pub mod curves;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod pricing;
pub mod reduce;
pub mod scaler;
pub mod schedule;
pub mod throughput;

pub use curves::{
    default_probability, discount_factor, interpolate_rate, survival_probability, CurveKind,
    RatePoint, TermStructure,
};
pub use error::{CdsError, Result};
pub use pipeline::{run_pipeline, EngineConfig, Probe};
pub use pricing::{fair_spread, price_batch, price_option, LegValues, SpreadResult};
pub use reduce::{strided_sum, strided_weighted_sum, LaneAccumulator};
pub use scaler::run_engines;
pub use schedule::{generate_time_points, CdsOption, TimeGrid};
