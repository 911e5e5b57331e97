//! Benchmark construction and evaluation toolkit for time-series forecasting.
//!
//! The crate is organised along the benchmark workflow:
//!
//! * [`corpus`] loads datasets, infers frequencies, rectifies timestamps and
//!   enumerates non-overlapping test windows.
//! * [`screening`] runs the automated quality-assurance checks and applies
//!   curator decisions to produce finalized datasets.
//! * [`features`] decomposes variates with STL, extracts the seven structural
//!   features and encodes them as 7-bit pattern codes.
//! * [`metrics`] holds the forecast-quality kernels (Seasonal Naive, MASE,
//!   quantile-loss CRPS).
//! * [`evaluation`] scores forecast archives window by window, normalizes
//!   against Seasonal Naive and builds geometric-mean leaderboards.
//! * [`pipeline`] and [`server`] drive the stages from disk artifacts and
//!   expose them over HTTP.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod metrics;
pub mod pipeline;
pub mod screening;
pub mod server;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
