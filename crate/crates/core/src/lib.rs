//! Analytic and simulated outage / sum-rate evaluation for two-user NOMA in a
//! visible-light downlink with randomly oriented receivers.

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numerics;
pub mod rates;
pub mod stochastic;

pub use error::{Error, Result};
