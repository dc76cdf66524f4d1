//! Cardinal comparison tests for pairs of sequential probabilistic
//! forecasters.
//!
//! The crate is organized bottom-up:
//!
//! - [`forecast`], [`history`], [`strategy`], [`sampling`]: outcomes, play
//!   histories with log prefix probabilities, deterministic forecasting
//!   strategies and seeded path generation.
//! - [`comparison`]: the test interface and the concrete tests (𝒟, L, the
//!   constant fair test, the scaled test T_c and the h₂ counterexample).
//! - [`axioms`]: exact and Monte Carlo checks of error-freeness and
//!   reasonableness.
//! - [`convergence`]: ε-closeness, the stopped likelihood-ratio process and
//!   the finite-time decisiveness experiments.
//! - [`calibration`]: the multi-expert cross-calibration test.
//! - [`experiments`]: configs, presets and the artifact-writing runner.

pub mod axioms;
pub mod calibration;
pub mod comparison;
pub mod convergence;
pub mod error;
pub mod experiments;
pub mod forecast;
pub mod history;
pub mod sampling;
pub mod stats;
pub mod strategy;
pub mod tree;

pub use error::{Error, Result};
pub use forecast::{Alphabet, Forecast, OutcomePrefix};
pub use history::{LogPrefixProb, PlayEntry, PlayHistory, PlayPath, Prefix, RatioState, Seat};
pub use strategy::{parse_strategy, ForecastingStrategy, Strategy};
