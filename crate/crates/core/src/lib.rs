//! Desk-scale toolkit for studying channel dependence in multivariate
//! time-series forecasting.
//!
//! The crate covers the full loop:
//!
//! * [`ode`] — deterministic generation of six chaotic-ODE benchmark series
//!   by fixed-step RK4 integration of explicitly parameterized systems.
//! * [`granger`] — channel-dependence analysis: Pearson redundancy filter,
//!   ADF stationarity testing with iterative differencing, pairwise Granger
//!   F-tests, and dataset-level aggregation.
//! * [`forecast`] — closed-form ridge linear forecasters in
//!   channel-independent (CI) and channel-dependent (CD) variants, with
//!   moving-average decomposition and reversible instance normalization.
//! * [`tune`] — seeded random hyperparameter search that treats the lookback
//!   window as a first-class hyperparameter, selecting on validation MSE.
//! * [`report`] — aggregation of test MSEs into rank/wins tables, CI-vs-CD
//!   matchup counts, and best-lookback histograms.
//!
//! Everything is deterministic: all randomness flows through [`rng::SplitMix64`]
//! seeded from explicit seed values, and all collection outputs are ordered.

pub mod error;
pub mod forecast;
pub mod granger;
pub mod linalg;
pub mod ode;
pub mod parallel;
pub mod report;
pub mod rng;
pub mod series;
pub mod tune;
pub mod window;

pub use error::{Error, Result};
pub use forecast::{ChannelMode, Family, FittedForecaster, ForecasterSpec, RevinContext};
pub use granger::{GrangerConfig, GrangerReport, PairResult};
pub use linalg::Matrix;
pub use ode::{IntegratorConfig, OdeSystem, SystemKind};
pub use report::{ResultsTable, SummaryReport};
pub use series::{Normalizer, SplitSpec, TimeSeries};
pub use tune::{SearchSpace, TrialResult, TuneReport, TunerSettings};
pub use window::WindowedDataset;
