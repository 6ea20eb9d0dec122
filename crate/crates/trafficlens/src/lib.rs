//! Multi-modal traffic analytics engine.
//!
//! Three pipelines share one crate:
//!
//! * [`timeseries`] — ARIMA estimation, multi-step forecasting and classical
//!   additive decomposition of hourly traffic volumes.
//! * [`tabular`] — accident-severity classification: a shared CART learner
//!   powering second-order gradient boosting, random forests and a softmax
//!   regression baseline, plus balancing, importance, grid search and
//!   ensembling.
//! * [`vision`] — a small from-scratch convolutional classifier for
//!   four-class traffic-scene images, with augmentation and gradient
//!   verification.
//!
//! [`datamodel`] holds the shared domain types and dataset-split machinery,
//! [`metrics`] the evaluation and benchmarking tools, and [`datasynth`]
//! seeded generators that reproduce the dataset shapes the pipelines expect.
//!
//! Every seeded entry point is deterministic: the same seed yields
//! bit-identical output on repeated runs.

pub mod datamodel;
pub mod datasynth;
pub mod metrics;
pub(crate) mod rng;
pub mod tabular;
pub mod timeseries;
pub mod vision;
