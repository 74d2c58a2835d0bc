//! Small-network nonlinear least squares.
//!
//! A 2-input, 2-output perceptron with one sigmoid hidden layer and a linear
//! output layer, trained full-batch by Levenberg-Marquardt on analytic
//! Jacobians. Around it sits the tooling for a composite-material surrogate
//! study: CSV ingestion, augmentation by reversed tensile forces, min-max
//! scaling, hidden-size search, validation and recall reports, and SVG plots.
//!
//! Module map:
//!
//! - [`dataset`]: specimens, CSV parsing, augmentation, group means, scaling.
//! - [`network`]: parameters, forward pass, residuals and Jacobian.
//! - [`linalg`]: the dense matrix and Cholesky solve used by the trainer.
//! - [`trainer`]: the LM loop, seeded initialization, best-of-restarts.
//! - [`model`]: a trained network bundled with its scaler, and its snapshot file.
//! - [`experiment`]: MSE, validation and recall reports, hidden-size search.
//! - [`plot`]: static SVG of actual vs simulated outputs.
//! - [`cli`]: the `lmnet` command-line front end.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod network;
pub mod plot;
pub mod trainer;

pub use dataset::{Dataset, GroupKey, Layout, Measured, Role, Samples, Scaler, Specimen};
pub use error::{Error, Result};
pub use model::Model;
pub use network::MlpParams;
pub use trainer::{LmConfig, LmState, StopReason, TrainHistory};
