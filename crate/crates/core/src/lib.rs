//! Online blind source separation by predictive entropy maximization (PEM).
//!
//! The separator maximizes a second-order Taylor surrogate of the log-determinant
//! output entropy under a geometric source-domain constraint. Each incoming mixture
//! sample is processed in two stages: a fast recurrent relaxation of the output
//! activity, followed by local updates of the feedforward weights and of streaming
//! variance / cross-covariance traces.
//!
//! ## Modules
//!
//! - [`math`]: dense symmetric linear algebra and Student-t distribution functions
//! - [`domains`]: the five source domains, their output nonlinearities and projections
//! - [`datagen`]: seeded source, mixing-matrix and noisy-mixture generation
//! - [`pem`]: schedules, configuration, fast inference, slow updates, presets
//! - [`diagnostics`]: surrogate vs exact objective, Taylor remainder and its bounds
//! - [`metrics`]: permutation/sign alignment, mSNR, confidence intervals

pub mod datagen;
pub mod diagnostics;
pub mod domains;
pub mod error;
pub mod math;
pub mod metrics;
pub mod pem;
pub mod rng;

pub use domains::SourceDomain;
pub use error::{Error, Result};
pub use math::{Matrix, SymmetricMatrix};
