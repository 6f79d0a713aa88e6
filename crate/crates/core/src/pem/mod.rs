//! Predictive entropy maximization: fast output inference and slow plasticity.
//!
//! Per sample the separator relaxes its output `y` along the truncated negative
//! gradient of the surrogate cost (variance drive, covariance reduction, predictive
//! correction), passes it through the domain nonlinearity, then updates the
//! feedforward weights with the prediction error and folds `y` into the running
//! mean, variance and cross-covariance traces.

mod checkpoint;
mod config;
pub(crate) mod inference;
mod online;
mod presets;
mod schedule;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use config::{CovInit, InitConfig, PemConfig, Variant};
pub use inference::{direction, infer_output, Inference};
pub use online::{run_online, OnlineRun, TraceSample};
pub use presets::{parse_preset_name, preset, preset_names, GAMMA_LATERAL};
pub use schedule::{ScheduleRule, StepSchedule};
pub use state::{init_state, slow_update, PemState};
