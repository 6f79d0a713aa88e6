//! Experiment description files (TOML).
//!
//! ```toml
//! name = "desk"
//! domain = "antisparse"
//! n = 3
//! m = 6
//! T = 20000
//! mixing_dist = "gaussian"
//! snr_in_db = 30.0          # omit for noiseless mixtures
//! seeds = [0, 1, 2]
//! diag_stride = 100         # optional
//!
//! [source_model]
//! kind = "copula_t"         # or "uniform"
//! rho = 0.2
//! nu = 4.0
//!
//! [pem]
//! preset = "antisparse"     # or "u-pem/antisparse"; defaults to the domain
//! tau_max = 250             # any preset value may be overridden
//!
//! [pem.init]
//! cov = "gram"              # or "scaled"
//! ```

use std::path::Path;

use pem::datagen::MixingDistribution;
use pem::pem::{parse_preset_name, preset, CovInit, PemConfig, ScheduleRule, StepSchedule};
use pem::SourceDomain;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub domain: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(default)]
    pub source_model: SourceModelSpec,
    #[serde(default = "default_mixing")]
    pub mixing_dist: String,
    #[serde(default)]
    pub snr_in_db: Option<f64>,
    #[serde(default)]
    pub pem: PemSpec,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub diag_stride: Option<usize>,
}

fn default_mixing() -> String {
    "gaussian".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModelSpec {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

fn default_kind() -> String {
    "uniform".into()
}

fn default_nu() -> f64 {
    4.0
}

impl Default for SourceModelSpec {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            rho: 0.0,
            nu: default_nu(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PemSpec {
    pub preset: Option<String>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma_pred: Option<f64>,
    pub gamma_lateral: Option<f64>,
    pub eta_lambda: Option<f64>,
    pub tau_max: Option<usize>,
    pub inner_tol: Option<f64>,
    pub exact_normalization: Option<bool>,
    pub warm_start_threshold: Option<bool>,
    pub w_schedule: Option<ScheduleSpec>,
    pub y_schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub init: InitSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub rule: String,
    pub base: f64,
    #[serde(default = "one")]
    pub divider: f64,
    #[serde(default)]
    pub floor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub w_diag: Option<f64>,
    pub w_noise: Option<f64>,
    /// `"scaled"` or `"gram"`.
    pub cov: Option<String>,
    pub c0_scale: Option<f64>,
    pub gram_diag: Option<f64>,
    pub gram_noise_var: Option<f64>,
    pub mu0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceModel {
    Uniform,
    CopulaT { rho: f64, nu: f64 },
}

impl SourceModel {
    pub fn rho(&self) -> f64 {
        match self {
            SourceModel::Uniform => 0.0,
            SourceModel::CopulaT { rho, .. } => *rho,
        }
    }
}

/// A validated experiment with its resolved separator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub domain: SourceDomain,
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub source: SourceModel,
    pub mixing: MixingDistribution,
    pub snr_in_db: Option<f64>,
    pub pem: PemConfig,
    pub seeds: Vec<u64>,
    pub diag_stride: Option<usize>,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        spec.resolve()
    }

    /// The same experiment observed through `m` mixtures.
    pub fn with_m(&self, m: usize) -> Self {
        let mut e = self.clone();
        e.m = m;
        e.pem.m = m;
        e
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl ExperimentSpec {
    pub fn resolve(&self) -> Result<Experiment, CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(bad("name must be a non-empty file stem"));
        }
        let domain: SourceDomain = self.domain.parse().map_err(|e: pem::Error| bad(e.to_string()))?;
        if self.n < 2 || self.m < self.n {
            return Err(bad(format!("need m >= n >= 2, got n={}, m={}", self.n, self.m)));
        }
        if self.t < 1 {
            return Err(bad("T must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(bad("seeds must not be empty"));
        }
        if self.diag_stride == Some(0) {
            return Err(bad("diag_stride must be positive"));
        }
        if let Some(snr) = self.snr_in_db {
            if !snr.is_finite() {
                return Err(bad("snr_in_db must be finite"));
            }
        }
        let mixing: MixingDistribution = self.mixing_dist.parse().map_err(|e: pem::Error| bad(e.to_string()))?;
        let source = match self.source_model.kind.as_str() {
            "uniform" => SourceModel::Uniform,
            "copula_t" => {
                if !domain.is_box() {
                    return Err(bad(format!("copula_t sources need a box domain, got {domain}")));
                }
                let (rho, nu) = (self.source_model.rho, self.source_model.nu);
                if !(0.0..1.0).contains(&rho) || !(nu > 0.0 && nu.is_finite()) {
                    return Err(bad(format!(
                        "copula_t needs rho in [0, 1) and nu > 0, got rho={rho}, nu={nu}"
                    )));
                }
                SourceModel::CopulaT { rho, nu }
            }
            other => return Err(bad(format!("unknown source model {other:?}"))),
        };
        let pem = self.pem.resolve(domain, self.n, self.m)?;
        Ok(Experiment {
            name: self.name.clone(),
            domain,
            n: self.n,
            m: self.m,
            t: self.t,
            source,
            mixing,
            snr_in_db: self.snr_in_db,
            pem,
            seeds: self.seeds.clone(),
            diag_stride: self.diag_stride,
        })
    }
}

impl ScheduleSpec {
    fn resolve(&self) -> Result<StepSchedule, CliError> {
        let rule: ScheduleRule = self.rule.parse().map_err(|e: pem::Error| bad(e.to_string()))?;
        Ok(StepSchedule::new(rule, self.base, self.divider, self.floor))
    }
}

impl PemSpec {
    pub fn resolve(&self, domain: SourceDomain, n: usize, m: usize) -> Result<PemConfig, CliError> {
        let name = self.preset.clone().unwrap_or_else(|| domain.name().to_string());
        let (preset_domain, variant) = parse_preset_name(&name).map_err(|e| bad(e.to_string()))?;
        if preset_domain != domain {
            return Err(bad(format!("preset {name:?} does not match domain {domain}")));
        }
        let mut cfg = preset(domain, variant, n, m);
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            };
        }
        take!(lambda);
        take!(epsilon);
        take!(gamma_pred);
        take!(tau_max);
        take!(inner_tol);
        take!(exact_normalization);
        take!(warm_start_threshold);
        if self.gamma_lateral.is_some() {
            cfg.gamma_lateral = self.gamma_lateral;
        }
        if self.eta_lambda.is_some() {
            cfg.eta_lambda = self.eta_lambda;
        }
        if let Some(s) = &self.w_schedule {
            cfg.w_schedule = s.resolve()?;
        }
        if let Some(s) = &self.y_schedule {
            cfg.y_schedule = s.resolve()?;
        }

        let init = &self.init;
        if let Some(v) = init.w_diag {
            cfg.init.w_diag = v;
        }
        if let Some(v) = init.w_noise {
            cfg.init.w_noise = v;
        }
        if let Some(v) = init.mu0 {
            cfg.init.mu0 = v;
        }
        match init.cov.as_deref() {
            None | Some("scaled") => {
                if init.gram_diag.is_some() || init.gram_noise_var.is_some() {
                    return Err(bad("gram_diag / gram_noise_var need cov = \"gram\""));
                }
                if let Some(c) = init.c0_scale {
                    cfg.init.cov = CovInit::Scaled(c);
                }
            }
            Some("gram") => {
                if init.c0_scale.is_some() {
                    return Err(bad("c0_scale needs cov = \"scaled\""));
                }
                cfg.init.cov = CovInit::Gram {
                    diag: init.gram_diag.unwrap_or(0.2),
                    noise_var: init.gram_noise_var.unwrap_or(0.2),
                };
            }
            Some(other) => return Err(bad(format!("unknown covariance initialization {other:?}"))),
        }

        cfg.validate().map_err(|e| bad(e.to_string()))?;
        Ok(cfg)
    }
}
