use std::fmt;
use std::str::FromStr;

use crate::domains::SourceDomain;
use crate::error::{invalid, Error, Result};

use super::schedule::StepSchedule;

/// Lateral-interaction form of the inference direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Cross-covariance coupling normalized by both output variances.
    Normalized,
    /// Cross-covariance coupling scaled by a constant `gamma_lateral` (u-PEM).
    Unnormalized,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Normalized => "pem",
            Variant::Unnormalized => "u-pem",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pem" | "normalized" => Ok(Variant::Normalized),
            "u-pem" | "upem" | "unnormalized" => Ok(Variant::Unnormalized),
            _ => Err(invalid(format!("unknown variant {s:?}"))),
        }
    }
}

/// Initial output covariance statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovInit {
    /// `Ĉ(0) = c I`.
    Scaled(f64),
    /// `Ĉ(0) = G Gᵀ` with `G = √diag I + Z`, `Z_ij ~ N(0, noise_var)`.
    Gram { diag: f64, noise_var: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    /// `W(0) = w_diag I + w_noise ξ` with rectangular identity `I`, `ξ_ij ~ N(0, 1)`.
    pub w_diag: f64,
    pub w_noise: f64,
    pub cov: CovInit,
    /// Every entry of `μ̂(0)`.
    pub mu0: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            w_diag: 1.0,
            w_noise: 0.01,
            cov: CovInit::Scaled(0.2),
            mu0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PemConfig {
    pub n: usize,
    pub m: usize,
    pub domain: SourceDomain,
    /// Forgetting factor of the running statistics.
    pub lambda: f64,
    /// Variance regularizer.
    pub epsilon: f64,
    /// Weight of the prediction-error term.
    pub gamma_pred: f64,
    pub variant: Variant,
    pub gamma_lateral: Option<f64>,
    /// Feedforward learning rate `α_W(t)`, indexed by sample (1-based).
    pub w_schedule: StepSchedule,
    /// Inference step `η_y(τ)`, indexed by inner step (0-based).
    pub y_schedule: StepSchedule,
    pub eta_lambda: Option<f64>,
    pub tau_max: usize,
    pub inner_tol: f64,
    /// Use finite-time weights `α(t) = (1-λ)/(1-λ^t)` instead of `1-λ`.
    pub exact_normalization: bool,
    pub init: InitConfig,
    /// Carry `λ_L` across samples instead of restarting it at zero.
    pub warm_start_threshold: bool,
}

impl PemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < 1 {
            return Err(invalid("n and m must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(invalid(format!("forgetting factor {} outside (0, 1)", self.lambda)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon must be positive"));
        }
        if !(self.gamma_pred > 0.0 && self.gamma_pred.is_finite()) {
            return Err(invalid("gamma_pred must be positive"));
        }
        if self.variant == Variant::Unnormalized {
            match self.gamma_lateral {
                Some(g) if g > 0.0 && g.is_finite() => {}
                _ => return Err(invalid("u-pem requires a positive gamma_lateral")),
            }
        }
        if self.domain.requires_threshold_unit() {
            match self.eta_lambda {
                Some(e) if e > 0.0 && e.is_finite() => {}
                _ => {
                    return Err(invalid(format!(
                        "domain {} requires a positive eta_lambda",
                        self.domain
                    )))
                }
            }
        }
        if self.tau_max < 1 {
            return Err(invalid("tau_max must be at least 1"));
        }
        if !(self.inner_tol > 0.0) {
            return Err(invalid("inner_tol must be positive"));
        }
        self.w_schedule.validate("w_schedule")?;
        self.y_schedule.validate("y_schedule")?;
        match self.init.cov {
            CovInit::Scaled(c) if c >= 0.0 && c.is_finite() => {}
            CovInit::Gram { diag, noise_var } if diag >= 0.0 && noise_var >= 0.0 => {}
            _ => return Err(invalid("covariance initialization must be nonnegative")),
        }
        if !(self.init.w_diag.is_finite() && self.init.w_noise >= 0.0 && self.init.mu0.is_finite()) {
            return Err(invalid("invalid weight initialization"));
        }
        Ok(())
    }

    /// `η_λ`, or zero for box domains where it is never used.
    pub(crate) fn eta_lambda_or_zero(&self) -> f64 {
        self.eta_lambda.unwrap_or(0.0)
    }
}
