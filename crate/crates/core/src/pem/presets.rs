//! Per-domain hyperparameters of the synthetic source-separation experiments.

use crate::domains::SourceDomain;
use crate::error::{invalid, Result};

use super::config::{CovInit, InitConfig, PemConfig, Variant};
use super::schedule::{ScheduleRule, StepSchedule};

/// `γ_lateral` of the unnormalized variant, per domain.
pub const GAMMA_LATERAL: [(SourceDomain, f64); 5] = [
    (SourceDomain::Antisparse, 10.0),
    (SourceDomain::NonnegAntisparse, 300.0),
    (SourceDomain::Sparse, 50.0),
    (SourceDomain::NonnegSparse, 3200.0),
    (SourceDomain::Simplex, 100.0),
];

/// Names accepted by [`preset`] lookups from text: `<domain>` and `u-pem/<domain>`.
pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = SourceDomain::ALL.iter().map(|d| d.name().to_string()).collect();
    names.extend(SourceDomain::ALL.iter().map(|d| format!("u-pem/{}", d.name())));
    names
}

/// Parses a preset name into its domain and variant.
pub fn parse_preset_name(name: &str) -> Result<(SourceDomain, Variant)> {
    let (variant, domain) = match name.split_once('/') {
        Some((v, d)) => (v.parse()?, d),
        None => (Variant::Normalized, name),
    };
    let domain = domain
        .parse()
        .map_err(|_| invalid(format!("unknown preset {name:?}")))?;
    Ok((domain, variant))
}

/// Shipped configuration for `domain` and `variant` with `n` sources and `m` mixtures.
pub fn preset(domain: SourceDomain, variant: Variant, n: usize, m: usize) -> PemConfig {
    let w_floor = 1e-8;
    // (λ, γ, α_W⁰, W rule, T_W, η_y⁰, η_y floor, η_λ, τ_max, tol)
    let (lambda, gamma_pred, alpha_w, w_rule, t_w, eta_y, eta_floor, eta_lambda, tau_max, inner_tol) = match domain {
        SourceDomain::Antisparse => (
            0.99,
            250.0,
            5e-2,
            ScheduleRule::DivideByIndex,
            5000.0,
            0.5,
            1e-6,
            None,
            250,
            1e-7,
        ),
        SourceDomain::NonnegAntisparse => (
            0.95,
            750.0,
            5e-2,
            ScheduleRule::DivideByIndex,
            20000.0,
            0.05,
            1e-4,
            None,
            500,
            1e-6,
        ),
        SourceDomain::Sparse => (
            0.99,
            150.0,
            5e-2,
            ScheduleRule::DivideByIndex,
            5000.0,
            0.05,
            1e-4,
            Some(0.5),
            100,
            1e-6,
        ),
        SourceDomain::NonnegSparse => (
            0.99,
            250.0,
            5e-2,
            ScheduleRule::DivideByIndex,
            2000.0,
            0.1,
            1e-4,
            Some(0.5),
            100,
            1e-7,
        ),
        SourceDomain::Simplex => (
            0.99,
            150.0,
            5e-2,
            ScheduleRule::DivideByLogIndex,
            5000.0,
            0.1,
            1e-4,
            Some(0.05),
            100,
            1e-7,
        ),
    };

    let (epsilon, init) = match domain {
        SourceDomain::NonnegAntisparse => (
            1e-4,
            InitConfig {
                w_diag: 0.01,
                w_noise: 1.0 / 15.0,
                cov: CovInit::Scaled(2.0),
                mu0: 0.0,
            },
        ),
        _ => (1e-5, InitConfig::default()),
    };

    let gamma_lateral = match variant {
        Variant::Normalized => None,
        Variant::Unnormalized => GAMMA_LATERAL.iter().find(|(d, _)| *d == domain).map(|(_, g)| *g),
    };

    PemConfig {
        n,
        m,
        domain,
        lambda,
        epsilon,
        gamma_pred,
        variant,
        gamma_lateral,
        w_schedule: StepSchedule::new(w_rule, alpha_w, t_w, w_floor),
        y_schedule: StepSchedule::new(ScheduleRule::DivideByLoopIndex, eta_y, 1.0, eta_floor),
        eta_lambda,
        tau_max,
        inner_tol,
        exact_normalization: false,
        init,
        warm_start_threshold: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_preset_values() {
        let c = preset(SourceDomain::Sparse, Variant::Normalized, 5, 10);
        assert_eq!(c.lambda, 0.99);
        assert_eq!(c.gamma_pred, 150.0);
        assert_eq!(c.tau_max, 100);
        assert_eq!(c.eta_lambda, Some(0.5));
        assert_eq!(c.inner_tol, 1e-6);
        assert_eq!(c.w_schedule.base, 0.05);
        assert_eq!(c.y_schedule.base, 0.05);
        c.validate().unwrap();
    }

    #[test]
    fn nn_antisparse_overrides() {
        let c = preset(SourceDomain::NonnegAntisparse, Variant::Normalized, 5, 10);
        assert_eq!(c.epsilon, 1e-4);
        assert_eq!(c.init.cov, CovInit::Scaled(2.0));
        assert_eq!(c.init.w_diag, 0.01);
    }

    #[test]
    fn unnormalized_lateral_strengths() {
        let want = [10.0, 300.0, 50.0, 3200.0, 100.0];
        for (d, g) in SourceDomain::ALL.into_iter().zip(want) {
            let c = preset(d, Variant::Unnormalized, 5, 10);
            assert_eq!(c.gamma_lateral, Some(g));
            c.validate().unwrap();
            assert!(preset(d, Variant::Normalized, 5, 10).gamma_lateral.is_none());
        }
    }

    #[test]
    fn preset_name_parsing() {
        assert_eq!(
            parse_preset_name("u-pem/nn_sparse").unwrap(),
            (SourceDomain::NonnegSparse, Variant::Unnormalized)
        );
        assert_eq!(
            parse_preset_name("simplex").unwrap(),
            (SourceDomain::Simplex, Variant::Normalized)
        );
        assert!(parse_preset_name("boxy").is_err());
        assert_eq!(preset_names().len(), 10);
    }
}
