use crate::error::{Error, Result};

use super::config::{PemConfig, Variant};
use super::state::PemState;

/// Converged output of the fast stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub y: Vec<f64>,
    pub lambda_l: f64,
    pub iters: usize,
    pub feasible: bool,
}

/// Activity-update direction at output `y` given the feedforward prediction `Wx`.
pub(crate) fn direction_with_prediction(state: &PemState, y: &[f64], prediction: &[f64], cfg: &PemConfig) -> Vec<f64> {
    let n = y.len();
    let eps = cfg.epsilon;
    let v = state.v_hat();
    let c = state.c_hat();
    let centered: Vec<f64> = y.iter().zip(state.mu_hat()).map(|(a, b)| a - b).collect();
    let denom: Vec<f64> = v.iter().map(|vk| vk + eps).collect();

    (0..n)
        .map(|k| {
            let drive = centered[k] / denom[k];
            let lateral: f64 = match cfg.variant {
                Variant::Normalized => {
                    (0..n)
                        .filter(|&j| j != k)
                        .map(|j| c.get(k, j) * centered[j] / denom[j])
                        .sum::<f64>()
                        / denom[k]
                }
                Variant::Unnormalized => {
                    cfg.gamma_lateral.unwrap_or(0.0)
                        * (0..n)
                            .filter(|&j| j != k)
                            .map(|j| c.get(k, j) * centered[j])
                            .sum::<f64>()
                }
            };
            drive - lateral - cfg.gamma_pred * (y[k] - prediction[k])
        })
        .collect()
}

/// Variance drive minus covariance reduction minus predictive correction, evaluated
/// with the statistics held in `state` (those from the end of the previous sample).
pub fn direction(state: &PemState, y: &[f64], x: &[f64], cfg: &PemConfig) -> Vec<f64> {
    let prediction = state.w().mul_vec(x);
    direction_with_prediction(state, y, &prediction, cfg)
}

/// Fast recurrent relaxation of the output for input `x`.
///
/// Starts from `y = 0` and iterates `y ← σ(y + η_y(τ) d)` for at most `tau_max`
/// steps, stopping early once `‖Δy‖∞` (and `|Δλ_L|` for threshold domains) falls below `inner_tol`. Threshold domains also step
/// the shared unit `λ_L` after each output update.
pub fn infer_output(state: &PemState, x: &[f64], cfg: &PemConfig) -> Result<Inference> {
    let n = state.n();
    let domain = cfg.domain;
    let prediction = state.w().mul_vec(x);
    let mut y = vec![0.0; n];
    let mut lambda_l = if cfg.warm_start_threshold {
        state.lambda_l()
    } else {
        0.0
    };
    let eta_lambda = cfg.eta_lambda_or_zero();
    let mut iters = 0;

    for tau in 0..cfg.tau_max {
        let d = direction_with_prediction(state, &y, &prediction, cfg);
        let step = cfg.y_schedule.value(tau as u64);
        let pre: Vec<f64> = y.iter().zip(&d).map(|(yk, dk)| yk + step * dk).collect();
        let next = domain.apply_nonlinearity(&pre, lambda_l);
        let prev_lambda = lambda_l;
        if domain.requires_threshold_unit() {
            lambda_l = domain.update_threshold(lambda_l, &next, eta_lambda)?;
        }
        if next.iter().any(|v| !v.is_finite()) || !lambda_l.is_finite() {
            return Err(Error::NumericalDivergence { tau, sample: None });
        }
        // an output pinned at zero by a still-moving threshold has not settled
        let change = y
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold((lambda_l - prev_lambda).abs(), f64::max);
        y = next;
        iters = tau + 1;
        if change < cfg.inner_tol {
            break;
        }
    }

    let feasible = match domain {
        crate::domains::SourceDomain::Simplex => {
            y.iter().all(|&v| v >= -1e-4) && (y.iter().sum::<f64>() - 1.0).abs() < 1e-3
        }
        _ => domain.contains(&y, 1e-4),
    };
    Ok(Inference {
        y,
        lambda_l,
        iters,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::SourceDomain;
    use crate::math::{Matrix, SymmetricMatrix};
    use crate::pem::{preset, StepSchedule};

    fn simple_state(v: f64, c12: f64) -> PemState {
        let mut c = SymmetricMatrix::zeros(2);
        c.set(0, 1, c12);
        PemState::from_parts(Matrix::eye(2, 2), vec![0.0; 2], vec![v; 2], c, 0, 0.0).unwrap()
    }

    fn base_cfg() -> PemConfig {
        let mut c = preset(SourceDomain::Antisparse, Variant::Normalized, 2, 2);
        c.epsilon = 0.0;
        c.gamma_pred = 1.0;
        c
    }

    #[test]
    fn all_terms_vanish() {
        let mut s = simple_state(1.0, 0.0);
        // W = 0 makes Wx = 0 for any x
        s = PemState::from_parts(
            Matrix::zeros(2, 2),
            vec![0.0; 2],
            s.v_hat().to_vec(),
            s.c_hat().clone(),
            0,
            0.0,
        )
        .unwrap();
        let d = direction(&s, &[0.0, 0.0], &[0.7, -0.2], &base_cfg());
        assert_eq!(d, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_direction() {
        let d = direction(&simple_state(1.0, 0.0), &[0.0, 0.0], &[0.5, 0.5], &base_cfg());
        assert_eq!(d, vec![0.5, 0.5]);
    }

    #[test]
    fn unnormalized_direction() {
        let mut c = base_cfg();
        c.variant = Variant::Unnormalized;
        c.gamma_lateral = Some(10.0);
        c.gamma_pred = 0.0;
        // v̂ → ∞ kills the variance drive
        let s = simple_state(1e300, 0.1);
        let d = direction(&s, &[1.0, 1.0], &[0.0, 0.0], &c);
        assert!((d[0] + 1.0).abs() < 1e-12 && (d[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_step_inference() {
        let mut c = base_cfg();
        c.tau_max = 1;
        c.y_schedule = StepSchedule::constant(0.5);
        let out = infer_output(&simple_state(1.0, 0.0), &[0.5, 0.5], &c).unwrap();
        assert_eq!(out.y, vec![0.25, 0.25]);
        assert_eq!(out.iters, 1);
        assert!(out.feasible);
    }

    #[test]
    fn box_outputs_stay_in_box_and_repeat() {
        let c = preset(SourceDomain::Antisparse, Variant::Normalized, 2, 2);
        let s = simple_state(0.2, 0.05);
        let a = infer_output(&s, &[3.0, -7.0], &c).unwrap();
        assert!(a.y.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(a, infer_output(&s, &[3.0, -7.0], &c).unwrap());
    }

    #[test]
    fn divergence_is_reported() {
        let mut c = preset(SourceDomain::Sparse, Variant::Normalized, 2, 2);
        c.y_schedule = StepSchedule::constant(1e3);
        c.tau_max = 500;
        let err = infer_output(&simple_state(0.2, 0.0), &[1.0, 1.0], &c).unwrap_err();
        assert!(matches!(err, Error::NumericalDivergence { .. }));
    }
}
