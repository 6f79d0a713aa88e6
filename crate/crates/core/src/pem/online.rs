use crate::diagnostics::{descent_check, objective_jt};
use crate::error::{invalid, Error, Result};
use crate::math::{Matrix, SymmetricMatrix};

use super::config::{PemConfig, Variant};
use super::inference::infer_output;
use super::state::{init_state, slow_update, PemState};

/// Snapshot recorded every `stride` samples for the diagnostics trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    /// Number of samples processed so far (1-based).
    pub t: u64,
    /// Output covariance after the slow update of sample `t`.
    pub covariance: SymmetricMatrix,
    /// Norms of the truncated gradient and the discarded term at the converged output
    /// (NaN for the unnormalized variant).
    pub g_norm: f64,
    pub r_norm: f64,
    pub descent_certified: bool,
    pub coarse_certified: bool,
    /// Fast-stage cost at the converged output, with statistics updated by that output.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub state: PemState,
    /// `n x T` converged outputs.
    pub y: Matrix,
    pub trace: Option<Vec<TraceSample>>,
    pub total_inner_iters: u64,
    pub infeasible_samples: u64,
}

impl OnlineRun {
    pub fn mean_inner_iters(&self) -> f64 {
        self.total_inner_iters as f64 / self.y.cols().max(1) as f64
    }

    pub fn infeasible_fraction(&self) -> f64 {
        self.infeasible_samples as f64 / self.y.cols().max(1) as f64
    }
}

/// Single streaming pass over the columns of `x` (`m x T`), starting from
/// `init_state(cfg, seed)`. With `trace_stride = Some(k)` a [`TraceSample`] is
/// recorded after every `k`-th sample.
pub fn run_online(x: &Matrix, cfg: &PemConfig, seed: u64, trace_stride: Option<usize>) -> Result<OnlineRun> {
    cfg.validate()?;
    run_from_state(init_state(cfg, seed), x, cfg, trace_stride)
}

pub(crate) fn run_from_state(
    mut state: PemState,
    x: &Matrix,
    cfg: &PemConfig,
    trace_stride: Option<usize>,
) -> Result<OnlineRun> {
    if x.rows() != cfg.m {
        return Err(invalid(format!(
            "expected {} mixture channels, got {}",
            cfg.m,
            x.rows()
        )));
    }
    if !x.is_finite() {
        return Err(invalid("mixtures contain non-finite values"));
    }
    if trace_stride == Some(0) {
        return Err(invalid("trace stride must be positive"));
    }
    let total = x.cols();
    let mut y_out = Matrix::zeros(cfg.n, total);
    let mut trace = trace_stride.map(|_| Vec::new());
    let mut total_inner_iters = 0;
    let mut infeasible_samples = 0;

    for j in 0..total {
        let xt = x.column(j);
        let inf = infer_output(&state, &xt, cfg).map_err(|e| match e {
            Error::NumericalDivergence { tau, .. } => Error::NumericalDivergence { tau, sample: Some(j) },
            other => other,
        })?;
        total_inner_iters += inf.iters as u64;
        if !inf.feasible {
            infeasible_samples += 1;
        }

        let record = trace_stride.is_some_and(|k| (state.t() + 1) % k as u64 == 0);
        let pending = if record {
            let objective = objective_jt(&state, &inf.y, &xt, cfg);
            let check = match cfg.variant {
                Variant::Normalized => Some(descent_check(&state, &inf.y, &xt, cfg)?),
                Variant::Unnormalized => None,
            };
            Some((objective, check))
        } else {
            None
        };

        slow_update(&mut state, &xt, &inf.y, cfg);
        state.set_lambda_l(inf.lambda_l);
        y_out.set_column(j, &inf.y);

        if let (Some((objective, check)), Some(trace)) = (pending, trace.as_mut()) {
            trace.push(TraceSample {
                t: state.t(),
                covariance: state.covariance(),
                g_norm: check.map_or(f64::NAN, |c| c.g_norm),
                r_norm: check.map_or(f64::NAN, |c| c.r_norm),
                descent_certified: check.is_some_and(|c| c.descent_certified),
                coarse_certified: check.is_some_and(|c| c.coarse_certified),
                objective,
            });
        }
    }

    Ok(OnlineRun {
        state,
        y: y_out,
        trace,
        total_inner_iters,
        infeasible_samples,
    })
}
