use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::math::{Matrix, SymmetricMatrix};
use crate::rng::{stream, Purpose};

use super::config::{CovInit, PemConfig};

/// Learned separator and running output statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PemState {
    w: Matrix,
    mu_hat: Vec<f64>,
    v_hat: Vec<f64>,
    c_hat: SymmetricMatrix,
    t: u64,
    lambda_l: f64,
}

impl PemState {
    /// Assembles a state; `c_hat` must have an exactly zero diagonal and `v_hat`
    /// nonnegative entries.
    pub fn from_parts(
        w: Matrix,
        mu_hat: Vec<f64>,
        v_hat: Vec<f64>,
        c_hat: SymmetricMatrix,
        t: u64,
        lambda_l: f64,
    ) -> Result<Self> {
        let n = w.rows();
        if mu_hat.len() != n || v_hat.len() != n || c_hat.dim() != n {
            return Err(invalid("state dimensions disagree"));
        }
        if v_hat.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("variance traces must be nonnegative"));
        }
        if (0..n).any(|i| c_hat.get(i, i) != 0.0) {
            return Err(invalid("cross-covariance traces must have a zero diagonal"));
        }
        Ok(Self {
            w,
            mu_hat,
            v_hat,
            c_hat,
            t,
            lambda_l,
        })
    }

    /// Splits a full covariance into variance and cross-covariance traces.
    pub fn from_covariance(w: Matrix, mu_hat: Vec<f64>, cov: &SymmetricMatrix, t: u64) -> Result<Self> {
        let v_hat = cov.diagonal();
        let mut c_hat = cov.clone();
        for i in 0..cov.dim() {
            c_hat.set(i, i, 0.0);
        }
        Self::from_parts(w, mu_hat, v_hat, c_hat, t, 0.0)
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn m(&self) -> usize {
        self.w.cols()
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn mu_hat(&self) -> &[f64] {
        &self.mu_hat
    }

    pub fn v_hat(&self) -> &[f64] {
        &self.v_hat
    }

    /// Cross-covariance traces (zero diagonal).
    pub fn c_hat(&self) -> &SymmetricMatrix {
        &self.c_hat
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn lambda_l(&self) -> f64 {
        self.lambda_l
    }

    pub(crate) fn set_lambda_l(&mut self, v: f64) {
        self.lambda_l = v;
    }

    /// `Ĉ = diag(v̂) + ĉ`.
    pub fn covariance(&self) -> SymmetricMatrix {
        let mut c = self.c_hat.clone();
        for (i, &v) in self.v_hat.iter().enumerate() {
            c.set(i, i, v);
        }
        c
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite()
            && self.c_hat.is_finite()
            && self.mu_hat.iter().chain(&self.v_hat).all(|v| v.is_finite())
            && self.lambda_l.is_finite()
    }
}

/// Initial state for `cfg`; weight noise and any random covariance draw use the
/// `Init` stream of `seed`.
pub fn init_state(cfg: &PemConfig, seed: u64) -> PemState {
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = stream(seed, Purpose::Init);
    let mut w = Matrix::eye(n, m);
    for v in w.as_mut_slice() {
        *v *= cfg.init.w_diag;
    }
    if cfg.init.w_noise != 0.0 {
        for v in w.as_mut_slice() {
            *v += cfg.init.w_noise * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let (v_hat, c_hat) = match cfg.init.cov {
        CovInit::Scaled(c) => (vec![c; n], SymmetricMatrix::zeros(n)),
        CovInit::Gram { diag, noise_var } => {
            let sd = noise_var.sqrt();
            let g = Matrix::from_fn(n, n, |i, j| {
                let z = sd * rng.sample::<f64, _>(StandardNormal);
                if i == j {
                    diag.sqrt() + z
                } else {
                    z
                }
            });
            // G Gᵀ
            let cov = SymmetricMatrix::from_fn(n, |i, j| g.row(i).iter().zip(g.row(j)).map(|(a, b)| a * b).sum());
            let mut off = cov.clone();
            for i in 0..n {
                off.set(i, i, 0.0);
            }
            (cov.diagonal(), off)
        }
    };
    PemState {
        w,
        mu_hat: vec![cfg.init.mu0; n],
        v_hat,
        c_hat,
        t: 0,
        lambda_l: 0.0,
    }
}

/// Slow stage for one sample: prediction-error weight update, then mean, variance
/// and cross-covariance traces (mean first, so the traces see the updated mean).
pub fn slow_update(state: &mut PemState, x: &[f64], y: &[f64], cfg: &PemConfig) {
    let n = state.n();
    let t_next = state.t + 1;

    let prediction = state.w.mul_vec(x);
    let alpha_w = cfg.w_schedule.value(t_next);
    for i in 0..n {
        let e = y[i] - prediction[i];
        if e == 0.0 {
            continue;
        }
        for (wij, xj) in state.w.row_mut(i).iter_mut().zip(x) {
            *wij += alpha_w * e * xj;
        }
    }

    let alpha = if cfg.exact_normalization {
        (1.0 - cfg.lambda) / (1.0 - cfg.lambda.powf(t_next as f64))
    } else {
        1.0 - cfg.lambda
    };
    let keep = 1.0 - alpha;

    for (mu, &yi) in state.mu_hat.iter_mut().zip(y) {
        *mu = keep * *mu + alpha * yi;
    }
    let centered: Vec<f64> = y.iter().zip(&state.mu_hat).map(|(a, b)| a - b).collect();
    for (v, &c) in state.v_hat.iter_mut().zip(&centered) {
        *v = keep * *v + alpha * c * c;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let c = keep * state.c_hat.get(i, j) + alpha * centered[i] * centered[j];
            state.c_hat.set(i, j, c);
        }
    }
    state.t = t_next;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::SourceDomain;
    use crate::pem::{preset, Variant};

    fn cfg(n: usize, m: usize, lambda: f64) -> PemConfig {
        let mut c = preset(SourceDomain::Antisparse, Variant::Normalized, n, m);
        c.lambda = lambda;
        c
    }

    #[test]
    fn default_init() {
        let mut c = cfg(3, 5, 0.99);
        let s = init_state(&c, 1);
        assert_eq!(s.v_hat(), &[0.2, 0.2, 0.2]);
        assert_eq!(s.c_hat(), &SymmetricMatrix::zeros(3));
        assert_eq!(s.t(), 0);
        assert_eq!(s, init_state(&c, 1));
        assert_ne!(s.w(), init_state(&c, 2).w());
        c.init.w_noise = 0.0;
        assert_eq!(init_state(&c, 1).w(), &Matrix::eye(3, 5));
    }

    #[test]
    fn gram_init_is_psd_with_offdiagonal_structure() {
        let mut c = cfg(4, 6, 0.99);
        c.init.cov = CovInit::Gram {
            diag: 0.2,
            noise_var: 0.2,
        };
        let s = init_state(&c, 3);
        assert!(crate::math::cholesky_logdet(&s.covariance().shifted(1e-9)).is_ok());
        assert!((0..4).all(|i| s.c_hat().get(i, i) == 0.0));
        assert!(s.c_hat().frobenius_norm() > 0.0);
    }

    #[test]
    fn zero_error_leaves_weights() {
        let c = cfg(2, 2, 0.5);
        let mut s = PemState::from_parts(
            Matrix::eye(2, 2),
            vec![0.0; 2],
            vec![1.0; 2],
            SymmetricMatrix::zeros(2),
            0,
            0.0,
        )
        .unwrap();
        slow_update(&mut s, &[0.3, -0.2], &[0.3, -0.2], &c);
        assert_eq!(s.w(), &Matrix::eye(2, 2));
        assert_eq!(s.t(), 1);
    }

    #[test]
    fn trace_arithmetic() {
        // λ = 0.5, μ̂ chosen so that the centered output after the mean update is (2, 1)
        let c = cfg(2, 2, 0.5);
        // μ(t) = 0.5 μ(t-1) + 0.5 y; with y = (4, 2) and μ(t-1) = 0 → μ = (2, 1), ȳ = (2, 1)
        let mut s = PemState::from_parts(
            Matrix::eye(2, 2),
            vec![0.0; 2],
            vec![1.0, 1.0],
            SymmetricMatrix::zeros(2),
            0,
            0.0,
        )
        .unwrap();
        slow_update(&mut s, &[4.0, 2.0], &[4.0, 2.0], &c);
        assert_eq!(s.mu_hat(), &[2.0, 1.0]);
        assert_eq!(s.v_hat()[0], 2.5);
        assert_eq!(s.c_hat().get(0, 1), 1.0);
        assert_eq!(s.c_hat().get(0, 0), 0.0);
    }

    #[test]
    fn from_parts_rejects_bad_traces() {
        let mut c = SymmetricMatrix::zeros(2);
        c.set(0, 0, 0.1);
        assert!(PemState::from_parts(Matrix::eye(2, 2), vec![0.0; 2], vec![1.0; 2], c, 0, 0.0).is_err());
        assert!(PemState::from_parts(
            Matrix::eye(2, 2),
            vec![0.0; 2],
            vec![-1.0, 1.0],
            SymmetricMatrix::zeros(2),
            0,
            0.0
        )
        .is_err());
    }
}
