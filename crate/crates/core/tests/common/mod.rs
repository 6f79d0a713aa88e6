#![allow(dead_code)]

use pem::pem::{preset, PemConfig, PemState, Variant};
use pem::{Matrix, SourceDomain, SymmetricMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

/// `G Gᵀ` for an `n x k` standard Gaussian `G`.
pub fn gaussian_gram(r: &mut ChaCha8Rng, n: usize, k: usize) -> SymmetricMatrix {
    let g: Vec<f64> = (0..n * k).map(|_| normal(r)).collect();
    SymmetricMatrix::from_fn(n, |i, j| (0..k).map(|l| g[i * k + l] * g[j * k + l]).sum())
}

/// `G Gᵀ` with `G = √0.2 I + Z`, `Z_ij ~ N(0, 1/5)`.
pub fn structured_gram(r: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let sd = 0.2f64.sqrt();
    let g: Vec<f64> = (0..n * n)
        .map(|idx| sd * normal(r) + if idx / n == idx % n { sd } else { 0.0 })
        .collect();
    SymmetricMatrix::from_fn(n, |i, j| (0..n).map(|l| g[i * n + l] * g[j * n + l]).sum())
}

/// Correlation-like matrix with strongly unequal variances.
pub fn scaled_correlation(r: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let base = gaussian_gram(r, n, n + 1);
    let scale: Vec<f64> = (0..n).map(|_| 10f64.powf(r.random_range(-2.0..2.0))).collect();
    let d = base.diagonal();
    SymmetricMatrix::from_fn(n, |i, j| base.get(i, j) / (d[i] * d[j]).sqrt() * scale[i] * scale[j])
}

/// Random normalized-variant configuration and state with PSD output statistics.
pub fn random_setup(r: &mut ChaCha8Rng) -> (PemConfig, PemState, Vec<f64>, Vec<f64>) {
    let n = r.random_range(2..=5);
    let m = n + r.random_range(0..=3);
    let mut cfg = preset(SourceDomain::Antisparse, Variant::Normalized, n, m);
    cfg.lambda = r.random_range(0.5..0.995);
    cfg.epsilon = 10f64.powf(r.random_range(-5.0..-1.0));
    cfg.gamma_pred = r.random_range(0.1..5.0);

    let w = Matrix::from_fn(n, m, |_, _| normal(r));
    let mut cov = gaussian_gram(r, n, n);
    for i in 0..n {
        cov.set(i, i, cov.get(i, i) + 0.05);
    }
    let mu: Vec<f64> = (0..n).map(|_| 0.3 * normal(r)).collect();
    let state = PemState::from_covariance(w, mu, &cov, r.random_range(0..1000)).unwrap();
    let y: Vec<f64> = (0..n).map(|_| normal(r)).collect();
    let x: Vec<f64> = (0..m).map(|_| normal(r)).collect();
    (cfg, state, y, x)
}
