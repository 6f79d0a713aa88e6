mod common;

use pem::pem::{init_state, preset, slow_update, Variant};
use pem::SourceDomain;

/// Brute-force exponentially weighted sums over the whole history.
fn oracle(lambda: f64, exact: bool, v0: f64, ys: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = ys[0].len();
    let t = ys.len();
    let weight = |s: usize| lambda.powi((t - 1 - s) as i32);
    let mass: f64 = (0..t).map(weight).sum();

    // the mean at every step is needed for the centered outputs
    let mean_at = |upto: usize| -> Vec<f64> {
        let w = |s: usize| lambda.powi((upto - 1 - s) as i32);
        let total: f64 = (0..upto).map(w).sum();
        (0..n)
            .map(|i| {
                let acc: f64 = (0..upto).map(|s| w(s) * ys[s][i]).sum();
                if exact {
                    acc / total
                } else {
                    (1.0 - lambda) * acc
                }
            })
            .collect()
    };
    let centered: Vec<Vec<f64>> = (0..t)
        .map(|s| {
            let mu = mean_at(s + 1);
            ys[s].iter().zip(&mu).map(|(a, b)| a - b).collect()
        })
        .collect();
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let acc: f64 = (0..t).map(|s| weight(s) * centered[s][i] * centered[s][j]).sum();
            cov[i][j] = if exact {
                acc / mass
            } else {
                let prior = if i == j { v0 } else { 0.0 };
                lambda.powi(t as i32) * prior + (1.0 - lambda) * acc
            };
        }
    }
    (mean_at(t), cov)
}

#[test]
fn traces_match_weighted_sums() {
    let mut r = common::rng(21);
    for exact in [false, true] {
        for &lambda in &[0.9, 0.99] {
            let mut cfg = preset(SourceDomain::Antisparse, Variant::Normalized, 3, 4);
            cfg.lambda = lambda;
            cfg.exact_normalization = exact;
            let mut state = init_state(&cfg, 3);
            let ys: Vec<Vec<f64>> = (0..1000)
                .map(|_| (0..3).map(|_| common::normal(&mut r)).collect())
                .collect();
            let x = [0.1, -0.2, 0.3, 0.05];
            for (k, y) in ys.iter().enumerate() {
                slow_update(&mut state, &x, y, &cfg);
                if (k + 1) % 250 == 0 {
                    let (mu, cov) = oracle(lambda, exact, 0.2, &ys[..=k]);
                    for i in 0..3 {
                        assert!((state.mu_hat()[i] - mu[i]).abs() < 1e-12, "exact={exact} λ={lambda}");
                        for j in 0..3 {
                            assert!((state.covariance().get(i, j) - cov[i][j]).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn trace_identity_against_matrix_recursion() {
    let mut r = common::rng(22);
    let cfg = preset(SourceDomain::Sparse, Variant::Normalized, 4, 5);
    let mut state = init_state(&cfg, 9);
    let mut full = state.covariance().to_rows();
    let lam = cfg.lambda;
    for _ in 0..500 {
        let y: Vec<f64> = (0..4).map(|_| common::normal(&mut r)).collect();
        let x: Vec<f64> = (0..5).map(|_| common::normal(&mut r)).collect();
        let mu: Vec<f64> = state
            .mu_hat()
            .iter()
            .zip(&y)
            .map(|(m, v)| lam * m + (1.0 - lam) * v)
            .collect();
        let yb: Vec<f64> = y.iter().zip(&mu).map(|(a, b)| a - b).collect();
        for i in 0..4 {
            for j in 0..4 {
                full[i][j] = lam * full[i][j] + (1.0 - lam) * yb[i] * yb[j];
            }
        }
        slow_update(&mut state, &x, &y, &cfg);
    }
    let c = state.covariance();
    for i in 0..4 {
        for j in 0..4 {
            assert!((c.get(i, j) - full[i][j]).abs() < 1e-12);
        }
    }
}
