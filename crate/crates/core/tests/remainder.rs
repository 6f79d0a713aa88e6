mod common;

use pem::diagnostics::{
    certify_uniform_gap, correlative_entropy, exact_objective, normalized_offdiag, surrogate_objective,
    taylor_remainder,
};
use pem::SymmetricMatrix;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn remainder_invariants_on_random_covariances() {
    let mut r = common::rng(31);
    for k in 0..3000 {
        let n = r.random_range(2..=8);
        let rank = r.random_range(1..=n + 2);
        let c = match k % 3 {
            0 => common::gaussian_gram(&mut r, n, rank),
            1 => common::structured_gram(&mut r, n),
            _ => common::scaled_correlation(&mut r, n),
        };
        for eps in [1e-5, 1e-2, 1.0] {
            let rep = taylor_remainder(&c, eps).unwrap();
            let tol = 1e-9 * (1.0 + rep.r2_direct.abs());
            assert!((rep.r2_direct - rep.r2_spectral).abs() < tol, "{rep:?}");
            assert!(rep.lower_bound <= rep.r2_spectral + tol && rep.r2_spectral <= rep.upper_bound + tol);
            assert!(rep.r2_spectral.abs() <= rep.norm_bound + tol);
            let sur = surrogate_objective(&c, eps).unwrap();
            let ex = exact_objective(&c, eps).unwrap();
            assert!((ex - (sur - rep.r2_direct)).abs() < 1e-9 * (1.0 + ex.abs()));
            let b = normalized_offdiag(&c, eps).unwrap();
            assert!(b.trace().abs() < 1e-12);
        }
    }
}

#[test]
fn structured_batch_is_certified() {
    let mut r = common::rng(32);
    let batch: Vec<SymmetricMatrix> = (0..1000).map(|_| common::structured_gram(&mut r, 5)).collect();
    assert!(certify_uniform_gap(&batch, 1e-5).unwrap());
}

#[test]
fn closed_form_two_by_two() {
    for k in 1..=9 {
        let a = k as f64 / 10.0;
        let c = SymmetricMatrix::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let rep = taylor_remainder(&c, 0.0).unwrap();
        let expect = (1.0 - a * a).ln() + a * a;
        assert!((rep.r2_direct - expect).abs() < 1e-12);
        assert!((rep.r2_spectral - expect).abs() < 1e-12);
    }
}

fn diag_strategy() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (
        prop::collection::vec(0.0f64..10.0, 1..=8),
        prop::sample::select(vec![1e-5, 1e-2, 1.0]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn surrogate_exact_on_diagonal((d, eps) in diag_strategy()) {
        let c = SymmetricMatrix::from_diagonal(&d);
        let gap = surrogate_objective(&c, eps).unwrap() - exact_objective(&c, eps).unwrap();
        prop_assert!(gap.abs() < 1e-12);
        let rep = taylor_remainder(&c, eps).unwrap();
        prop_assert_eq!(rep.r2_spectral, 0.0);
        prop_assert!(rep.r2_direct.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_permutation_invariant(seed in 0u64..1000, eps in 1e-6f64..1.0) {
        let mut r = common::rng(seed);
        let n = r.random_range(2..=6);
        let c = common::gaussian_gram(&mut r, n, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(1);
        perm.swap(0, n - 1);
        let a = correlative_entropy(&c, eps).unwrap();
        let b = correlative_entropy(&c.permuted(&perm), eps).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        let tiny = correlative_entropy(&common::structured_gram(&mut r, n), 1e-12).unwrap();
        prop_assert!(tiny.is_finite());
    }
}

#[test]
fn small_remainder_keeps_relative_accuracy() {
    // eigenvalues of B near 0.013 whose cubes nearly cancel; reference from 60-digit arithmetic
    let c = SymmetricMatrix::from_rows(&[
        vec![
            0.7192668203359089,
            0.009176242591570226,
            0.012630530560643997,
            0.006715153994322261,
        ],
        vec![
            0.009176242591570226,
            0.0004026054729515435,
            -0.0001449904682511967,
            9.380637551363102e-5,
        ],
        vec![
            0.012630530560643997,
            -0.0001449904682511967,
            0.0012723597753307107,
            0.0002726248320576543,
        ],
        vec![
            0.006715153994322261,
            9.380637551363102e-5,
            0.0002726248320576543,
            0.0006215584873117293,
        ],
    ])
    .unwrap();
    let reference = -5.4273606224421996e-11;
    let rep = taylor_remainder(&c, 1.0).unwrap();
    assert!((rep.r2_direct / reference - 1.0).abs() < 1e-10, "{rep:?}");
    assert!((rep.r2_spectral / reference - 1.0).abs() < 1e-10, "{rep:?}");
}
