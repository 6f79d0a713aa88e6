//! Source domains: output nonlinearities, the shared threshold unit, exact Euclidean
//! projections and membership tests.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default slack for [`SourceDomain::contains`].
pub const DEFAULT_CONTAINS_TOL: f64 = 1e-6;

/// Geometric constraint set the sources live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceDomain {
    /// ℓ∞ unit ball `[-1, 1]^n`.
    Antisparse,
    /// `[0, 1]^n`.
    NonnegAntisparse,
    /// ℓ₁ unit ball.
    Sparse,
    /// ℓ₁ unit ball intersected with the nonnegative orthant.
    NonnegSparse,
    /// Probability simplex.
    Simplex,
}

impl SourceDomain {
    pub const ALL: [SourceDomain; 5] = [
        SourceDomain::Antisparse,
        SourceDomain::NonnegAntisparse,
        SourceDomain::Sparse,
        SourceDomain::NonnegSparse,
        SourceDomain::Simplex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceDomain::Antisparse => "antisparse",
            SourceDomain::NonnegAntisparse => "nn_antisparse",
            SourceDomain::Sparse => "sparse",
            SourceDomain::NonnegSparse => "nn_sparse",
            SourceDomain::Simplex => "simplex",
        }
    }

    /// Whether inference carries the shared inhibitory threshold `λ_L`.
    pub fn requires_threshold_unit(self) -> bool {
        matches!(
            self,
            SourceDomain::Sparse | SourceDomain::NonnegSparse | SourceDomain::Simplex
        )
    }

    pub fn is_box(self) -> bool {
        matches!(self, SourceDomain::Antisparse | SourceDomain::NonnegAntisparse)
    }

    /// Nonnegative domains admit no sign flip in the separation ambiguity.
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, SourceDomain::Antisparse | SourceDomain::Sparse)
    }

    /// Output nonlinearity applied to the pre-activation `y_pre` under threshold `lambda_l`.
    pub fn apply_nonlinearity(self, y_pre: &[f64], lambda_l: f64) -> Vec<f64> {
        y_pre
            .iter()
            .map(|&u| match self {
                SourceDomain::Antisparse => u.clamp(-1.0, 1.0),
                SourceDomain::NonnegAntisparse => u.clamp(0.0, 1.0),
                SourceDomain::Sparse => soft_threshold(u, lambda_l),
                SourceDomain::NonnegSparse | SourceDomain::Simplex => (u - lambda_l).max(0.0),
            })
            .collect()
    }

    /// One step of the threshold unit after the outputs moved to `y_new`.
    pub fn update_threshold(self, lambda_l: f64, y_new: &[f64], eta_lambda: f64) -> Result<f64> {
        match self {
            SourceDomain::Sparse => {
                let l1: f64 = y_new.iter().map(|v| v.abs()).sum();
                Ok((lambda_l + eta_lambda * (l1 - 1.0)).max(0.0))
            }
            SourceDomain::NonnegSparse => {
                let s: f64 = y_new.iter().sum();
                Ok((lambda_l + eta_lambda * (s - 1.0)).max(0.0))
            }
            // equality constraint: the dual variable is unrestricted in sign
            SourceDomain::Simplex => {
                let s: f64 = y_new.iter().sum();
                Ok(lambda_l + eta_lambda * (s - 1.0))
            }
            SourceDomain::Antisparse | SourceDomain::NonnegAntisparse => {
                Err(Error::DomainMismatch(self.name().to_string()))
            }
        }
    }

    /// Exact Euclidean projection of `v` onto the domain.
    ///
    /// For the nonnegative ℓ₁ ball the rule is: clip to the orthant; if the clipped
    /// point already satisfies `Σ p ≤ 1` it is the projection, otherwise the
    /// constraint `Σ p = 1` is active and the answer is the simplex projection of `v`.
    pub fn project(self, v: &[f64]) -> Vec<f64> {
        match self {
            SourceDomain::Antisparse => v.iter().map(|u| u.clamp(-1.0, 1.0)).collect(),
            SourceDomain::NonnegAntisparse => v.iter().map(|u| u.clamp(0.0, 1.0)).collect(),
            SourceDomain::Simplex => project_simplex(v),
            SourceDomain::Sparse => {
                if v.iter().map(|u| u.abs()).sum::<f64>() <= 1.0 {
                    return v.to_vec();
                }
                let mags: Vec<f64> = v.iter().map(|u| u.abs()).collect();
                project_simplex(&mags)
                    .into_iter()
                    .zip(v)
                    .map(|(p, u)| if *u < 0.0 { -p } else { p })
                    .collect()
            }
            SourceDomain::NonnegSparse => {
                let clipped: Vec<f64> = v.iter().map(|u| u.max(0.0)).collect();
                if clipped.iter().sum::<f64>() <= 1.0 {
                    clipped
                } else {
                    project_simplex(v)
                }
            }
        }
    }

    /// Membership test with slack `tol` on every inequality and equality.
    pub fn contains(self, s: &[f64], tol: f64) -> bool {
        if s.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            SourceDomain::Antisparse => s.iter().all(|v| v.abs() <= 1.0 + tol),
            SourceDomain::NonnegAntisparse => s.iter().all(|&v| v >= -tol && v <= 1.0 + tol),
            SourceDomain::Sparse => s.iter().map(|v| v.abs()).sum::<f64>() <= 1.0 + tol,
            SourceDomain::NonnegSparse => s.iter().all(|&v| v >= -tol) && s.iter().sum::<f64>() <= 1.0 + tol,
            SourceDomain::Simplex => s.iter().all(|&v| v >= -tol) && (s.iter().sum::<f64>() - 1.0).abs() <= tol,
        }
    }
}

impl fmt::Display for SourceDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SourceDomain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown source domain {s:?}")))
    }
}

/// `sign(u) max(|u| - lambda, 0)`, the proximal map of `lambda |·|`.
#[inline]
pub fn soft_threshold(u: f64, lambda: f64) -> f64 {
    let m = (u.abs() - lambda).max(0.0);
    if u < 0.0 {
        -m
    } else {
        m
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|u| (u - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonlinearity_examples() {
        assert_eq!(
            SourceDomain::Antisparse.apply_nonlinearity(&[1.5, -0.3], 9.0),
            vec![1.0, -0.3]
        );
        let y = SourceDomain::Sparse.apply_nonlinearity(&[0.7, -0.1], 0.2);
        assert!((y[0] - 0.5).abs() < 1e-15 && y[1] == 0.0);
        let y = SourceDomain::Simplex.apply_nonlinearity(&[0.4, 0.1], -0.1);
        assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.2).abs() < 1e-15);
        assert_eq!(
            SourceDomain::NonnegAntisparse.apply_nonlinearity(&[-0.5, 2.0, 0.3], 0.0),
            vec![0.0, 1.0, 0.3]
        );
    }

    #[test]
    fn threshold_examples() {
        let y = [0.25, -0.75];
        assert_eq!(SourceDomain::Sparse.update_threshold(0.0, &y, 0.5).unwrap(), 0.0);
        let y = [0.2, 0.3];
        assert_eq!(SourceDomain::NonnegSparse.update_threshold(0.1, &y, 0.5).unwrap(), 0.0);
        let v = SourceDomain::Simplex.update_threshold(0.1, &y, 0.5).unwrap();
        assert!((v + 0.15).abs() < 1e-15);
        assert!(matches!(
            SourceDomain::Antisparse.update_threshold(0.0, &y, 0.5),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn threshold_unit_flags() {
        use SourceDomain::*;
        assert!(!Antisparse.requires_threshold_unit());
        assert!(!NonnegAntisparse.requires_threshold_unit());
        assert!(Sparse.requires_threshold_unit());
        assert!(NonnegSparse.requires_threshold_unit());
        assert!(Simplex.requires_threshold_unit());
    }

    #[test]
    fn projection_examples() {
        let p = SourceDomain::Simplex.project(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(SourceDomain::Sparse.project(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(SourceDomain::Antisparse.project(&[0.2, -0.4]), vec![0.2, -0.4]);
        assert_eq!(SourceDomain::Sparse.project(&[-3.0, 1.0]), vec![-1.0, 0.0]);
        assert_eq!(SourceDomain::NonnegSparse.project(&[-1.0, 0.5]), vec![0.0, 0.5]);
    }

    #[test]
    fn contains_examples() {
        assert!(SourceDomain::Simplex.contains(&[0.3, 0.7], 1e-9));
        assert!(!SourceDomain::Sparse.contains(&[0.6, 0.6], 1e-9));
        assert!(SourceDomain::NonnegAntisparse.contains(&[1.0 + 1e-10, 0.0], 1e-9));
        assert!(!SourceDomain::NonnegAntisparse.contains(&[-0.1, 0.0], 1e-9));
        assert!(!SourceDomain::Antisparse.contains(&[f64::NAN], 1e-9));
    }

    #[test]
    fn names_round_trip() {
        for d in SourceDomain::ALL {
            assert_eq!(d.name().parse::<SourceDomain>().unwrap(), d);
        }
        assert!("box".parse::<SourceDomain>().is_err());
    }
}
