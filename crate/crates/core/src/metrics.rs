//! Permutation/sign alignment, mSNR and Student-t confidence intervals.

use crate::domains::SourceDomain;
use crate::error::{invalid, Error, Result};
use crate::math::{student_t_quantile, Matrix};

pub const MSNR_CAP_DB: f64 = 300.0;
const MAX_EXACT_ALIGN: usize = 8;

/// Output row `perm[i]`, multiplied by `signs[i]`, estimates source `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl Alignment {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn apply(&self, y: &Matrix) -> Matrix {
        Matrix::from_fn(self.perm.len(), y.cols(), |i, t| {
            f64::from(self.signs[i]) * y.get(self.perm[i], t)
        })
    }
}

fn snr_db(signal: f64, residual: f64) -> f64 {
    if residual < 1e-30 * signal {
        MSNR_CAP_DB
    } else {
        10.0 * (signal / residual).log10()
    }
}

fn row_snr(s: &[f64], y: &[f64], sign: f64) -> f64 {
    let signal: f64 = s.iter().map(|v| v * v).sum();
    let residual: f64 = s.iter().zip(y).map(|(a, b)| (a - sign * b).powi(2)).sum();
    snr_db(signal, residual)
}

fn check_shapes(s: &Matrix, y: &Matrix) -> Result<()> {
    if s.rows() != y.rows() || s.cols() != y.cols() {
        return Err(invalid(format!(
            "shape mismatch: sources {}x{}, outputs {}x{}",
            s.rows(),
            s.cols(),
            y.rows(),
            y.cols()
        )));
    }
    for i in 0..s.rows() {
        if s.row(i).iter().all(|v| *v == 0.0) {
            return Err(invalid(format!("source row {i} has zero norm")));
        }
    }
    Ok(())
}

/// Exhaustive search for the alignment maximizing the summed per-source mSNR.
///
/// Permutations are visited in lexicographic order and only strict improvements
/// are kept, so ties resolve to the smallest permutation; per row a `+` sign wins
/// ties. Nonnegative domains are restricted to `+` signs.
pub fn align(s: &Matrix, y: &Matrix, domain: SourceDomain) -> Result<(Alignment, Matrix)> {
    let n = s.rows();
    if n > MAX_EXACT_ALIGN {
        return Err(Error::TooLargeForExactAlignment(n));
    }
    check_shapes(s, y)?;
    let allow_flip = !domain.is_nonnegative();

    // best (snr, sign) for source i taken from output row j
    let table: Vec<Vec<(f64, i8)>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let plus = row_snr(s.row(i), y.row(j), 1.0);
                    if allow_flip {
                        let minus = row_snr(s.row(i), y.row(j), -1.0);
                        if minus > plus {
                            return (minus, -1);
                        }
                    }
                    (plus, 1)
                })
                .collect()
        })
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = Alignment::identity(n);
    let mut best_score = f64::NEG_INFINITY;
    loop {
        let score: f64 = perm.iter().enumerate().map(|(i, &j)| table[i][j].0).sum();
        if score > best_score {
            best_score = score;
            best = Alignment {
                perm: perm.clone(),
                signs: perm.iter().enumerate().map(|(i, &j)| table[i][j].1).collect(),
            };
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let aligned = best.apply(y);
    Ok((best, aligned))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Per-source `10 log10(‖s_i‖² / ‖s_i − ỹ_i‖²)` (capped at 300 dB) and their mean.
pub fn msnr_db(s: &Matrix, y_aligned: &Matrix) -> Result<(Vec<f64>, f64)> {
    check_shapes(s, y_aligned)?;
    let per: Vec<f64> = (0..s.rows())
        .map(|i| row_snr(s.row(i), y_aligned.row(i), 1.0))
        .collect();
    let mean = per.iter().sum::<f64>() / per.len().max(1) as f64;
    Ok((per, mean))
}

/// `(mean, t_{(1+level)/2, N−1} σ / √N)` with the unbiased sample deviation.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(invalid("a confidence interval needs at least two samples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let crit = student_t_quantile(0.5 * (1.0 + level), n - 1.0)?;
    Ok((mean, crit * var.sqrt() / n.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_msnr() {
        let s = Matrix::eye(2, 2);
        let y = Matrix::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let (per, mean) = msnr_db(&s, &y).unwrap();
        let expect = 10.0 * (1.0f64 / 0.02).log10();
        assert!((per[0] - expect).abs() < 1e-12 && (per[1] - expect).abs() < 1e-12);
        assert!((mean - 16.989700043360187).abs() < 1e-9);
    }

    #[test]
    fn sign_and_swap_recovered() {
        let s = Matrix::from_rows(&[vec![1.0, -0.5, 0.2], vec![0.3, 0.8, -0.9]]).unwrap();
        let neg = Matrix::from_fn(2, 3, |i, j| -s.get(1 - i, j));
        let (al, ya) = align(&s, &neg, SourceDomain::Antisparse).unwrap();
        assert_eq!(al.perm, vec![1, 0]);
        assert_eq!(al.signs, vec![-1, -1]);
        assert_eq!(msnr_db(&s, &ya).unwrap().1, MSNR_CAP_DB);
        let (al, _) = align(&s, &neg, SourceDomain::Simplex).unwrap();
        assert_eq!(al.signs, vec![1, 1]);
    }

    #[test]
    fn zero_source_and_size_errors() {
        let s = Matrix::zeros(2, 3);
        assert!(msnr_db(&s, &s).is_err());
        let big = Matrix::eye(9, 9);
        assert_eq!(
            align(&big, &big, SourceDomain::Sparse).unwrap_err(),
            Error::TooLargeForExactAlignment(9)
        );
    }

    #[test]
    fn interval() {
        let (m, h) = confidence_interval(&[2.0; 30], 0.95).unwrap();
        assert_eq!((m, h), (2.0, 0.0));
        let (m, _) = confidence_interval(&[-1.0, 1.0, -1.0, 1.0], 0.95).unwrap();
        assert_eq!(m, 0.0);
        assert!(confidence_interval(&[1.0], 0.95).is_err());
    }
}
