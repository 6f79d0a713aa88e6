//! Surrogate vs exact log-determinant objective, the second-order Taylor remainder
//! with its spectral bounds, and descent certificates for the truncated direction.

use crate::error::{invalid, Error, Result};
use crate::math::{cholesky_logdet, sym_eigvals, SymmetricMatrix};
use crate::pem::inference::direction_with_prediction;
use crate::pem::{PemConfig, PemState, TraceSample, Variant};

const SINGULARITY_GUARD: f64 = 1e-10;

/// Exact second-order remainder of `log det(C + εI)` computed two ways, with bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderReport {
    /// Cholesky log-determinant minus the quadratic expansion.
    pub r2_direct: f64,
    /// `Σ [log(1+λ) − λ + λ²/2]` over the eigenvalues of `B`.
    pub r2_spectral: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `‖B‖_F² ‖B‖₂ / (3 (1 + λ_min(B)))`.
    pub norm_bound: f64,
    pub b_fro: f64,
    pub b_spec: f64,
    pub b_lambda_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentReport {
    pub g_norm: f64,
    pub r_norm: f64,
    /// `‖r‖ < ‖g‖`.
    pub descent_certified: bool,
    /// `‖B‖₂² / min_k(v_k+ε) · ‖ȳ‖ < ‖g‖`, which implies `descent_certified`.
    pub coarse_certified: bool,
}

fn shifted_diagonal(c: &SymmetricMatrix, eps: f64) -> Result<Vec<f64>> {
    if !c.is_finite() || !eps.is_finite() || eps < 0.0 {
        return Err(invalid("covariance and epsilon must be finite, epsilon nonnegative"));
    }
    c.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d < -1e-12 {
                Err(invalid(format!("negative variance {d} at index {i}")))
            } else if d + eps <= 0.0 {
                Err(invalid(format!("zero regularized variance at index {i}")))
            } else {
                Ok(d + eps)
            }
        })
        .collect()
}

/// `B = (D+εI)^{-1/2} (C − D) (D+εI)^{-1/2}` with `D = diag(C)`.
pub fn normalized_offdiag(c: &SymmetricMatrix, eps: f64) -> Result<SymmetricMatrix> {
    let d = shifted_diagonal(c, eps)?;
    Ok(SymmetricMatrix::from_fn(c.dim(), |i, j| {
        if i == j {
            0.0
        } else {
            c.get(i, j) / (d[i] * d[j]).sqrt()
        }
    }))
}

/// Variance expansion plus normalized covariance penalty.
pub fn surrogate_objective(c: &SymmetricMatrix, eps: f64) -> Result<f64> {
    let d = shifted_diagonal(c, eps)?;
    let n = c.dim();
    let mut penalty = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            penalty += c.get(i, j).powi(2) / (d[i] * d[j]);
        }
    }
    Ok(-d.iter().map(|v| v.ln()).sum::<f64>() + penalty)
}

/// `−log det(C + εI)`.
pub fn exact_objective(c: &SymmetricMatrix, eps: f64) -> Result<f64> {
    Ok(-cholesky_logdet(&c.shifted(eps))?)
}

/// Gaussian differential entropy `½ log det(C+εI) + (n/2) log(2πe)`.
pub fn correlative_entropy(c: &SymmetricMatrix, eps: f64) -> Result<f64> {
    let n = c.dim() as f64;
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    Ok(0.5 * cholesky_logdet(&c.shifted(eps))? + 0.5 * n * two_pi_e.ln())
}

// log(1+x) − x + x²/2, by series near zero
fn cubic_remainder(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let mut term = x * x;
        let mut sum = 0.0;
        for k in 3..=80 {
            term *= -x;
            let next = term / k as f64;
            sum -= next;
            if next.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        x.ln_1p() - x + 0.5 * x * x
    }
}

// log(1+x) − x, by series near zero
fn log1p_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let mut term = -x;
        let mut sum = 0.0;
        for k in 2..=12 {
            term *= -x;
            sum -= term / k as f64;
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

// log det(I+B) + ½‖B‖_F² from the Cholesky factor L of I+B (B has zero diagonal).
// Pivot deficits and the entrywise gaps B_ij − L_ij are formed explicitly, so the
// O(‖B‖²) parts cancel analytically instead of in floating point.
fn cholesky_remainder(b: &SymmetricMatrix) -> Result<f64> {
    let n = b.dim();
    let mut l = vec![vec![0.0; n]; n];
    let mut acc = 0.0;
    for j in 0..n {
        let deficit = -(0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        let pivot = 1.0 + deficit;
        if !(pivot > 1e-14) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        let ljj_minus_one = deficit / (1.0 + ljj);
        l[j][j] = ljj;
        acc += log1p_minus_x(deficit);
        for i in (j + 1)..n {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            let bij = b.get(i, j);
            let lij = (bij - s) / ljj;
            l[i][j] = lij;
            let gap = (bij * ljj_minus_one + s) / ljj;
            acc += gap * (bij + lij);
        }
    }
    Ok(acc)
}

pub fn taylor_remainder(c: &SymmetricMatrix, eps: f64) -> Result<RemainderReport> {
    let d = shifted_diagonal(c, eps)?;
    let b = normalized_offdiag(c, eps)?;
    let n = c.dim();

    let mut b_fro_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                b_fro_sq += c.get(i, j).powi(2) / (d[i] * d[j]);
            }
        }
    }

    let eig = sym_eigvals(&b)?;
    let lambda_min = eig.first().copied().unwrap_or(0.0);
    if 1.0 + lambda_min < SINGULARITY_GUARD {
        return Err(Error::SpectrumAtSingularity { lambda_min });
    }

    let r2_direct = cholesky_remainder(&b)?;
    let r2_spectral = eig.iter().map(|&l| cubic_remainder(l)).sum();

    let lower_bound = -eig
        .iter()
        .filter(|&&l| l < 0.0)
        .map(|&l| l.abs().powi(3) / (1.0 + l))
        .sum::<f64>()
        / 3.0;
    let upper_bound = eig.iter().filter(|&&l| l >= 0.0).map(|&l| l.powi(3)).sum::<f64>() / 3.0;
    let b_spec = eig.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let norm_bound = b_fro_sq * b_spec / (3.0 * (1.0 + lambda_min.min(0.0)));

    Ok(RemainderReport {
        r2_direct,
        r2_spectral,
        lower_bound,
        upper_bound,
        norm_bound,
        b_fro: b_fro_sq.sqrt(),
        b_spec,
        b_lambda_min: lambda_min,
    })
}

/// Mean, variance and cross-covariance traces as they would be after a slow update
/// with output `y` (steady-state weights `1 − λ`); the weights are left untouched.
pub fn provisional_statistics(state: &PemState, y: &[f64], cfg: &PemConfig) -> PemState {
    let lam = cfg.lambda;
    let a = 1.0 - lam;
    let mu: Vec<f64> = state.mu_hat().iter().zip(y).map(|(m, yk)| lam * m + a * yk).collect();
    let centered: Vec<f64> = y.iter().zip(&mu).map(|(yk, m)| yk - m).collect();
    let v: Vec<f64> = state
        .v_hat()
        .iter()
        .zip(&centered)
        .map(|(v, c)| lam * v + a * c * c)
        .collect();
    let c = SymmetricMatrix::from_fn(state.n(), |i, j| {
        if i == j {
            0.0
        } else {
            lam * state.c_hat().get(i, j) + a * centered[i] * centered[j]
        }
    });
    PemState::from_parts(state.w().clone(), mu, v, c, state.t(), state.lambda_l())
        .expect("provisional statistics keep state invariants")
}

/// Per-sample cost `J_t(y)`: surrogate objective of the covariance updated with `y`,
/// plus `γ λ(1−λ) ‖y − Wx‖²` (the prediction weight carries the same scale as the
/// statistics update).
pub fn objective_jt(state: &PemState, y: &[f64], x: &[f64], cfg: &PemConfig) -> f64 {
    let prov = provisional_statistics(state, y, cfg);
    let prediction = state.w().mul_vec(x);
    let err: f64 = y.iter().zip(&prediction).map(|(a, b)| (a - b).powi(2)).sum();
    let scale = cfg.lambda * (1.0 - cfg.lambda);
    surrogate_objective(&prov.covariance(), cfg.epsilon).unwrap_or(f64::NAN) + cfg.gamma_pred * scale * err
}

/// Truncated gradient `g` and discarded term `r` at `y`, with
/// `∇J_t(y) = 2λ(1−λ)(g − r)`.
pub fn gradient_terms(state: &PemState, y: &[f64], x: &[f64], cfg: &PemConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if cfg.variant != Variant::Normalized {
        return Err(invalid("gradient terms are defined for the normalized variant"));
    }
    let prov = provisional_statistics(state, y, cfg);
    let prediction = state.w().mul_vec(x);
    let g: Vec<f64> = direction_with_prediction(&prov, y, &prediction, cfg)
        .into_iter()
        .map(|d| -d)
        .collect();
    let b = normalized_offdiag(&prov.covariance(), cfg.epsilon)?;
    let n = state.n();
    let r = (0..n)
        .map(|k| {
            let b2_kk: f64 = (0..n).map(|j| b.get(k, j).powi(2)).sum();
            b2_kk * (y[k] - prov.mu_hat()[k]) / (prov.v_hat()[k] + cfg.epsilon)
        })
        .collect();
    Ok((g, r))
}

pub fn descent_check(state: &PemState, y: &[f64], x: &[f64], cfg: &PemConfig) -> Result<DescentReport> {
    let (g, r) = gradient_terms(state, y, x, cfg)?;
    let prov = provisional_statistics(state, y, cfg);
    let g_norm = norm(&g);
    let r_norm = norm(&r);
    let b = normalized_offdiag(&prov.covariance(), cfg.epsilon)?;
    let b_spec = sym_eigvals(&b)?.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let min_denom = prov
        .v_hat()
        .iter()
        .map(|v| v + cfg.epsilon)
        .fold(f64::INFINITY, f64::min);
    let centered: Vec<f64> = y.iter().zip(prov.mu_hat()).map(|(a, m)| a - m).collect();
    let coarse = b_spec * b_spec / min_denom * norm(&centered);
    Ok(DescentReport {
        g_norm,
        r_norm,
        descent_certified: r_norm < g_norm,
        coarse_certified: coarse < g_norm,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Worst-case surrogate/exact gap `n ρ³ / (3(1−ρ))` when `‖B‖₂ ≤ ρ < 1`.
pub fn near_optimality_gap(rho: f64, n: usize) -> f64 {
    n as f64 * rho.powi(3) / (3.0 * (1.0 - rho))
}

/// True iff every sample's surrogate/exact gap is within its own norm bound and,
/// when the largest `‖B‖₂` over the batch is below one, within the uniform gap.
pub fn certify_uniform_gap(samples: &[SymmetricMatrix], eps: f64) -> Result<bool> {
    if samples.is_empty() {
        return Err(invalid("no samples to certify"));
    }
    let mut gaps = Vec::with_capacity(samples.len());
    let mut rho = 0.0_f64;
    for c in samples {
        let rep = taylor_remainder(c, eps)?;
        let gap = (surrogate_objective(c, eps)? - exact_objective(c, eps)?).abs();
        if gap > rep.norm_bound + slack(gap) {
            return Ok(false);
        }
        rho = rho.max(rep.b_spec);
        gaps.push((c.dim(), gap));
    }
    if rho < 1.0 {
        for (n, gap) in gaps {
            if gap > near_optimality_gap(rho, n) + slack(gap) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn slack(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

/// One row of the diagnostics trace CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub remainder: RemainderReport,
    pub g_norm: f64,
    pub r_norm: f64,
    pub descent_certified: bool,
}

impl TraceRow {
    pub const HEADER: [&'static str; 11] = [
        "t",
        "r2_direct",
        "r2_spectral",
        "lower_bound",
        "upper_bound",
        "norm_bound",
        "b_spec",
        "b_lambda_min",
        "g_norm",
        "r_norm",
        "descent_certified",
    ];

    pub fn from_trace(sample: &TraceSample, eps: f64) -> Result<Self> {
        Ok(Self {
            t: sample.t,
            remainder: taylor_remainder(&sample.covariance, eps)?,
            g_norm: sample.g_norm,
            r_norm: sample.r_norm,
            descent_certified: sample.descent_certified,
        })
    }

    pub fn fields(&self) -> Vec<String> {
        let r = &self.remainder;
        let mut out = vec![self.t.to_string()];
        out.extend(
            [
                r.r2_direct,
                r.r2_spectral,
                r.lower_bound,
                r.upper_bound,
                r.norm_bound,
                r.b_spec,
                r.b_lambda_min,
                self.g_norm,
                self.r_norm,
            ]
            .iter()
            .map(|v| format!("{v:e}")),
        );
        out.push(u8::from(self.descent_certified).to_string());
        out
    }
}
