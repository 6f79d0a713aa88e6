//! Ground-truth sources, mixing matrices and noisy mixtures.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal, StudentT};

use crate::domains::SourceDomain;
use crate::error::{invalid, Error, Result};
use crate::math::{cholesky_factor, student_t_cdf, Matrix, SymmetricMatrix};
use crate::rng::{stream, Purpose};

/// Unit-variance, zero-mean law for the entries of the mixing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixingDistribution {
    /// N(0, 1)
    Gaussian,
    /// U(-√3, √3)
    Uniform,
    /// Laplace(0, 1/√2)
    Laplace,
    /// ±1 with equal probability
    Rademacher,
    /// √(3/5) t₅
    StudentT5,
}

impl MixingDistribution {
    pub const ALL: [MixingDistribution; 5] = [
        MixingDistribution::Gaussian,
        MixingDistribution::Uniform,
        MixingDistribution::Laplace,
        MixingDistribution::Rademacher,
        MixingDistribution::StudentT5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MixingDistribution::Gaussian => "gaussian",
            MixingDistribution::Uniform => "uniform",
            MixingDistribution::Laplace => "laplace",
            MixingDistribution::Rademacher => "rademacher",
            MixingDistribution::StudentT5 => "student_t5",
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            MixingDistribution::Gaussian => rng.sample(StandardNormal),
            MixingDistribution::Uniform => {
                let s3 = 3f64.sqrt();
                rng.random_range(-s3..s3)
            }
            MixingDistribution::Laplace => {
                // inverse CDF with scale b = 1/√2, u uniform on (-1/2, 1/2)
                let b = std::f64::consts::FRAC_1_SQRT_2;
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            MixingDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            MixingDistribution::StudentT5 => {
                let t: f64 = StudentT::new(5.0).expect("valid dof").sample(rng);
                (3.0f64 / 5.0).sqrt() * t
            }
        }
    }
}

impl fmt::Display for MixingDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MixingDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MixingDistribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| invalid(format!("unknown mixing distribution {s:?}")))
    }
}

/// `n x T` source matrix; column `t` is the source vector at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceBatch {
    pub s: Matrix,
    pub domain: SourceDomain,
    pub rho: f64,
    pub seed: u64,
}

fn check_dims(n: usize, t: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 sources, got {n}")));
    }
    if t < 1 {
        return Err(invalid("need at least one sample"));
    }
    Ok(())
}

/// Flat Dirichlet draw via normalized unit exponentials.
fn flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = rng.sample::<f64, _>(Exp1);
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
}

/// i.i.d. columns drawn uniformly from `domain`.
pub fn sample_uniform_source(domain: SourceDomain, n: usize, t: usize, seed: u64) -> Result<SourceBatch> {
    check_dims(n, t)?;
    let mut rng = stream(seed, Purpose::Sources);
    let mut s = Matrix::zeros(n, t);
    let mut col = vec![0.0; n];
    for j in 0..t {
        match domain {
            SourceDomain::Antisparse => col.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)),
            SourceDomain::NonnegAntisparse => col.iter_mut().for_each(|v| *v = rng.random_range(0.0..1.0)),
            SourceDomain::Simplex => flat_dirichlet(&mut rng, &mut col),
            SourceDomain::Sparse | SourceDomain::NonnegSparse => {
                flat_dirichlet(&mut rng, &mut col);
                // the ℓ₁ ball is a cone over the simplex face: radius ~ U^(1/n)
                let radius = rng.random::<f64>().powf(1.0 / n as f64);
                for v in col.iter_mut() {
                    *v *= radius;
                    if domain == SourceDomain::Sparse && rng.random::<bool>() {
                        *v = -*v;
                    }
                }
            }
        }
        s.set_column(j, &col);
    }
    Ok(SourceBatch {
        s,
        domain,
        rho: 0.0,
        seed,
    })
}

/// Correlated sources with uniform marginals from a Student-t copula with
/// equicorrelation `rho` and `nu` degrees of freedom. Box domains only.
pub fn sample_copula_t_source(
    domain: SourceDomain,
    n: usize,
    t: usize,
    rho: f64,
    nu: f64,
    seed: u64,
) -> Result<SourceBatch> {
    check_dims(n, t)?;
    if !domain.is_box() {
        return Err(Error::DomainMismatch(domain.name().to_string()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("copula correlation must lie in [0, 1), got {rho}")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("degrees of freedom must be positive, got {nu}")));
    }
    let corr = SymmetricMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { rho });
    let l = cholesky_factor(&corr, 1e-14)?;
    let integer_nu = (nu.fract() == 0.0 && nu <= 64.0).then_some(nu as usize);
    let chi2 = ChiSquared::new(nu).map_err(|e| invalid(e.to_string()))?;

    let mut rng = stream(seed, Purpose::Sources);
    let mut s = Matrix::zeros(n, t);
    let mut xi = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..t {
        xi.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let g: f64 = match integer_nu {
            Some(k) => (0..k).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum(),
            None => chi2.sample(&mut rng),
        };
        let scale = (nu / g).sqrt();
        for i in 0..n {
            let z: f64 = (0..=i).map(|k| l.get(i, k) * xi[k]).sum();
            let u = student_t_cdf(z * scale, nu)?;
            col[i] = match domain {
                SourceDomain::Antisparse => 2.0 * u - 1.0,
                _ => u,
            };
        }
        s.set_column(j, &col);
    }
    Ok(SourceBatch { s, domain, rho, seed })
}

fn has_full_column_rank(a: &Matrix) -> bool {
    cholesky_factor(&a.gram(), 1e-10).is_ok()
}

/// `m x n` mixing matrix with i.i.d. entries; resampled (up to 10 draws) until it
/// has full column rank.
pub fn gen_mixing(m: usize, n: usize, dist: MixingDistribution, seed: u64) -> Result<Matrix> {
    const ATTEMPTS: usize = 10;
    if n < 2 || m < n {
        return Err(invalid(format!("mixing needs m >= n >= 2, got m={m}, n={n}")));
    }
    let mut rng = stream(seed, Purpose::Mixing);
    for _ in 0..ATTEMPTS {
        let a = Matrix::from_fn(m, n, |_, _| dist.sample(&mut rng));
        if has_full_column_rank(&a) {
            return Ok(a);
        }
    }
    Err(Error::DegenerateMixing { attempts: ATTEMPTS })
}

/// `X = A S + noise` with noise variance set by the input SNR (dB), measured as the
/// mean power of `A S` over all channels and samples. `None` means noiseless.
pub fn mix_with_noise(a: &Matrix, s: &SourceBatch, snr_in_db: Option<f64>, seed: u64) -> Result<(Matrix, f64)> {
    let clean = a.matmul(&s.s)?;
    let Some(snr) = snr_in_db else {
        return Ok((clean, 0.0));
    };
    if !snr.is_finite() {
        return Err(invalid(format!("input SNR must be finite, got {snr}")));
    }
    let signal_power = clean.frobenius_sq() / (clean.rows() * clean.cols()) as f64;
    let sigma2 = signal_power / 10f64.powf(snr / 10.0);
    let sigma = sigma2.sqrt();
    let mut rng = stream(seed, Purpose::Noise);
    let mut x = clean;
    for v in x.as_mut_slice() {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    Ok((x, sigma2))
}

/// The first `rows` rows of `a`, which must still have full column rank.
pub fn take_first_rows(a: &Matrix, rows: usize) -> Result<Matrix> {
    if rows < a.cols() || rows > a.rows() {
        return Err(invalid(format!(
            "row prefix {rows} must lie in [{}, {}]",
            a.cols(),
            a.rows()
        )));
    }
    let p = a.top_rows(rows);
    if !has_full_column_rank(&p) {
        return Err(Error::DegenerateMixing { attempts: 0 });
    }
    Ok(p)
}

const CONTAINER_MAGIC: &[u8; 4] = b"PEMB";
const CONTAINER_VERSION: u32 = 1;

/// Generated data as stored in a `PEMB` container.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDump {
    pub domain: SourceDomain,
    pub s: Matrix,
    pub a: Matrix,
    pub x: Matrix,
}

/// Writes the little-endian `PEMB` container: header
/// `{magic, version u32, n u32, m u32, T u64, domain (u32 length + UTF-8)}`
/// followed by `S`, `A`, `X` as row-major `f64`.
pub fn write_container<W: Write>(mut w: W, dump: &DataDump) -> Result<()> {
    let (n, t) = (dump.s.rows(), dump.s.cols());
    let m = dump.a.rows();
    if dump.a.cols() != n || dump.x.rows() != m || dump.x.cols() != t {
        return Err(invalid("inconsistent S/A/X shapes"));
    }
    w.write_all(CONTAINER_MAGIC)?;
    w.write_all(&CONTAINER_VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(m as u32).to_le_bytes())?;
    w.write_all(&(t as u64).to_le_bytes())?;
    let name = dump.domain.name().as_bytes();
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name)?;
    for mat in [&dump.s, &dump.a, &dump.x] {
        for v in mat.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_matrix<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Matrix> {
    let mut data = vec![0.0; rows * cols];
    let mut b = [0u8; 8];
    for v in data.iter_mut() {
        r.read_exact(&mut b)?;
        *v = f64::from_le_bytes(b);
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn read_container<R: Read>(mut r: R) -> Result<DataDump> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CONTAINER_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CONTAINER_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let t = u64::from_le_bytes(b) as usize;
    let len = read_u32(&mut r)? as usize;
    let mut name = vec![0u8; len];
    r.read_exact(&mut name)?;
    let name = String::from_utf8(name).map_err(|e| Error::Format(e.to_string()))?;
    let domain = name.parse()?;
    let s = read_matrix(&mut r, n, t)?;
    let a = read_matrix(&mut r, m, n)?;
    let x = read_matrix(&mut r, m, t)?;
    Ok(DataDump { domain, s, a, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_columns_sum_to_one() {
        let b = sample_uniform_source(SourceDomain::Simplex, 4, 500, 1).unwrap();
        for j in 0..500 {
            let sum: f64 = b.s.column(j).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_domain_sample_is_feasible() {
        for d in SourceDomain::ALL {
            let b = sample_uniform_source(d, 3, 2000, 5).unwrap();
            for j in 0..2000 {
                assert!(d.contains(&b.s.column(j), 1e-9), "{d} column {j}");
            }
        }
    }

    #[test]
    fn copula_rejects_non_box_domains() {
        assert!(matches!(
            sample_copula_t_source(SourceDomain::Sparse, 3, 10, 0.2, 4.0, 0),
            Err(Error::DomainMismatch(_))
        ));
        assert!(sample_copula_t_source(SourceDomain::Antisparse, 3, 10, 1.0, 4.0, 0).is_err());
    }

    #[test]
    fn rademacher_entries_are_signs() {
        let a = gen_mixing(10, 5, MixingDistribution::Rademacher, 3).unwrap();
        assert!(a.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn gaussian_mixing_variance() {
        let a = gen_mixing(10, 5, MixingDistribution::Gaussian, 11).unwrap();
        let var = a.frobenius_sq() / 50.0;
        assert!((var - 1.0).abs() < 0.5, "var {var}");
        assert!(gen_mixing(3, 4, MixingDistribution::Gaussian, 0).is_err());
    }

    #[test]
    fn noiseless_mixture_is_exact_product() {
        let s = sample_uniform_source(SourceDomain::Antisparse, 3, 50, 2).unwrap();
        let a = gen_mixing(5, 3, MixingDistribution::Gaussian, 2).unwrap();
        let (x, sigma2) = mix_with_noise(&a, &s, None, 2).unwrap();
        assert_eq!(sigma2, 0.0);
        assert_eq!(x, a.matmul(&s.s).unwrap());
    }

    #[test]
    fn noise_variance_formula() {
        let s = sample_uniform_source(SourceDomain::Antisparse, 3, 50, 2).unwrap();
        let a = gen_mixing(5, 3, MixingDistribution::Gaussian, 2).unwrap();
        let clean = a.matmul(&s.s).unwrap();
        let p = clean.frobenius_sq() / (5.0 * 50.0);
        let (_, sigma2) = mix_with_noise(&a, &s, Some(30.0), 2).unwrap();
        assert!((sigma2 - p / 1000.0).abs() < 1e-15 * p);
    }

    #[test]
    fn row_prefix() {
        let a = gen_mixing(13, 5, MixingDistribution::Gaussian, 9).unwrap();
        assert_eq!(take_first_rows(&a, 13).unwrap(), a);
        let p = take_first_rows(&a, 7).unwrap();
        assert_eq!(p.rows(), 7);
        for i in 0..7 {
            assert_eq!(p.row(i), a.row(i));
        }
        assert!(matches!(take_first_rows(&a, 4), Err(Error::InvalidInput(_))));
        // a prefix that loses rank is rejected
        let mut d = Matrix::zeros(6, 2);
        d.set(0, 0, 1.0);
        d.set(1, 0, 2.0);
        d.set(5, 1, 1.0);
        assert!(matches!(take_first_rows(&d, 2), Err(Error::DegenerateMixing { .. })));
    }

    #[test]
    fn container_round_trip() {
        let s = sample_uniform_source(SourceDomain::NonnegSparse, 2, 7, 4).unwrap();
        let a = gen_mixing(3, 2, MixingDistribution::Laplace, 4).unwrap();
        let (x, _) = mix_with_noise(&a, &s, Some(20.0), 4).unwrap();
        let dump = DataDump {
            domain: s.domain,
            s: s.s,
            a,
            x,
        };
        let mut buf = Vec::new();
        write_container(&mut buf, &dump).unwrap();
        assert_eq!(&buf[..4], b"PEMB");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(read_container(&buf[..]).unwrap(), dump);
        buf[0] = b'X';
        assert!(matches!(read_container(&buf[..]), Err(Error::Format(_))));
    }
}
