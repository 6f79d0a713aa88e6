use crate::error::{invalid, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function, modified Lentz method.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 200;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("beta parameters must be positive, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("x = {x} outside [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Student-t cumulative distribution function with `nu` degrees of freedom.
pub fn student_t_cdf(x: f64, nu: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("non-finite argument {x}")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("degrees of freedom must be positive, got {nu}")));
    }
    let ax = x.abs();
    let x2 = ax * ax;
    // pick whichever argument of I keeps the small quantity un-cancelled
    let upper = if x2 < nu {
        0.5 + 0.5 * reg_incomplete_beta(0.5, 0.5 * nu, x2 / (nu + x2))?
    } else {
        1.0 - 0.5 * reg_incomplete_beta(0.5 * nu, 0.5, nu / (nu + x2))?
    };
    Ok(if x >= 0.0 { upper } else { 1.0 - upper })
}

/// Inverse of [`student_t_cdf`] by bracketing and bisection.
pub fn student_t_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("probability {p} outside (0, 1)")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut lo = -1.0;
    let mut hi = 1.0;
    while student_t_cdf(lo, nu)? > p {
        lo *= 2.0;
        if lo < -1e300 {
            break;
        }
    }
    while student_t_cdf(hi, nu)? < p {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..2000 {
        mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid.abs().max(1.0) {
            break;
        }
        if student_t_cdf(mid, nu)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        // 10! = 3628800
        assert!((ln_gamma(11.0) - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_endpoints_and_symmetry() {
        assert_eq!(reg_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(reg_incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        assert!((reg_incomplete_beta(0.5, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(reg_incomplete_beta(1.0, 1.0, 1.5).is_err());
        assert!(reg_incomplete_beta(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, b) = 1 - (1-x)^b and I_x(a, 1) = x^a
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.999] {
            let v = reg_incomplete_beta(1.0, 3.5, x).unwrap();
            assert!((v - (1.0 - (1.0 - x).powf(3.5))).abs() < 1e-12, "x={x}");
            let v = reg_incomplete_beta(2.5, 1.0, x).unwrap();
            assert!((v - x.powf(2.5)).abs() < 1e-12, "x={x}");
            // arcsine law: I_x(1/2, 1/2) = (2/π) asin(√x)
            let v = reg_incomplete_beta(0.5, 0.5, x).unwrap();
            let want = 2.0 / std::f64::consts::PI * x.sqrt().asin();
            assert!((v - want).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn t_cdf_basic() {
        assert_eq!(student_t_cdf(0.0, 4.0).unwrap(), 0.5);
        assert!((student_t_cdf(1e150, 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(student_t_cdf(f64::NAN, 4.0).is_err());
        assert!(student_t_cdf(f64::INFINITY, 4.0).is_err());
        // nu = 1 is Cauchy: F(x) = 1/2 + atan(x)/π
        for &x in &[-3.0, -0.4, 0.1, 2.0, 30.0] {
            let want = 0.5 + f64::atan(x) / std::f64::consts::PI;
            assert!((student_t_cdf(x, 1.0).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn t_quantile_median_and_errors() {
        assert_eq!(student_t_quantile(0.5, 7.0).unwrap(), 0.0);
        assert!(student_t_quantile(0.0, 7.0).is_err());
        assert!(student_t_quantile(1.0, 7.0).is_err());
    }
}
