//! `PEMS` state checkpoints.
//!
//! Layout (little-endian): magic `PEMS`, version `u32`, `n u32`, `m u32`, `t u64`,
//! then `f64` values for `W` (row-major `n x m`), `μ̂`, `v̂`, the strict upper
//! triangle of `ĉ` (row-major), and `λ_L`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::math::{Matrix, SymmetricMatrix};

use super::state::PemState;

const MAGIC: &[u8; 4] = b"PEMS";
const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, state: &PemState) -> Result<()> {
    let (n, m) = (state.n(), state.m());
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(m as u32).to_le_bytes())?;
    w.write_all(&state.t().to_le_bytes())?;
    let mut values: Vec<f64> = state.w().as_slice().to_vec();
    values.extend_from_slice(state.mu_hat());
    values.extend_from_slice(state.v_hat());
    for i in 0..n {
        for j in (i + 1)..n {
            values.push(state.c_hat().get(i, j));
        }
    }
    values.push(state.lambda_l());
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<PemState> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if &b4 != MAGIC {
        return Err(Error::Format("bad checkpoint magic".into()));
    }
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let m = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let t = u64::from_le_bytes(b8);
    if n == 0 || m == 0 {
        return Err(Error::Format("empty state".into()));
    }

    let mut next = || -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let w = Matrix::from_vec(n, m, (0..n * m).map(|_| next()).collect::<Result<_>>()?)?;
    let mu = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let v = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let mut c = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            c.set(i, j, next()?);
        }
    }
    let lambda_l = next()?;
    PemState::from_parts(w, mu, v, c, t, lambda_l)
}
