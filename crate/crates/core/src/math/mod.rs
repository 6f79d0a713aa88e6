//! Small dense linear algebra and special functions.

mod linalg;
mod special;

pub use linalg::{cholesky_factor, cholesky_logdet, sym_eigvals, Matrix, SymmetricMatrix};
pub use special::{ln_gamma, reg_incomplete_beta, student_t_cdf, student_t_quantile};
