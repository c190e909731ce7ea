//! Small dense PD helpers: Cholesky-backed weighted norms.
//!
//! All matrices in this crate are `d x d` with tiny `d`, so we factor eagerly
//! and answer `|v|_M` / `|v|_{M^{-1}}` through triangular work rather than
//! ever forming an inverse.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// A Cholesky factorization of a positive-definite matrix, kept around so
/// repeated weighted norms against the same matrix cost `O(d^2)`.
#[derive(Debug, Clone)]
pub struct PdFactor {
    chol: Cholesky<f64, Dyn>,
    /// Clean lower factor (upper triangle zeroed; `l_dirty` keeps input
    /// garbage there, which transpose products would read).
    l: DMatrix<f64>,
    dim: usize,
}

impl PdFactor {
    /// Factors `m`; fails if it is not (numerically) positive definite.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() {
            return Err(Error::Dimension { expected: dim, got: m.ncols() });
        }
        let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
        let l = chol.l();
        Ok(PdFactor { chol, l, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|v|_M = sqrt(v' M v)`, via `|L' v|` with `M = L L'`.
    pub fn norm(&self, v: &DVector<f64>) -> Result<f64> {
        self.check(v)?;
        Ok(self.l.tr_mul(v).norm())
    }

    /// `|v|_{M^{-1}} = sqrt(v' M^{-1} v)`, via the forward solve `L w = v`.
    pub fn inv_norm(&self, v: &DVector<f64>) -> Result<f64> {
        self.check(v)?;
        let w = self
            .l
            .solve_lower_triangular(v)
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(w.norm())
    }

    /// Solves `M x = v`.
    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v)?;
        Ok(self.chol.solve(v))
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: v.len() });
        }
        Ok(())
    }
}

/// One-shot `|v|_M`; factors internally.
pub fn quad_norm(v: &DVector<f64>, m: &DMatrix<f64>) -> Result<f64> {
    PdFactor::new(m.clone())?.norm(v)
}

/// One-shot `|v|_{M^{-1}}`; factors internally.
pub fn quad_norm_inv(v: &DVector<f64>, m: &DMatrix<f64>) -> Result<f64> {
    PdFactor::new(m.clone())?.inv_norm(v)
}
