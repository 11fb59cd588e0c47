//! Sparse direct LU with partial pivoting, backed by faer.
//!
//! Rows are equilibrated by their largest entry before factorization; the
//! poroelastic slab systems mix blocks whose magnitudes differ by ~20 orders.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Relative residual bound `||Ax - b||_inf / ||b||_inf` every solve must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 3;

pub struct SparseLu {
    matrix: CsrMatrix,
    row_scale: Vec<f64>,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.matrix.nrows()).field("nnz", &self.matrix.nnz()).finish()
    }
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("LU needs a square matrix, got {:?}", a.shape())));
        }
        let mut row_scale = vec![0.0; n];
        for (i, s) in row_scale.iter_mut().enumerate() {
            let m = a.row(i).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            if m == 0.0 || !m.is_finite() {
                return Err(Error::SingularSystem { slab: None, reason: format!("row {i} is empty or non-finite") });
            }
            *s = 1.0 / m;
        }
        // CSC of the scaled matrix = CSR of its transpose
        let mut t = Vec::with_capacity(a.nnz());
        for (i, j, v) in a.iter() {
            t.push((j, i, v * row_scale[i]));
        }
        let at = CsrMatrix::from_triplets(n, n, t);
        let symbolic = SymbolicSparseColMatRef::new_checked(n, n, at.row_offsets(), None, at.col_indices());
        let csc = SparseColMatRef::new(symbolic, at.values());
        let lu = csc
            .sp_lu()
            .map_err(|e| Error::SingularSystem { slab: None, reason: format!("factorization failed: {e:?}") })?;
        Ok(Self { matrix: a.clone(), row_scale, lu })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = b.iter().zip(&self.row_scale).map(|(v, s)| v * s).collect();
        {
            let mat = MatMut::from_column_major_slice_mut(&mut x, n, 1);
            self.lu.solve_in_place(mat);
        }
        x
    }

    /// Solves `A x = b` with iterative refinement until the relative residual
    /// meets [`RESIDUAL_TOL`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("rhs has {} entries, matrix {}", b.len(), self.dim())));
        }
        let b_norm = inf_norm(b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.raw_solve(b);
        let mut rel = f64::INFINITY;
        for step in 0..=MAX_REFINEMENT_STEPS {
            let r = residual(&self.matrix, &x, b);
            rel = inf_norm(&r) / b_norm;
            if !rel.is_finite() {
                break;
            }
            if rel < RESIDUAL_TOL || step == MAX_REFINEMENT_STEPS {
                break;
            }
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        }
        if rel < RESIDUAL_TOL {
            Ok(x)
        } else {
            Err(Error::SingularSystem {
                slab: None,
                reason: format!("relative residual {rel:.3e} exceeds {RESIDUAL_TOL:e}"),
            })
        }
    }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    a.mul_vec_add(-1.0, x, &mut r);
    r
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Factors `a` and solves `a x = b`.
pub fn lu_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SparseLu::factor(a)?.solve(b)
}
