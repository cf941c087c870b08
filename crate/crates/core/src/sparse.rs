//! Sparse operator application for the propagators.
//!
//! The step Hamiltonians and jump operators have O(dim) nonzeros, so
//! applying them as dense matrices wastes most of the work. This keeps a
//! row-major nonzero list and provides the three products the integrators
//! need: `A·ψ`, `A·ρ`, and `ρ·A` (plus the sandwich `A ρ A†` for
//! dissipators).

use crate::linalg::{CMatrix, CVector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    /// (row, col, value), sorted by row then col.
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix, tol: f64) -> Self {
        let dim = m.nrows();
        assert_eq!(dim, m.ncols(), "sparse operators must be square");
        let mut entries = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                if v.norm() > tol {
                    entries.push((r, c, v));
                }
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// out += scale · A · v
    pub fn apply_add(&self, scale: Complex64, v: &CVector, out: &mut CVector) {
        for &(r, c, a) in &self.entries {
            out[r] += scale * a * v[c];
        }
    }

    /// out += scale · A · ρ
    pub fn left_mul_add(&self, scale: Complex64, rho: &CMatrix, out: &mut CMatrix) {
        let n = self.dim;
        for &(r, c, a) in &self.entries {
            let f = scale * a;
            for j in 0..n {
                out[(r, j)] += f * rho[(c, j)];
            }
        }
    }

    /// out += scale · ρ · A
    pub fn right_mul_add(&self, scale: Complex64, rho: &CMatrix, out: &mut CMatrix) {
        let n = self.dim;
        for &(r, c, a) in &self.entries {
            let f = scale * a;
            for i in 0..n {
                out[(i, c)] += f * rho[(i, r)];
            }
        }
    }

    /// out += scale · A ρ A†
    pub fn sandwich_add(&self, scale: Complex64, rho: &CMatrix, out: &mut CMatrix) {
        // (A ρ A†)[r1, r2] = Σ a1 conj(a2) ρ[c1, c2] over entries (r1,c1,a1), (r2,c2,a2)
        for &(r1, c1, a1) in &self.entries {
            for &(r2, c2, a2) in &self.entries {
                out[(r1, r2)] += scale * a1 * a2.conj() * rho[(c1, c2)];
            }
        }
    }

    /// Diagonal of A†A as real values (exact when A†A is diagonal, which
    /// holds for every jump operator used here; asserted by the caller).
    pub fn gram_diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim];
        for &(_, c, a) in &self.entries {
            diag[c] += a.norm_sqr();
        }
        diag
    }

    /// Whether A†A is diagonal in the computational basis.
    pub fn gram_is_diagonal(&self, tol: f64) -> bool {
        let dense = self.to_dense();
        let gram = dense.adjoint() * dense;
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| i == j || gram[(i, j)].norm() <= tol)
        })
    }
}
