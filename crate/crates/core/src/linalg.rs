//! Complex dense linear algebra helpers shared across the crate.
//!
//! Everything runs on `nalgebra` dynamic matrices over `Complex64`. The
//! Hilbert spaces here are small (dimension ≤ 75) so dense storage is fine;
//! the propagators in [`crate::dynamics`] use a sparse application path on
//! top of these types.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Shorthand for `a + b·i`.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The imaginary unit.
pub const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deviation from Hermiticity, `max |m - m†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns,
/// ordered consistently with the eigenvalues.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order.iter().map(|&i| se.eigenvectors.column(i).clone_owned()).collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0[0]
}

/// `exp(factor · h)` for Hermitian `h`, via its eigendecomposition.
pub fn exp_hermitian(h: &CMatrix, factor: Complex64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = CVector::from_iterator(values.len(), values.iter().map(|&v| (factor * v).exp()));
    &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint()
}

/// Trace distance `½ Tr |a - b|` between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(a - b));
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Inner product `⟨a|b⟩` with the physicist's convention (conjugate-linear
/// in the first argument).
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// Fixed-step RK4 for i ψ̇ = H(t) ψ with a dense Hamiltonian closure.
///
/// For the small projected systems only; the full-space propagators in
/// [`crate::dynamics`] use the sparse path.
pub fn rk4_schrodinger<H>(h: H, psi0: &CVector, t0: f64, t1: f64, steps: usize) -> CVector
where
    H: Fn(f64) -> CMatrix,
{
    let dt = (t1 - t0) / steps as f64;
    let rhs = |t: f64, psi: &CVector| -> CVector { (h(t) * psi).map(|z| -IM * z) };
    let mut psi = psi0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + dt / 2.0, &(&psi + &k1 * c64(dt / 2.0, 0.0)));
        let k3 = rhs(t + dt / 2.0, &(&psi + &k2 * c64(dt / 2.0, 0.0)));
        let k4 = rhs(t + dt, &(&psi + &k3 * c64(dt, 0.0)));
        psi += (k1 + k2 * c64(2.0, 0.0) + k3 * c64(2.0, 0.0) + k4) * c64(dt / 6.0, 0.0);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermitian_eigen_recovers_matrix() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(1.0, 0.0), c64(0.0, -2.0), c64(0.5, 0.0),
                c64(0.0, 2.0), c64(-1.0, 0.0), c64(0.0, 0.0),
                c64(0.5, 0.0), c64(0.0, 0.0), c64(0.3, 0.0),
            ],
        );
        let (values, vectors) = hermitian_eigen(&m);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(
            3,
            values.iter().map(|&v| c64(v, 0.0)),
        ));
        let rebuilt = &vectors * diag * vectors.adjoint();
        assert_abs_diff_eq!(max_abs(&(rebuilt - m)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn exp_hermitian_is_unitary() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let u = exp_hermitian(&m, c64(0.0, -1.0) * 0.7);
        let id = &u * u.adjoint();
        assert_abs_diff_eq!(max_abs(&(id - CMatrix::identity(2, 2))), 0.0, epsilon = 1e-12);
        // exp(-0.7i σx) rotates |0> with cos(0.7) survival amplitude
        assert_abs_diff_eq!(u[(0, 0)].re, 0.7f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(u[(1, 0)].im, -(0.7f64.sin()), epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors() {
        let p0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]));
        let p1 = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.0, 0.0), c64(1.0, 0.0)]));
        assert_abs_diff_eq!(trace_distance(&p0, &p1), 1.0, epsilon = 1e-12);
    }
}
