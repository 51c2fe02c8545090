//! Dense complex linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex Gaussian with `E[|z|^2] = variance` (real and imaginary parts
/// each carry half the variance).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * re, sigma * im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut max = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
            if dev > max {
                max = dev;
            }
        }
    }
    max
}

/// Frobenius norm of `U U^dag - I`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let d = u.nrows();
    (u * u.adjoint() - identity(d)).norm()
}

/// Force exact Hermiticity; `(m + m^dag) / 2` is entrywise exactly
/// Hermitian in floating point.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    out
}

/// `I_{2^left} ⊗ g ⊗ I_{2^right}` for a two-qubit gate in a chain of qubits.
pub fn embed_gate(gate: &CMatrix, left_dim: usize, right_dim: usize) -> CMatrix {
    let left = identity(left_dim);
    let right = identity(right_dim);
    left.kronecker(gate).kronecker(&right)
}

pub fn log2_exact(dim: usize) -> Option<u32> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros())
    } else {
        None
    }
}
