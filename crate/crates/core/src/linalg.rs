//! Fixed-size dense complex matrices for the qubit (2x2) and four-level
//! (4x4) spaces.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Op2 = Matrix2<C64>;
pub type Op4 = Matrix4<C64>;
pub type Ket2 = Vector2<C64>;
pub type Ket4 = Vector4<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest elementwise |M - M^dagger|.
pub fn hermiticity_error4(m: &Op4) -> f64 {
    max_abs_diff4(m, &m.adjoint())
}

pub fn max_abs_diff4(a: &Op4, b: &Op4) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff2(a: &Op2, b: &Op2) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitize4(m: &Op4) -> Op4 {
    (m + m.adjoint()) * real(0.5)
}

pub fn is_unitary2(u: &Op2) -> bool {
    max_abs_diff2(&(u.adjoint() * u), &Op2::identity()) <= UNITARY_TOL
}

pub fn frobenius4(m: &Op4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a Hermitian 4x4 matrix in ascending order. Only the
/// Hermitian part of `m` is used.
pub fn hermitian_eigenvalues4(m: &Op4) -> [f64; 4] {
    let eig = SymmetricEigen::new(hermitize4(m));
    let mut vals = [0.0; 4];
    for (v, e) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
        *v = *e;
    }
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eigenvalue4(m: &Op4) -> f64 {
    hermitian_eigenvalues4(m)[0]
}

/// Distance between two qubit operators with the relative global phase
/// minimized: min over phi of ||a - e^{i phi} b||_F.
///
/// The optimum is attained at e^{i phi} = conj(z)/|z| with z = Tr(a^dagger b).
pub fn phase_min_distance(a: &Op2, b: &Op2) -> f64 {
    let z = (a.adjoint() * b).trace();
    let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { real(1.0) };
    (a - b * phase).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn pauli_x() -> Op2 {
    Op2::new(real(0.0), real(1.0), real(1.0), real(0.0))
}

pub fn pauli_y() -> Op2 {
    Op2::new(real(0.0), c(0.0, -1.0), c(0.0, 1.0), real(0.0))
}

pub fn pauli_z() -> Op2 {
    Op2::new(real(1.0), real(0.0), real(0.0), real(-1.0))
}

/// |a><b| on the four-level space.
pub fn ket_bra4(a: usize, b: usize) -> Op4 {
    let mut m = Op4::zeros();
    m[(a, b)] = real(1.0);
    m
}
