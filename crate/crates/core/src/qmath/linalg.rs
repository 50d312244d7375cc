//! Dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalues at or below this are treated as zero.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Largest entry of |M − M†|.
pub fn hermiticity_gap(m: &CMatrix) -> f64 {
    let mut gap: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            gap = gap.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    gap
}

/// Eigen-decomposition of the Hermitian part of `m`: eigenvalues ascending
/// and the matching orthonormal eigenvectors as columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// V·diag(f(λ))·V† for the Hermitian part of `m`.
pub fn hermitian_fn<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> CMatrix {
    let (vals, vecs) = eigh(m);
    from_spectrum(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>(), &vecs)
}

/// V·diag(values)·V†.
pub fn from_spectrum(values: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &v) in values.iter().enumerate() {
        for r in 0..n {
            scaled[(r, k)] *= v;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of the positive part.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |v| v.max(0.0).sqrt())
}

/// Σ|λ| of the Hermitian part.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Largest |(U†U − I)_{ij}|.
pub fn unitarity_gap(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols()))
        .iter()
        .fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Permutes rows and columns: result[perm[i], perm[j]] = m[i, j].
pub fn permute_basis(m: &CMatrix, perm: &[usize]) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

pub fn permute_vector(v: &CVector, perm: &[usize]) -> CVector {
    let mut out = CVector::zeros(v.len());
    for i in 0..v.len() {
        out[perm[i]] = v[i];
    }
    out
}

/// Unitary exp(iH) for Hermitian H.
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, v);
        for r in 0..n {
            scaled[(r, k)] *= ph;
        }
    }
    scaled * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), c(2.0)],
        );
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        assert!(max_abs(&(from_spectrum(&vals, &vecs) - &m)) < 1e-12);
    }

    #[test]
    fn expi_is_unitary() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.3), c(1.0), c(1.0), c(-0.7)]);
        assert!(unitarity_gap(&expi_hermitian(&h)) < 1e-12);
    }
}
