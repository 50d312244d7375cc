//! Seeded random states, unitaries, channels and measurements.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{self, c, CMatrix, CVector};
use super::space::HilbertSpace;
use super::state::{DensityOperator, Povm, PureState};

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar unitary: Q from the QR factorization of a Ginibre matrix, with the
/// phases of R's diagonal moved into Q.
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    isometry(n, n, rng)
}

/// Haar isometry with `rows ≥ cols`.
pub fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..cols {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        for i in 0..rows {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Ginibre density operator of the given rank (full rank when `rank` is None).
pub fn density<R: Rng + ?Sized>(space: &HilbertSpace, rank: Option<usize>, rng: &mut R) -> DensityOperator {
    let n = space.dim();
    let g = ginibre(n, rank.unwrap_or(n).max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_parts_unchecked(space.clone(), linalg::hermitian_part(&(m / c(tr))))
}

pub fn pure<R: Rng + ?Sized>(space: &HilbertSpace, rng: &mut R) -> PureState {
    let v: CVector = ginibre(space.dim(), 1, rng).column(0).into_owned();
    let norm = v.norm();
    PureState::from_parts_unchecked(space.clone(), v / c(norm))
}

/// Kraus operators of a random channel from `din` to `dout` dimensions,
/// cut from a random isometry into `dout·count`. The count is raised to
/// ⌈din/dout⌉ when smaller, since fewer operators can't be trace preserving.
pub fn channel<R: Rng + ?Sized>(din: usize, dout: usize, count: usize, rng: &mut R) -> Vec<CMatrix> {
    let count = count.max(din.div_ceil(dout.max(1)));
    let v = isometry(dout * count, din, rng);
    (0..count)
        .map(|k| v.rows(k * dout, dout).into_owned())
        .collect()
}

/// Random POVM: S^{-1/2}·G_aG_a†·S^{-1/2} with S = Σ G_aG_a†.
pub fn povm<R: Rng + ?Sized>(space: &HilbertSpace, outcomes: usize, rng: &mut R) -> Povm {
    let n = space.dim();
    let parts: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(n, n, rng);
            &g * g.adjoint()
        })
        .collect();
    let s = parts.iter().fold(CMatrix::zeros(n, n), |acc, p| acc + p);
    let inv_half = linalg::hermitian_fn(&s, |v| 1.0 / v.max(1e-300).sqrt());
    let elements = parts
        .iter()
        .map(|p| linalg::hermitian_part(&(&inv_half * p * &inv_half)))
        .collect();
    Povm::from_parts_unchecked(space.clone(), elements)
}

/// Random projective measurement: the columns of a Haar unitary dealt
/// round-robin to the outcomes.
pub fn projective<R: Rng + ?Sized>(space: &HilbertSpace, outcomes: usize, rng: &mut R) -> Povm {
    let n = space.dim();
    let u = unitary(n, rng);
    let mut elements = vec![CMatrix::zeros(n, n); outcomes];
    for j in 0..n {
        let col: CVector = u.column(j).into_owned();
        elements[j % outcomes] += linalg::outer(&col);
    }
    Povm::from_parts_unchecked(space.clone(), elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn random_objects_are_valid() {
        let mut r = rng::stream(1, 0);
        let s = HilbertSpace::of(&[("A", 3)]).unwrap();
        assert!(linalg::unitarity_gap(&unitary(4, &mut r)) < 1e-12);
        let d = density(&s, None, &mut r);
        assert!(DensityOperator::new(s.clone(), d.matrix().clone()).is_ok());
        let p = povm(&s, 3, &mut r);
        assert!(Povm::new(s.clone(), p.elements().to_vec()).is_ok());
        let q = projective(&s, 2, &mut r);
        assert!(Povm::new(s.clone(), q.elements().to_vec()).is_ok());
        let k = channel(3, 2, 3, &mut r);
        assert!(super::super::state::check_kraus(&k, 3, 2).is_ok());
    }
}
