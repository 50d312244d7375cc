use super::linalg::{self, c, CMatrix, SUPPORT_CUTOFF};
use super::state::DensityOperator;
use super::{QmathError, Result};

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityOperator) -> f64 {
    entropy_of_matrix(rho.matrix())
}

pub(crate) fn entropy_of_matrix(m: &CMatrix) -> f64 {
    linalg::eigvalsh(m)
        .into_iter()
        .filter(|&v| v > 0.0)
        .map(|v| -v * v.log2())
        .sum()
}

/// ‖ρ − σ‖₁, the sum of absolute eigenvalues of the difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.check_same_space(sigma)?;
    Ok(linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}

/// F(ρ, σ) = ‖√ρ√σ‖₁.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.check_same_space(sigma)?;
    Ok(fidelity_of_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn fidelity_of_matrices(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let f = linalg::trace_norm(&(linalg::sqrt_psd(rho) * linalg::sqrt_psd(sigma)));
    f.clamp(0.0, 1.0)
}

/// Spectral data of σ split into support and kernel.
struct Support {
    values: Vec<f64>,
    vectors: CMatrix,
    kernel: CMatrix,
}

fn support(sigma: &CMatrix) -> Support {
    let (vals, vecs) = linalg::eigh(sigma);
    let n = vals.len();
    let on: Vec<usize> = (0..n).filter(|&i| vals[i] > SUPPORT_CUTOFF).collect();
    let off: Vec<usize> = (0..n).filter(|&i| vals[i] <= SUPPORT_CUTOFF).collect();
    Support {
        values: on.iter().map(|&i| vals[i]).collect(),
        vectors: vecs.select_columns(&on),
        kernel: vecs.select_columns(&off),
    }
}

/// Tr(P_ker(σ)·ρ).
fn kernel_weight(rho: &CMatrix, sup: &Support) -> f64 {
    if sup.kernel.ncols() == 0 {
        return 0.0;
    }
    (sup.kernel.adjoint() * rho * &sup.kernel).trace().re
}

/// S(ρ‖σ) in bits; +∞ when supp ρ ⊄ supp σ.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.check_same_space(sigma)?;
    Ok(relative_entropy_of_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn relative_entropy_of_matrices(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let sup = support(sigma);
    if kernel_weight(rho, &sup) > SUPPORT_CUTOFF {
        return f64::INFINITY;
    }
    let r = sup.vectors.adjoint() * rho * &sup.vectors;
    let cross: f64 = sup
        .values
        .iter()
        .enumerate()
        .map(|(i, &s)| r[(i, i)].re * s.log2())
        .sum();
    -entropy_of_matrix(rho) - cross
}

/// σ_s^{-1/2}·V_s†ρV_s·σ_s^{-1/2} on the support of σ.
fn sandwiched(rho: &CMatrix, sup: &Support) -> CMatrix {
    let r = sup.vectors.adjoint() * rho * &sup.vectors;
    let k = sup.values.len();
    CMatrix::from_fn(k, k, |i, j| {
        r[(i, j)] / c((sup.values[i] * sup.values[j]).sqrt())
    })
}

/// S_∞(ρ‖σ) = log₂ λ_max(σ^{-1/2}ρσ^{-1/2}) on supp σ; +∞ on support violation.
pub fn relative_min_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.check_same_space(sigma)?;
    Ok(relative_min_entropy_of_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn relative_min_entropy_of_matrices(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let sup = support(sigma);
    if kernel_weight(rho, &sup) > SUPPORT_CUTOFF {
        return f64::INFINITY;
    }
    if sup.values.is_empty() {
        return f64::INFINITY;
    }
    let m = sandwiched(rho, &sup);
    let top = *linalg::eigvalsh(&m).last().expect("nonempty support");
    top.max(f64::MIN_POSITIVE).log2()
}

/// A smoothed state and its relative min-entropy.
#[derive(Debug, Clone)]
pub struct SmoothWitness {
    pub smoothed: DensityOperator,
    /// S_∞(ρ′‖σ), an upper bound on the smooth relative min-entropy.
    pub value: f64,
    /// ‖ρ − ρ′‖₁.
    pub distance: f64,
}

const BISECTION_STEPS: usize = 64;

/// Smoothing by spectral truncation. With M = σ^{-1/2}ρσ^{-1/2} on supp σ,
/// the candidate for threshold c is σ^{1/2}·min(M, c)·σ^{1/2}, renormalized;
/// it satisfies ρ′ ≤ (c/Tr)·σ. The smallest log c keeping ‖ρ − ρ′‖₁ ≤ eps is
/// found by bisection and S_∞(ρ′‖σ) is evaluated directly.
pub fn smooth_min_entropy_witness(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
) -> Result<SmoothWitness> {
    rho.check_same_space(sigma)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(QmathError::InvalidArgument(format!(
            "smoothing parameter {eps} outside (0, 1)"
        )));
    }
    let sup = support(sigma.matrix());
    if kernel_weight(rho.matrix(), &sup) > SUPPORT_CUTOFF {
        return Err(QmathError::SupportViolation);
    }
    let m = sandwiched(rho.matrix(), &sup);
    let (mvals, mvecs) = linalg::eigh(&m);
    let top = mvals.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let half: Vec<f64> = sup.values.iter().map(|s| s.sqrt()).collect();
    let k = half.len();
    let lift = CMatrix::from_fn(rho.dim(), k, |r, j| sup.vectors[(r, j)] * c(half[j]));

    let candidate = |lambda: f64| -> Option<(CMatrix, f64)> {
        let cap = lambda.exp2();
        let clipped: Vec<f64> = mvals.iter().map(|&v| v.clamp(0.0, cap)).collect();
        let mc = linalg::from_spectrum(&clipped, &mvecs);
        let rc = &lift * mc * lift.adjoint();
        let t = rc.trace().re;
        if !(t > 0.0) {
            return None;
        }
        let rc = linalg::hermitian_part(&(rc / c(t)));
        let d = linalg::trace_norm_hermitian(&(rho.matrix() - &rc));
        Some((rc, d))
    };

    let mut hi = top.log2();
    let mut lo = hi - 64.0;
    let mut best = candidate(hi).ok_or(QmathError::WitnessNotFound)?;
    if best.1 > eps {
        return Err(QmathError::WitnessNotFound);
    }
    match candidate(lo) {
        Some(cand) if cand.1 <= eps => best = cand,
        _ => {
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                match candidate(mid) {
                    Some(cand) if cand.1 <= eps => {
                        hi = mid;
                        best = cand;
                    }
                    _ => lo = mid,
                }
            }
        }
    }
    let (matrix, distance) = best;
    let value = relative_min_entropy_of_matrices(&matrix, sigma.matrix());
    if !value.is_finite() {
        return Err(QmathError::WitnessNotFound);
    }
    Ok(SmoothWitness {
        smoothed: DensityOperator::from_parts_unchecked(rho.space().clone(), matrix),
        value,
        distance,
    })
}

/// I(A : B) = S(A) + S(B) − S(AB) for disjoint factor groups.
pub fn mutual_information(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    conditional_mutual_information(rho, a, b, &[])
}

/// I(A : B | C) = S(AC) + S(BC) − S(ABC) − S(C).
pub fn conditional_mutual_information(
    rho: &DensityOperator,
    a: &[&str],
    b: &[&str],
    given: &[&str],
) -> Result<f64> {
    let mut all: Vec<&str> = a.to_vec();
    all.extend_from_slice(b);
    all.extend_from_slice(given);
    rho.space().positions(&all)?;
    let h = |names: Vec<&str>| -> Result<f64> {
        if names.is_empty() {
            Ok(0.0)
        } else {
            Ok(entropy(&rho.reduce(&names)?))
        }
    };
    fn cat<'a>(x: &[&'a str], y: &[&'a str]) -> Vec<&'a str> {
        x.iter().chain(y).copied().collect()
    }
    Ok(h(cat(a, given))? + h(cat(b, given))? - h(all.clone())? - h(given.to_vec())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{CVector, ZERO};
    use crate::qmath::{HilbertSpace, PureState};

    fn qubit() -> HilbertSpace {
        HilbertSpace::of(&[("A", 2)]).unwrap()
    }

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(qubit(), p).unwrap()
    }

    fn plus() -> DensityOperator {
        let h = 0.5f64.sqrt();
        PureState::new(qubit(), CVector::from_vec(vec![c(h), c(h)]))
            .unwrap()
            .density()
    }

    #[test]
    fn trace_distance_examples() {
        let z = diag(&[1.0, 0.0]);
        assert!(trace_distance(&z, &z).unwrap().abs() < 1e-12);
        assert!((trace_distance(&z, &diag(&[0.0, 1.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!((trace_distance(&z, &diag(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let z = diag(&[1.0, 0.0]);
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&z, &plus()).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((fidelity(&diag(&[0.5, 0.5]), &z).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_examples() {
        let r = diag(&[0.5, 0.5]);
        assert!(relative_entropy(&r, &r).unwrap().abs() < 1e-12);
        assert!(relative_entropy(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]))
            .unwrap()
            .is_infinite());
        let expect = 0.5 * 2f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        let got = relative_entropy(&r, &diag(&[0.25, 0.75])).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.20752).abs() < 1e-5);
    }

    #[test]
    fn relative_min_entropy_examples() {
        let r = diag(&[0.3, 0.7]);
        assert!(relative_min_entropy(&r, &r).unwrap().abs() < 1e-12);
        let v = relative_min_entropy(&diag(&[1.0, 0.0]), &diag(&[0.25, 0.75])).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!(relative_min_entropy(&plus(), &diag(&[1.0, 0.0]))
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn witness_examples() {
        let r = diag(&[0.3, 0.7]);
        let w = smooth_min_entropy_witness(&r, &r, 0.2).unwrap();
        assert!(w.value.abs() < 1e-9);
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.25, 0.75]);
        let w = smooth_min_entropy_witness(&rho, &sigma, 0.3).unwrap();
        let s = relative_entropy(&rho, &sigma).unwrap();
        let bound = 4.0 * s / 0.09 + (1.0f64 / (1.0 - 0.0225)).log2();
        assert!((bound - 9.255887).abs() < 1e-5);
        assert!(w.value <= bound);
        assert!(w.distance <= 0.3 + 1e-12);
        assert!(matches!(
            smooth_min_entropy_witness(&plus(), &diag(&[1.0, 0.0]), 0.3),
            Err(QmathError::SupportViolation)
        ));
    }

    #[test]
    fn mutual_information_examples() {
        let s = HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap();
        let h = 0.5f64.sqrt();
        let bell = PureState::new(s.clone(), CVector::from_vec(vec![c(h), ZERO, ZERO, c(h)]))
            .unwrap()
            .density();
        assert!((mutual_information(&bell, &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-9);
        let corr = DensityOperator::diagonal(s.clone(), &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&corr, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-9);
        let prod = DensityOperator::maximally_mixed(s);
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().abs() < 1e-9);
    }
}
