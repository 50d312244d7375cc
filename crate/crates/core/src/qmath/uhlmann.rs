use super::linalg::{CMatrix, CVector, ZERO};
use super::space::HilbertSpace;
use super::state::PureState;
use super::{QmathError, Result};

#[derive(Debug, Clone)]
pub struct UhlmannResult {
    /// Unitary on the complement factors, in their original order.
    pub unitary: CMatrix,
    pub complement: HilbertSpace,
    /// ⟨ψ|(I ⊗ U)|φ⟩, real and nonnegative.
    pub overlap: f64,
}

fn split_positions(space: &HilbertSpace, fixed: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
    if fixed.is_empty() {
        return Err(QmathError::InvalidArgument("no fixed factors".into()));
    }
    let mut f = space.positions(fixed)?;
    f.sort_unstable();
    let rest: Vec<usize> = (0..space.factors().len()).filter(|p| !f.contains(p)).collect();
    if rest.is_empty() {
        return Err(QmathError::TrivialComplement);
    }
    Ok((f, rest))
}

/// Unitary U on the complement of `fixed` maximizing |⟨ψ|(I ⊗ U)|φ⟩|.
///
/// With Ψ, Φ the amplitude matrices (fixed × complement), the overlap is
/// Tr(K·Uᵀ) for K = Ψ†Φ. Writing K = W·S·V† gives Uᵀ = V·W† and overlap Σ S,
/// which is the fidelity of the two reduced states on the fixed factors.
pub fn uhlmann_unitary(psi: &PureState, phi: &PureState, fixed: &[&str]) -> Result<UhlmannResult> {
    if psi.space() != phi.space() {
        return Err(QmathError::SpaceMismatch("Uhlmann states".into()));
    }
    let (f, rest) = split_positions(psi.space(), fixed)?;
    let pm = psi.as_matrix(&f);
    let fm = phi.as_matrix(&f);
    let k = pm.adjoint() * fm;
    let svd = k.svd(true, true);
    let w = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let overlap: f64 = svd.singular_values.iter().sum();
    let ut = v_t.adjoint() * w.adjoint();
    Ok(UhlmannResult {
        unitary: ut.transpose(),
        complement: psi.space().select(&rest),
        overlap,
    })
}

/// (I ⊗ U)|φ⟩ with U acting on every factor outside `fixed`.
pub fn apply_on_complement(phi: &PureState, fixed: &[&str], u: &CMatrix) -> Result<CVector> {
    let (f, rest) = split_positions(phi.space(), fixed)?;
    let dc: usize = rest.iter().map(|&p| phi.space().factors()[p].dim).product();
    if u.nrows() != dc || u.ncols() != dc {
        return Err(QmathError::SpaceMismatch("complement unitary dimension".into()));
    }
    let fm = phi.as_matrix(&f);
    let rotated = fm * u.transpose();
    let (a, b) = phi.space().split(&f);
    let mut out = CVector::from_element(phi.vector().len(), ZERO);
    for i in 0..out.len() {
        out[i] = rotated[(a[i], b[i])];
    }
    Ok(out)
}
