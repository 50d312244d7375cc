//! Executable checks of the quantum facts. Each instance carries exactly the
//! objects its fact quantifies over; evaluation computes both sides directly.

use serde::{Deserialize, Serialize};

use super::compression::{jrs_verify, CompressionLayout};
use super::linalg::{self, CMatrix};
use super::maxinfo::{dimension_bound, max_information, max_information_with};
use super::measures::{
    fidelity, relative_entropy, relative_min_entropy, relative_min_entropy_of_matrices,
    smooth_min_entropy_witness, trace_distance,
};
use super::space::HilbertSpace;
use super::state::{check_kraus, CQState, DensityOperator, Operator, PureState};
use super::{QmathError, Result};
use crate::distrib::FiniteDistribution;

/// Identifiers of the quantum facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuantumFact {
    Fvdg,
    FvdgPureLiteral,
    ChanMono,
    PinskerStd,
    PinskerPaper,
    EventProb,
    SinfTriangle,
    SinfUnitary,
    DimUb,
    CondDec,
    ImaxClose,
    Raz,
    Substate,
    JrsVerify,
}

impl QuantumFact {
    pub const ALL: [QuantumFact; 14] = [
        QuantumFact::Fvdg,
        QuantumFact::FvdgPureLiteral,
        QuantumFact::ChanMono,
        QuantumFact::PinskerStd,
        QuantumFact::PinskerPaper,
        QuantumFact::EventProb,
        QuantumFact::SinfTriangle,
        QuantumFact::SinfUnitary,
        QuantumFact::DimUb,
        QuantumFact::CondDec,
        QuantumFact::ImaxClose,
        QuantumFact::Raz,
        QuantumFact::Substate,
        QuantumFact::JrsVerify,
    ];

    pub fn id(self) -> &'static str {
        match self {
            QuantumFact::Fvdg => "FVDG",
            QuantumFact::FvdgPureLiteral => "FVDG_PURE_LITERAL",
            QuantumFact::ChanMono => "CHAN_MONO",
            QuantumFact::PinskerStd => "PINSKER_STD",
            QuantumFact::PinskerPaper => "PINSKER_PAPER",
            QuantumFact::EventProb => "EVENT_PROB",
            QuantumFact::SinfTriangle => "SINF_TRIANGLE",
            QuantumFact::SinfUnitary => "SINF_UNITARY",
            QuantumFact::DimUb => "DIM_UB",
            QuantumFact::CondDec => "COND_DEC",
            QuantumFact::ImaxClose => "IMAX_CLOSE",
            QuantumFact::Raz => "RAZ",
            QuantumFact::Substate => "SUBSTATE",
            QuantumFact::JrsVerify => "JRS_VERIFY",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.id() == id)
    }

    pub fn kind(self) -> OutcomeKind {
        match self {
            QuantumFact::FvdgPureLiteral | QuantumFact::PinskerPaper => OutcomeKind::Report,
            QuantumFact::SinfUnitary | QuantumFact::CondDec => OutcomeKind::Equality,
            _ => OutcomeKind::Inequality,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// `value` is RHS − LHS.
    Inequality,
    /// `value` is |LHS − RHS|.
    Equality,
    /// `value` is a signed discrepancy with no pass/fail meaning.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactOutcome {
    pub kind: OutcomeKind,
    pub value: f64,
}

impl FactOutcome {
    fn inequality(value: f64) -> Self {
        FactOutcome {
            kind: OutcomeKind::Inequality,
            value,
        }
    }

    fn equality(value: f64) -> Self {
        FactOutcome {
            kind: OutcomeKind::Equality,
            value,
        }
    }

    fn report(value: f64) -> Self {
        FactOutcome {
            kind: OutcomeKind::Report,
            value,
        }
    }

    /// Signed margin where negative means violation; None for reports.
    pub fn margin(&self) -> Option<f64> {
        match self.kind {
            OutcomeKind::Inequality => Some(self.value),
            OutcomeKind::Equality => Some(-self.value),
            OutcomeKind::Report => None,
        }
    }
}

/// Rectangular complex matrix in JSON form `{"re":[[...]], "im":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Matrix(pub CMatrix);

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = QmathError;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        let rows = raw.re.len();
        let cols = raw.re.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || raw.im.len() != rows {
            return Err(QmathError::InvalidArgument("matrix shape".into()));
        }
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            if raw.re[i].len() != cols || raw.im[i].len() != cols {
                return Err(QmathError::InvalidArgument("ragged matrix".into()));
            }
            for j in 0..cols {
                let (re, im) = (raw.re[i][j], raw.im[i][j]);
                if !re.is_finite() || !im.is_finite() {
                    return Err(QmathError::InvalidArgument("non-finite entry".into()));
                }
                m[(i, j)] = num_complex::Complex64::new(re, im);
            }
        }
        Ok(Matrix(m))
    }
}

impl From<Matrix> for RawMatrix {
    fn from(m: Matrix) -> Self {
        let m = m.0;
        RawMatrix {
            re: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }
}

/// A channel in Kraus form together with its output space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub output: HilbertSpace,
    pub kraus: Vec<Matrix>,
}

impl Channel {
    pub fn matrices(&self) -> Vec<CMatrix> {
        self.kraus.iter().map(|m| m.0.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fact", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuantumInstance {
    Fvdg {
        rho: DensityOperator,
        sigma: DensityOperator,
    },
    FvdgPureLiteral {
        psi: PureState,
        phi: PureState,
    },
    ChanMono {
        rho: DensityOperator,
        sigma: DensityOperator,
        channel: Channel,
    },
    PinskerStd {
        rho: DensityOperator,
        sigma: DensityOperator,
    },
    PinskerPaper {
        rho: DensityOperator,
        sigma: DensityOperator,
    },
    /// σ = ε·ρ + (1−ε)·ρ′.
    EventProb {
        rho: DensityOperator,
        rho_prime: DensityOperator,
        eps: f64,
    },
    SinfTriangle {
        rho: DensityOperator,
        phi: DensityOperator,
        sigma: DensityOperator,
    },
    SinfUnitary {
        rho: DensityOperator,
        sigma: DensityOperator,
        unitary: Matrix,
    },
    DimUb {
        rho: DensityOperator,
        y: Vec<String>,
        z: Vec<String>,
    },
    CondDec {
        rho: CQState,
        sigma: CQState,
    },
    /// `p` and `p_prime` are over axes X, Y; `sigma` has one Z-state per
    /// flat index of that table.
    ImaxClose {
        p: FiniteDistribution,
        p_prime: FiniteDistribution,
        states: Vec<DensityOperator>,
        delta: f64,
        eps: f64,
    },
    /// Classical axes X_1..X_k with a quantum register; σ must be product.
    Raz {
        rho: CQState,
        sigma: CQState,
    },
    Substate {
        rho: DensityOperator,
        sigma: DensityOperator,
        eps: f64,
    },
    JrsVerify {
        state: PureState,
        layout: CompressionLayout,
        operators: Vec<Operator>,
        k: f64,
        delta: f64,
    },
}

impl QuantumInstance {
    pub fn fact(&self) -> QuantumFact {
        match self {
            QuantumInstance::Fvdg { .. } => QuantumFact::Fvdg,
            QuantumInstance::FvdgPureLiteral { .. } => QuantumFact::FvdgPureLiteral,
            QuantumInstance::ChanMono { .. } => QuantumFact::ChanMono,
            QuantumInstance::PinskerStd { .. } => QuantumFact::PinskerStd,
            QuantumInstance::PinskerPaper { .. } => QuantumFact::PinskerPaper,
            QuantumInstance::EventProb { .. } => QuantumFact::EventProb,
            QuantumInstance::SinfTriangle { .. } => QuantumFact::SinfTriangle,
            QuantumInstance::SinfUnitary { .. } => QuantumFact::SinfUnitary,
            QuantumInstance::DimUb { .. } => QuantumFact::DimUb,
            QuantumInstance::CondDec { .. } => QuantumFact::CondDec,
            QuantumInstance::ImaxClose { .. } => QuantumFact::ImaxClose,
            QuantumInstance::Raz { .. } => QuantumFact::Raz,
            QuantumInstance::Substate { .. } => QuantumFact::Substate,
            QuantumInstance::JrsVerify { .. } => QuantumFact::JrsVerify,
        }
    }
}

fn hypothesis(msg: impl Into<String>) -> QmathError {
    QmathError::HypothesisViolated(msg.into())
}

/// Difference of two values that may both be +∞.
fn extended_gap(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() && a.signum() == b.signum() {
        0.0
    } else {
        (a - b).abs()
    }
}

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Evaluates the fact for the supplied instance. The fact id must match the
/// instance variant.
pub fn verify_quantum_fact(fact: QuantumFact, instance: &QuantumInstance) -> Result<FactOutcome> {
    if instance.fact() != fact {
        return Err(hypothesis(format!(
            "instance is for {}, not {}",
            instance.fact().id(),
            fact.id()
        )));
    }
    evaluate_quantum_fact(instance)
}

pub fn evaluate_quantum_fact(instance: &QuantumInstance) -> Result<FactOutcome> {
    match instance {
        QuantumInstance::Fvdg { rho, sigma } => {
            let f = fidelity(rho, sigma)?;
            let t = trace_distance(rho, sigma)?;
            let lower = 2.0 * (1.0 - f);
            let upper = 2.0 * (1.0 - f * f).max(0.0).sqrt();
            Ok(FactOutcome::inequality((t - lower).min(upper - t)))
        }
        QuantumInstance::FvdgPureLiteral { psi, phi } => {
            let t = trace_distance(&psi.density(), &phi.density())?;
            let ov = psi.inner(phi)?.norm_sqr();
            Ok(FactOutcome::report((1.0 - ov).max(0.0).sqrt() - t))
        }
        QuantumInstance::ChanMono { rho, sigma, channel } => {
            rho.check_same_space(sigma)?;
            let kraus = channel.matrices();
            check_kraus(&kraus, rho.dim(), channel.output.dim())?;
            let er = rho.apply_channel(&kraus, &channel.output)?;
            let es = sigma.apply_channel(&kraus, &channel.output)?;
            let dist = trace_distance(rho, sigma)? - trace_distance(&er, &es)?;
            let fid = fidelity(&er, &es)? - fidelity(rho, sigma)?;
            Ok(FactOutcome::inequality(dist.min(fid)))
        }
        QuantumInstance::PinskerStd { rho, sigma } => {
            let s = relative_entropy(rho, sigma)?;
            let rhs = (2.0 * std::f64::consts::LN_2 * s.max(0.0)).sqrt();
            Ok(FactOutcome::inequality(rhs - trace_distance(rho, sigma)?))
        }
        QuantumInstance::PinskerPaper { rho, sigma } => {
            let s = relative_entropy(rho, sigma)?;
            Ok(FactOutcome::report(s.max(0.0).sqrt() - trace_distance(rho, sigma)?))
        }
        QuantumInstance::EventProb { rho, rho_prime, eps } => {
            if !(*eps > 0.0 && *eps <= 1.0) {
                return Err(hypothesis(format!("eps {eps} outside (0, 1]")));
            }
            let sigma = DensityOperator::mixture(&[(*eps, rho), (1.0 - eps, rho_prime)])?;
            let lhs = relative_min_entropy(rho, &sigma)?;
            Ok(FactOutcome::inequality((1.0 / eps).log2() - lhs))
        }
        QuantumInstance::SinfTriangle { rho, phi, sigma } => {
            let a = relative_min_entropy(rho, phi)?;
            let b = relative_min_entropy(phi, sigma)?;
            if !a.is_finite() || !b.is_finite() {
                return Err(hypothesis("supports are not nested"));
            }
            let lhs = relative_min_entropy(rho, sigma)?;
            Ok(FactOutcome::inequality(a + b - lhs))
        }
        QuantumInstance::SinfUnitary { rho, sigma, unitary } => {
            let u = &unitary.0;
            if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
                return Err(QmathError::SpaceMismatch("unitary dimension".into()));
            }
            if linalg::unitarity_gap(u) > 1e-9 {
                return Err(hypothesis("matrix is not unitary"));
            }
            let lhs = relative_min_entropy_of_matrices(
                &(u * rho.matrix() * u.adjoint()),
                &(u * sigma.matrix() * u.adjoint()),
            );
            let rhs = relative_min_entropy(rho, sigma)?;
            Ok(FactOutcome::equality(extended_gap(lhs, rhs)))
        }
        QuantumInstance::DimUb { rho, y, z } => {
            let (y, z) = (names(y), names(z));
            let dy: usize = y.iter().map(|n| rho.space().factor_dim(n)).product::<Result<usize>>()?;
            let dz: usize = z.iter().map(|n| rho.space().factor_dim(n)).product::<Result<usize>>()?;
            let w = max_information(rho, &y, &z, 0.0)?;
            Ok(FactOutcome::inequality(dimension_bound(dy, dz) - w.value))
        }
        QuantumInstance::CondDec { rho, sigma } => cond_dec(rho, sigma),
        QuantumInstance::ImaxClose {
            p,
            p_prime,
            states,
            delta,
            eps,
        } => imax_close(p, p_prime, states, *delta, *eps),
        QuantumInstance::Raz { rho, sigma } => raz(rho, sigma),
        QuantumInstance::Substate { rho, sigma, eps } => {
            let s = relative_entropy(rho, sigma)?;
            if !s.is_finite() {
                return Err(QmathError::SupportViolation);
            }
            if !(*eps > 0.0 && *eps < 1.0) {
                return Err(hypothesis(format!("eps {eps} outside (0, 1)")));
            }
            let w = smooth_min_entropy_witness(rho, sigma, *eps)?;
            let bound = 4.0 * s / (eps * eps) + (1.0 / (1.0 - eps * eps / 4.0)).log2();
            Ok(FactOutcome::inequality((bound - w.value).min(eps - w.distance)))
        }
        QuantumInstance::JrsVerify {
            state,
            layout,
            operators,
            k,
            delta,
        } => {
            let ops: Vec<CMatrix> = operators.iter().map(|o| o.matrix.clone()).collect();
            let r = jrs_verify(state, layout, &ops, *k, *delta)?;
            Ok(FactOutcome::inequality(
                r.success_margin
                    .min(r.closeness_margin)
                    .min(r.uniformity_margin),
            ))
        }
    }
}

fn cond_dec(rho: &CQState, sigma: &CQState) -> Result<FactOutcome> {
    let (pr, ps) = (rho.classical(), sigma.classical());
    if pr.axes() != ps.axes() || rho.quantum_space() != sigma.quantum_space() {
        return Err(QmathError::SpaceMismatch("CQ states differ in shape".into()));
    }
    let lhs = relative_entropy(&rho.to_density()?, &sigma.to_density()?)?;
    let mut rhs = pr.relative_entropy(ps)?;
    for (i, (a, b)) in rho.states().iter().zip(sigma.states()).enumerate() {
        let w = pr.weights()[i];
        if w > 0.0 {
            rhs += w * relative_entropy(a, b)?;
        }
    }
    Ok(FactOutcome::equality(extended_gap(lhs, rhs)))
}

/// Probability-tail form: P_{X′}(I^{ε+7δ/ε}_max(Y:Z)_{ρ_x} > (4c+1)/ε³) ≤ 2ε + δ/2
/// with c = I(Y:Z|X)_σ. For each x a certified upper bound on the smooth
/// max-information is taken from the candidates σ_Z ∈ {ρ_Z, I/d_Z}; the full
/// search runs only when that bound exceeds the threshold.
fn imax_close(
    p: &FiniteDistribution,
    p_prime: &FiniteDistribution,
    states: &[DensityOperator],
    delta: f64,
    eps: f64,
) -> Result<FactOutcome> {
    if p.axis_names() != ["X", "Y"] || p.axes() != p_prime.axes() {
        return Err(hypothesis("distributions must share axes X, Y"));
    }
    if states.len() != p.len() {
        return Err(hypothesis("one Z-state per (x, y) is required"));
    }
    let gap = p.l1_distance(p_prime)?;
    if gap > delta + 1e-12 || !(delta < 0.5) || !(delta < eps && eps < 0.5) {
        return Err(hypothesis(format!(
            "need ‖P−P′‖₁ = {gap} ≤ δ = {delta} < ε = {eps} < 1/2"
        )));
    }
    let sigma_cq = CQState::new(p.clone(), states.to_vec())?;
    let zn: Vec<&str> = sigma_cq.quantum_space().names();
    let c = sigma_cq.conditional_mutual_information(&["Y"], &zn, &["X"])?.max(0.0);
    let threshold = (4.0 * c + 1.0) / eps.powi(3);
    let smoothing = eps + 7.0 * delta / eps;

    let dx = p.axes()[0].len();
    let dy = p.axes()[1].len();
    let px_prime = p_prime.marginal(&["X"])?;
    let y_space = HilbertSpace::of(&[("Y", dy)])?;
    let mut tail = 0.0;
    for x in 0..dx {
        let w = px_prime.weights()[x];
        if w <= 0.0 {
            continue;
        }
        let cond = p_prime.condition_on_value("X", &p.axes()[0].labels[x])?;
        let parts: Vec<DensityOperator> = (0..dy)
            .map(|y| {
                let e = DensityOperator::diagonal(
                    y_space.clone(),
                    &(0..dy).map(|k| if k == y { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
                )?;
                e.tensor(&states[x * dy + y])
            })
            .collect::<Result<_>>()?;
        let weighted: Vec<(f64, &DensityOperator)> =
            cond.weights().iter().copied().zip(parts.iter()).collect();
        let rho_x = DensityOperator::mixture(&weighted)?;
        let value = certified_max_information(&rho_x, &zn, smoothing)?;
        let value = if value > threshold {
            max_information_with(&rho_x, &["Y"], &zn, smoothing, 0, true)?.value.min(value)
        } else {
            value
        };
        if value > threshold {
            tail += w;
        }
    }
    Ok(FactOutcome::inequality(2.0 * eps + delta / 2.0 - tail))
}

/// Upper bound on I^s_max(Y:Z) from the reference states ρ_Y ⊗ ρ_Z and
/// ρ_Y ⊗ I/d_Z, smoothed when 0 < s < 1.
fn certified_max_information(rho: &DensityOperator, z: &[&str], smoothing: f64) -> Result<f64> {
    if smoothing >= 2.0 {
        return Ok(0.0);
    }
    let ry = rho.reduce(&["Y"])?;
    let rz = rho.reduce(z)?;
    let ordered = rho.reorder(&[&["Y"][..], z].concat())?;
    let mut best = f64::INFINITY;
    for sz in [rz.clone(), DensityOperator::maximally_mixed(rz.space().clone())] {
        let reference = ry.tensor(&sz)?;
        let v = if smoothing > 0.0 {
            smooth_min_entropy_witness(&ordered, &reference, smoothing.min(1.0 - 1e-9))?.value
        } else {
            relative_min_entropy(&ordered, &reference)?
        };
        best = best.min(v);
    }
    Ok(best)
}

fn raz(rho: &CQState, sigma: &CQState) -> Result<FactOutcome> {
    let (pr, ps) = (rho.classical(), sigma.classical());
    if pr.axes() != ps.axes() || rho.quantum_space() != sigma.quantum_space() {
        return Err(QmathError::SpaceMismatch("CQ states differ in shape".into()));
    }
    let axes: Vec<&str> = ps.axis_names();
    let mut product = ps.marginal(&axes[..1])?;
    for a in &axes[1..] {
        product = product.product(&ps.marginal(&[a])?)?;
    }
    if ps.l1_distance(&product)? > 1e-9 {
        return Err(hypothesis("σ's classical part is not a product"));
    }
    let first = &sigma.states()[0];
    for s in sigma.states() {
        if linalg::max_abs(&(s.matrix() - first.matrix())) > 1e-9 {
            return Err(hypothesis("σ's quantum part depends on X"));
        }
    }
    let qn: Vec<&str> = rho.quantum_space().names();
    let mut lhs = 0.0;
    for a in &axes {
        lhs += rho.mutual_information(&[a], &qn)?;
    }
    let rhs = relative_entropy(&rho.to_density()?, &sigma.to_density()?)?;
    Ok(FactOutcome::inequality(rhs - lhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{c, CVector};
    use crate::qmath::random;
    use crate::rng;

    fn qubit() -> HilbertSpace {
        HilbertSpace::of(&[("A", 2)]).unwrap()
    }

    #[test]
    fn pinsker_printed_form_discrepancy() {
        let rho = DensityOperator::diagonal(qubit(), &[0.5, 0.5]).unwrap();
        let sigma = DensityOperator::diagonal(qubit(), &[0.25, 0.75]).unwrap();
        let inst = QuantumInstance::PinskerPaper {
            rho: rho.clone(),
            sigma: sigma.clone(),
        };
        let out = verify_quantum_fact(QuantumFact::PinskerPaper, &inst).unwrap();
        let s: f64 = 0.5 * 2f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        assert!((out.value - (s.sqrt() - 0.5)).abs() < 1e-12);
        assert!((out.value + 0.0445).abs() < 5e-4);
        assert_eq!(out.margin(), None);
        let std = evaluate_quantum_fact(&QuantumInstance::PinskerStd { rho, sigma }).unwrap();
        assert!(std.margin().unwrap() > 0.0);
    }

    #[test]
    fn pure_fvdg_printed_form_discrepancy() {
        let h = 0.5f64.sqrt();
        let psi = PureState::basis(qubit(), 0).unwrap();
        let phi = PureState::new(qubit(), CVector::from_vec(vec![c(h), c(h)])).unwrap();
        let out = evaluate_quantum_fact(&QuantumInstance::FvdgPureLiteral { psi, phi }).unwrap();
        assert!((out.value - (h - 2.0 * h)).abs() < 1e-12);
    }

    #[test]
    fn unitary_invariance_seed_3() {
        let mut r = rng::stream(3, 0);
        let rho = random::density(&qubit(), None, &mut r);
        let sigma = random::density(&qubit(), None, &mut r);
        let u = random::unitary(2, &mut r);
        let inst = QuantumInstance::SinfUnitary {
            rho,
            sigma,
            unitary: Matrix(u),
        };
        assert!(evaluate_quantum_fact(&inst).unwrap().value <= 1e-9);
    }

    #[test]
    fn raz_on_equal_product_states_is_tight() {
        let p = FiniteDistribution::uniform(vec![
            crate::Axis::range("X1", 2),
            crate::Axis::range("X2", 2),
        ])
        .unwrap();
        let q = DensityOperator::maximally_mixed(HilbertSpace::of(&[("Y", 2)]).unwrap());
        let st = CQState::new(p, vec![q; 4]).unwrap();
        let out = evaluate_quantum_fact(&QuantumInstance::Raz {
            rho: st.clone(),
            sigma: st,
        })
        .unwrap();
        assert!(out.value.abs() < 1e-12);
    }

    #[test]
    fn mismatched_fact_id_is_rejected() {
        let rho = DensityOperator::maximally_mixed(qubit());
        let inst = QuantumInstance::Fvdg {
            rho: rho.clone(),
            sigma: rho,
        };
        assert!(matches!(
            verify_quantum_fact(QuantumFact::Raz, &inst),
            Err(QmathError::HypothesisViolated(_))
        ));
    }
}
