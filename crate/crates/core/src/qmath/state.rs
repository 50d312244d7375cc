use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMatrix, CVector, ZERO};
use super::space::{Factor, HilbertSpace};
use super::{QmathError, Result};
use crate::distrib::FiniteDistribution;

/// Validation tolerance for Hermiticity, positivity, trace and norm.
pub const STATE_TOL: f64 = 1e-10;
/// Completeness tolerance for POVMs and Kraus families.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// An arbitrary square operator on a labelled space. This is the JSON form of
/// every matrix-valued object: `{"space":[...], "re":[[...]], "im":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct Operator {
    pub space: HilbertSpace,
    pub matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    space: Vec<Factor>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<RawOperator> for Operator {
    type Error = QmathError;
    fn try_from(raw: RawOperator) -> Result<Self> {
        let space = HilbertSpace::new(raw.space)?;
        let n = space.dim();
        if raw.re.len() != n || raw.im.len() != n {
            return Err(QmathError::InvalidArgument(format!(
                "operator needs {n} rows"
            )));
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            if raw.re[i].len() != n || raw.im[i].len() != n {
                return Err(QmathError::InvalidArgument(format!(
                    "operator row {i} needs {n} entries"
                )));
            }
            for j in 0..n {
                let (re, im) = (raw.re[i][j], raw.im[i][j]);
                if !re.is_finite() || !im.is_finite() {
                    return Err(QmathError::InvalidArgument("non-finite entry".into()));
                }
                m[(i, j)] = num_complex::Complex64::new(re, im);
            }
        }
        Ok(Operator { space, matrix: m })
    }
}

impl From<Operator> for RawOperator {
    fn from(op: Operator) -> Self {
        let n = op.matrix.nrows();
        RawOperator {
            space: op.space.into(),
            re: (0..n)
                .map(|i| (0..n).map(|j| op.matrix[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| op.matrix[(i, j)].im).collect())
                .collect(),
        }
    }
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(QmathError::SpaceMismatch(format!(
                "matrix is {}x{}, space has dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { space, matrix })
    }
}

/// Partial trace of `m` over every factor not in `keep` (positions in
/// `space`). The kept factors stay in their original order.
pub fn reduce_matrix(space: &HilbertSpace, m: &CMatrix, keep: &[usize]) -> CMatrix {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let (a, b) = space.split(&keep);
    let dk: usize = keep.iter().map(|&p| space.factors()[p].dim).product();
    let dr = space.dim() / dk;
    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(dk); dr];
    for (i, &bi) in b.iter().enumerate() {
        groups[bi].push(i);
    }
    let mut out = CMatrix::zeros(dk, dk);
    for g in &groups {
        for &i in g {
            for &j in g {
                out[(a[i], a[j])] += m[(i, j)];
            }
        }
    }
    out
}

/// Hermitian PSD unit-trace operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Operator", into = "Operator")]
pub struct DensityOperator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl TryFrom<Operator> for DensityOperator {
    type Error = QmathError;
    fn try_from(op: Operator) -> Result<Self> {
        DensityOperator::new(op.space, op.matrix)
    }
}

impl From<DensityOperator> for Operator {
    fn from(d: DensityOperator) -> Self {
        Operator {
            space: d.space,
            matrix: d.matrix,
        }
    }
}

impl DensityOperator {
    /// Validated constructor; the stored matrix is the exact Hermitian part.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let gap = linalg::hermiticity_gap(&op.matrix);
        if gap > STATE_TOL {
            return Err(QmathError::InvalidState(format!("not Hermitian (gap {gap:e})")));
        }
        let matrix = linalg::hermitian_part(&op.matrix);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(QmathError::InvalidState(format!("trace {tr}")));
        }
        let min = linalg::eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(QmathError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityOperator {
            space: op.space,
            matrix,
        })
    }

    /// Normalizes a PSD operator by its trace before validating.
    pub fn from_unnormalized(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(QmathError::InvalidState(format!("trace {tr}")));
        }
        let m = linalg::hermitian_part(&matrix) / c(tr);
        Self::new(space, m)
    }

    pub(crate) fn from_parts_unchecked(space: HilbertSpace, matrix: CMatrix) -> Self {
        DensityOperator { space, matrix }
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let n = space.dim();
        DensityOperator {
            matrix: linalg::identity(n) / c(n as f64),
            space,
        }
    }

    /// Diagonal operator with the given probabilities.
    pub fn diagonal(space: HilbertSpace, probs: &[f64]) -> Result<Self> {
        if probs.len() != space.dim() {
            return Err(QmathError::SpaceMismatch("diagonal length".into()));
        }
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| c(p)),
        ));
        Self::new(space, m)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub(crate) fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(QmathError::SpaceMismatch(format!(
                "{:?} vs {:?}",
                self.space.names(),
                other.space.names()
            )));
        }
        Ok(())
    }

    /// Traces out the named factors.
    pub fn partial_trace(&self, trace_out: &[&str]) -> Result<Self> {
        let out = self.space.positions(trace_out)?;
        let keep: Vec<usize> = (0..self.space.factors().len())
            .filter(|p| !out.contains(p))
            .collect();
        Ok(self.reduce_positions(&keep))
    }

    /// Keeps only the named factors (in the space's order).
    pub fn reduce(&self, keep: &[&str]) -> Result<Self> {
        let mut pos = self.space.positions(keep)?;
        pos.sort_unstable();
        Ok(self.reduce_positions(&pos))
    }

    fn reduce_positions(&self, keep: &[usize]) -> Self {
        DensityOperator {
            matrix: reduce_matrix(&self.space, &self.matrix, keep),
            space: self.space.select(keep),
        }
    }

    /// Same operator with factors listed in `order` (all factors).
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        let pos = self.space.positions(order)?;
        if pos.len() != self.space.factors().len() {
            return Err(QmathError::InvalidArgument("reorder needs every factor".into()));
        }
        let perm = self.space.permutation(&pos);
        Ok(DensityOperator {
            matrix: linalg::permute_basis(&self.matrix, &perm),
            space: self.space.select(&pos),
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(DensityOperator {
            space: self.space.join(&other.space)?,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    /// U ρ U†.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(QmathError::SpaceMismatch("unitary dimension".into()));
        }
        Ok(DensityOperator {
            space: self.space.clone(),
            matrix: linalg::hermitian_part(&(u * &self.matrix * u.adjoint())),
        })
    }

    /// Σ K ρ K† for a trace-preserving Kraus family mapping into `out_space`.
    pub fn apply_channel(&self, kraus: &[CMatrix], out_space: &HilbertSpace) -> Result<Self> {
        check_kraus(kraus, self.dim(), out_space.dim())?;
        let mut m = CMatrix::zeros(out_space.dim(), out_space.dim());
        for k in kraus {
            m += k * &self.matrix * k.adjoint();
        }
        Ok(DensityOperator {
            space: out_space.clone(),
            matrix: linalg::hermitian_part(&m),
        })
    }

    /// Tr(Pρ) for an operator P on the same space.
    pub fn expectation(&self, p: &CMatrix) -> f64 {
        (p * &self.matrix).trace().re
    }

    /// Mixture Σ wᵢ ρᵢ on a common space.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| QmathError::InvalidArgument("empty mixture".into()))?
            .1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, d) in parts {
            first.check_same_space(d)?;
            m += &d.matrix * c(*w);
        }
        Self::new(first.space.clone(), m)
    }
}

/// Checks Σ K†K = I and the Kraus shapes.
pub fn check_kraus(kraus: &[CMatrix], din: usize, dout: usize) -> Result<()> {
    let mut sum = CMatrix::zeros(din, din);
    for k in kraus {
        if k.nrows() != dout || k.ncols() != din {
            return Err(QmathError::SpaceMismatch("Kraus operator shape".into()));
        }
        sum += k.adjoint() * k;
    }
    let gap = linalg::max_abs(&(sum - linalg::identity(din)));
    if gap > COMPLETENESS_TOL {
        return Err(QmathError::KrausIncomplete(gap));
    }
    Ok(())
}

/// Unit vector on a labelled space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPure", into = "RawPure")]
pub struct PureState {
    space: HilbertSpace,
    vector: CVector,
}

#[derive(Serialize, Deserialize)]
struct RawPure {
    space: Vec<Factor>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<RawPure> for PureState {
    type Error = QmathError;
    fn try_from(raw: RawPure) -> Result<Self> {
        let space = HilbertSpace::new(raw.space)?;
        if raw.re.len() != raw.im.len() {
            return Err(QmathError::InvalidArgument("re/im lengths differ".into()));
        }
        let v = CVector::from_iterator(
            raw.re.len(),
            raw.re
                .iter()
                .zip(&raw.im)
                .map(|(&r, &i)| num_complex::Complex64::new(r, i)),
        );
        PureState::new(space, v)
    }
}

impl From<PureState> for RawPure {
    fn from(p: PureState) -> Self {
        RawPure {
            space: p.space.into(),
            re: p.vector.iter().map(|z| z.re).collect(),
            im: p.vector.iter().map(|z| z.im).collect(),
        }
    }
}

impl PureState {
    pub fn new(space: HilbertSpace, vector: CVector) -> Result<Self> {
        if vector.len() != space.dim() {
            return Err(QmathError::SpaceMismatch(format!(
                "vector length {} vs dimension {}",
                vector.len(),
                space.dim()
            )));
        }
        if vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QmathError::InvalidState("non-finite amplitude".into()));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(QmathError::InvalidState(format!("norm {norm}")));
        }
        Ok(PureState { space, vector })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(space: HilbertSpace, vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if !(norm > 0.0) {
            return Err(QmathError::InvalidState("zero vector".into()));
        }
        Self::new(space, vector / c(norm))
    }

    /// Computational basis state.
    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        let mut v = CVector::zeros(space.dim());
        if index >= v.len() {
            return Err(QmathError::InvalidArgument("basis index out of range".into()));
        }
        v[index] = c(1.0);
        Self::new(space, v)
    }

    pub(crate) fn from_parts_unchecked(space: HilbertSpace, vector: CVector) -> Self {
        PureState { space, vector }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            space: self.space.clone(),
            matrix: linalg::outer(&self.vector),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<num_complex::Complex64> {
        if self.space != other.space {
            return Err(QmathError::SpaceMismatch("inner product".into()));
        }
        Ok(self.vector.dotc(&other.vector))
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        Ok(PureState {
            space: self.space.join(&other.space)?,
            vector: self.vector.kronecker(&other.vector),
        })
    }

    /// Reduced state on the named factors (in the space's order).
    pub fn reduce(&self, keep: &[&str]) -> Result<DensityOperator> {
        let mut pos = self.space.positions(keep)?;
        pos.sort_unstable();
        let psi = self.as_matrix(&pos);
        Ok(DensityOperator {
            matrix: linalg::hermitian_part(&(&psi * psi.adjoint())),
            space: self.space.select(&pos),
        })
    }

    /// Amplitudes reshaped to (part × rest), both in original factor order.
    pub(crate) fn as_matrix(&self, part: &[usize]) -> CMatrix {
        let (a, b) = self.space.split(part);
        let da: usize = part.iter().map(|&p| self.space.factors()[p].dim).product();
        let db = self.space.dim() / da;
        let mut m = CMatrix::from_element(da, db, ZERO);
        for i in 0..self.vector.len() {
            m[(a[i], b[i])] = self.vector[i];
        }
        m
    }

    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        let pos = self.space.positions(order)?;
        if pos.len() != self.space.factors().len() {
            return Err(QmathError::InvalidArgument("reorder needs every factor".into()));
        }
        let perm = self.space.permutation(&pos);
        Ok(PureState {
            vector: linalg::permute_vector(&self.vector, &perm),
            space: self.space.select(&pos),
        })
    }

    /// Applies an operator on the full space without renormalizing.
    pub fn apply(&self, u: &CMatrix) -> Result<CVector> {
        if u.ncols() != self.vector.len() {
            return Err(QmathError::SpaceMismatch("operator dimension".into()));
        }
        Ok(u * &self.vector)
    }

    /// Multiplies by a global phase.
    pub fn with_phase(&self, theta: f64) -> Self {
        PureState {
            space: self.space.clone(),
            vector: &self.vector * num_complex::Complex64::from_polar(1.0, theta),
        }
    }
}

/// Canonical purification on `space ⊗ mirror`, mirror factors named `name~`.
/// Eigenvalues are taken in descending order, so a pure input is purified
/// as itself tensored with the mirror's first basis state.
pub fn purify(rho: &DensityOperator) -> PureState {
    let (vals, vecs) = linalg::eigh(&rho.matrix);
    let n = vals.len();
    let mirror = rho
        .space
        .renamed(|s| format!("{s}~"))
        .expect("renaming keeps names distinct");
    let space = rho.space.join(&mirror).expect("purification within guard");
    let mut v = CVector::zeros(n * n);
    for (k, idx) in (0..n).rev().enumerate() {
        let lam = vals[idx].max(0.0).sqrt();
        for r in 0..n {
            v[r * n + k] += vecs[(r, idx)] * lam;
        }
    }
    let norm = v.norm();
    PureState {
        space,
        vector: v / c(norm),
    }
}

/// Classical-quantum state Σ P(k)|k⟩⟨k| ⊗ ρ_k with one operator per flat
/// index of the classical table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCq", into = "RawCq")]
pub struct CQState {
    classical: FiniteDistribution,
    states: Vec<DensityOperator>,
}

#[derive(Serialize, Deserialize)]
struct RawCq {
    classical: FiniteDistribution,
    states: Vec<DensityOperator>,
}

impl TryFrom<RawCq> for CQState {
    type Error = QmathError;
    fn try_from(raw: RawCq) -> Result<Self> {
        CQState::new(raw.classical, raw.states)
    }
}

impl From<CQState> for RawCq {
    fn from(s: CQState) -> Self {
        RawCq {
            classical: s.classical,
            states: s.states,
        }
    }
}

impl CQState {
    pub fn new(classical: FiniteDistribution, states: Vec<DensityOperator>) -> Result<Self> {
        if states.len() != classical.len() {
            return Err(QmathError::InvalidArgument(format!(
                "{} conditional states for {} classical values",
                states.len(),
                classical.len()
            )));
        }
        let space = states[0].space.clone();
        for s in &states {
            if s.space != space {
                return Err(QmathError::SpaceMismatch("conditional states differ".into()));
            }
        }
        for name in classical.axis_names() {
            if space.position(name).is_ok() {
                return Err(QmathError::DuplicateFactor(name.to_string()));
            }
        }
        Ok(CQState { classical, states })
    }

    pub fn classical(&self) -> &FiniteDistribution {
        &self.classical
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn quantum_space(&self) -> &HilbertSpace {
        &self.states[0].space
    }

    /// Entropy of the named registers, which may mix classical axes and
    /// quantum factors: H(K) + Σ_k P(k)·S(ρ_{F|k}).
    pub fn entropy_of(&self, names: &[&str]) -> Result<f64> {
        let (cl, qu) = self.partition(names)?;
        let quantum_part = |groups: &[(f64, CMatrix)]| -> f64 {
            groups
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .map(|(w, m)| w * super::measures::entropy_of_matrix(&(m / c(*w))))
                .sum()
        };
        let space = self.quantum_space();
        let mut keep = space.positions(&qu)?;
        keep.sort_unstable();
        let weights = self.classical.weights();
        let (ngroups, proj) = if cl.is_empty() {
            (1, vec![0; self.classical.len()])
        } else {
            let pos: Vec<usize> = cl
                .iter()
                .map(|n| self.classical.axis_position(n))
                .collect::<std::result::Result<_, _>>()?;
            let marg = self.classical.marginal(&cl)?;
            (marg.len(), self.classical.radix().projection(&pos))
        };
        let dk: usize = keep.iter().map(|&p| space.factors()[p].dim).product();
        let mut groups: Vec<(f64, CMatrix)> = vec![(0.0, CMatrix::zeros(dk, dk)); ngroups];
        for (i, s) in self.states.iter().enumerate() {
            let w = weights[i];
            if w == 0.0 {
                continue;
            }
            groups[proj[i]].0 += w;
            if !keep.is_empty() {
                groups[proj[i]].1 += reduce_matrix(space, &s.matrix, &keep) * c(w);
            }
        }
        let h_classical: f64 = groups
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, _)| -w * w.log2())
            .sum();
        let h_quantum = if keep.is_empty() { 0.0 } else { quantum_part(&groups) };
        Ok(h_classical + h_quantum)
    }

    fn partition<'a>(&self, names: &[&'a str]) -> Result<(Vec<&'a str>, Vec<&'a str>)> {
        let mut cl = Vec::new();
        let mut qu = Vec::new();
        for &n in names {
            if self.classical.axis_position(n).is_ok() {
                if cl.contains(&n) {
                    return Err(QmathError::DuplicateFactor(n.to_string()));
                }
                cl.push(n);
            } else {
                self.quantum_space().position(n)?;
                qu.push(n);
            }
        }
        Ok((cl, qu))
    }

    /// I(A : B) over any mix of classical and quantum registers.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// I(A : B | C) = S(AC) + S(BC) − S(ABC) − S(C).
    pub fn conditional_mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        fn cat<'a>(xs: &[&[&'a str]]) -> Vec<&'a str> {
            xs.iter().flat_map(|x| x.iter().copied()).collect()
        }
        let h = |names: Vec<&str>| -> Result<f64> {
            if names.is_empty() {
                Ok(0.0)
            } else {
                self.entropy_of(&names)
            }
        };
        Ok(h(cat(&[a, given]))? + h(cat(&[b, given]))? - h(cat(&[a, b, given]))? - h(given.to_vec())?)
    }

    /// Block-diagonal density operator with the classical axes as leading factors.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let cf: Vec<Factor> = self
            .classical
            .axes()
            .iter()
            .map(|a| Factor {
                name: a.name.clone(),
                dim: a.len(),
            })
            .collect();
        let space = HilbertSpace::new(cf)?.join(self.quantum_space())?;
        let dq = self.quantum_space().dim();
        let mut m = CMatrix::zeros(space.dim(), space.dim());
        for (k, s) in self.states.iter().enumerate() {
            let w = self.classical.weights()[k];
            for i in 0..dq {
                for j in 0..dq {
                    m[(k * dq + i, k * dq + j)] = s.matrix[(i, j)] * c(w);
                }
            }
        }
        DensityOperator::new(space, m)
    }
}

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPovm", into = "RawPovm")]
pub struct Povm {
    space: HilbertSpace,
    elements: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RawPovm {
    elements: Vec<Operator>,
}

impl TryFrom<RawPovm> for Povm {
    type Error = QmathError;
    fn try_from(raw: RawPovm) -> Result<Self> {
        let space = raw
            .elements
            .first()
            .ok_or_else(|| QmathError::InvalidArgument("empty POVM".into()))?
            .space
            .clone();
        let mut els = Vec::with_capacity(raw.elements.len());
        for e in raw.elements {
            if e.space != space {
                return Err(QmathError::SpaceMismatch("POVM elements".into()));
            }
            els.push(e.matrix);
        }
        Povm::new(space, els)
    }
}

impl From<Povm> for RawPovm {
    fn from(p: Povm) -> Self {
        RawPovm {
            elements: p
                .elements
                .into_iter()
                .map(|m| Operator {
                    space: p.space.clone(),
                    matrix: m,
                })
                .collect(),
        }
    }
}

impl Povm {
    pub fn new(space: HilbertSpace, elements: Vec<CMatrix>) -> Result<Self> {
        let n = space.dim();
        if elements.is_empty() {
            return Err(QmathError::InvalidArgument("empty POVM".into()));
        }
        let mut sum = CMatrix::zeros(n, n);
        let mut clean = Vec::with_capacity(elements.len());
        for e in elements {
            if e.nrows() != n || e.ncols() != n {
                return Err(QmathError::SpaceMismatch("POVM element shape".into()));
            }
            let gap = linalg::hermiticity_gap(&e);
            if gap > STATE_TOL {
                return Err(QmathError::InvalidState(format!(
                    "POVM element not Hermitian (gap {gap:e})"
                )));
            }
            let h = linalg::hermitian_part(&e);
            let min = linalg::eigvalsh(&h)[0];
            if min < -STATE_TOL {
                return Err(QmathError::InvalidState(format!(
                    "POVM element has eigenvalue {min:e}"
                )));
            }
            sum += &h;
            clean.push(h);
        }
        let gap = linalg::max_abs(&(sum - linalg::identity(n)));
        if gap > COMPLETENESS_TOL {
            return Err(QmathError::PovmIncomplete(gap));
        }
        Ok(Povm {
            space,
            elements: clean,
        })
    }

    /// Projective measurement in the computational basis.
    pub fn computational(space: HilbertSpace) -> Self {
        let n = space.dim();
        let elements = (0..n)
            .map(|i| {
                let mut m = CMatrix::zeros(n, n);
                m[(i, i)] = c(1.0);
                m
            })
            .collect();
        Povm { space, elements }
    }

    /// Trivial measurement with every outcome but `outcome` zero.
    pub fn constant(space: HilbertSpace, outcomes: usize, outcome: usize) -> Self {
        let n = space.dim();
        let elements = (0..outcomes)
            .map(|a| {
                if a == outcome {
                    linalg::identity(n)
                } else {
                    CMatrix::zeros(n, n)
                }
            })
            .collect();
        Povm { space, elements }
    }

    pub(crate) fn from_parts_unchecked(space: HilbertSpace, elements: Vec<CMatrix>) -> Self {
        Povm { space, elements }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Outcome probabilities on ρ.
    pub fn probabilities(&self, rho: &DensityOperator) -> Vec<f64> {
        self.elements.iter().map(|e| rho.expectation(e)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(name: &str) -> HilbertSpace {
        HilbertSpace::of(&[(name, 2)]).unwrap()
    }

    fn bell() -> PureState {
        let s = HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap();
        let h = 0.5f64.sqrt();
        PureState::new(s, CVector::from_vec(vec![c(h), ZERO, ZERO, c(h)])).unwrap()
    }

    #[test]
    fn density_validation() {
        let s = qubit("A");
        assert!(DensityOperator::new(s.clone(), linalg::identity(2) / c(2.0)).is_ok());
        assert!(DensityOperator::new(s.clone(), linalg::identity(2)).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5), ZERO, ZERO, c(-0.5)]);
        assert!(DensityOperator::new(s, neg).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let b = bell().density();
        let r = b.partial_trace(&["B"]).unwrap();
        assert!(linalg::max_abs(&(r.matrix() - linalg::identity(2) / c(2.0))) < 1e-12);
        let s = HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap();
        let h = 0.5f64.sqrt();
        let v = PureState::new(s, CVector::from_vec(vec![c(h), c(h), ZERO, ZERO])).unwrap();
        let r = v.density().partial_trace(&["B"]).unwrap();
        assert!((r.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(matches!(b.partial_trace(&["Q"]), Err(QmathError::UnknownFactor(_))));
        let via_pure = v.reduce(&["A"]).unwrap();
        assert!(linalg::max_abs(&(via_pure.matrix() - r.matrix())) < 1e-12);
    }

    #[test]
    fn purify_examples() {
        let rho = DensityOperator::diagonal(qubit("A"), &[0.25, 0.75]).unwrap();
        let p = purify(&rho);
        let schmidt = linalg::singular_values(&p.as_matrix(&[0]));
        let mut s = schmidt.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!((s[0] - 0.75f64.sqrt()).abs() < 1e-12 && (s[1] - 0.5).abs() < 1e-12);
        let back = p.density().partial_trace(&["A~"]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
        let mixed = purify(&DensityOperator::maximally_mixed(qubit("A")));
        let sv = linalg::singular_values(&mixed.as_matrix(&[0]));
        assert!(sv.iter().all(|v| (v - 0.5f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn operator_json_round_trip() {
        let rho = bell().density();
        let s = serde_json::to_string(&rho).unwrap();
        assert!(s.starts_with(r#"{"space":[{"name":"A","dim":2}"#));
        let back: DensityOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rho);
        let bad = r#"{"space":[{"name":"A","dim":2}],"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<DensityOperator>(bad).is_err());
    }
}
