//! Measurement operators that compress a shared state Σ√P(x)|xx⟩|σ_x⟩ onto
//! a single branch |xx⟩|σ_x⟩ while acting only on Alice's registers.
//!
//! For each x the exact steering operator O_x = Φ_x·Ψ⁺ (with Ψ, Φ_x the
//! state and the target reshaped to Alice × Bob) satisfies O_x·Ψ = Φ_x. Its
//! singular values are clipped at a threshold c, making O_c/c a contraction
//! whose success probability grows as c falls while the normalized outcome
//! drifts from the target. The thresholds are chosen jointly: the largest
//! common success level whose cheapest per-branch distances average, under
//! P, to at most 2δ. All operators are finally rescaled to that level.

use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMatrix, ZERO};
use super::space::HilbertSpace;
use super::state::PureState;
use super::{QmathError, Result};

/// Amplitudes below this count as zero in the form check.
pub const FORM_TOL: f64 = 1e-10;
const CAP_STEPS: usize = 240;

/// Register names of the shared state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionLayout {
    pub x: String,
    pub x_tilde: String,
    pub a: Vec<String>,
    pub b: Vec<String>,
}

impl CompressionLayout {
    pub fn standard() -> Self {
        CompressionLayout {
            x: "X".into(),
            x_tilde: "X~".into(),
            a: vec!["A".into()],
            b: vec!["B".into()],
        }
    }

    fn alice(&self) -> Vec<&str> {
        let mut v = vec![self.x.as_str(), self.x_tilde.as_str()];
        v.extend(self.a.iter().map(String::as_str));
        v
    }

    fn order(&self) -> Vec<&str> {
        let mut v = self.alice();
        v.extend(self.b.iter().map(String::as_str));
        v
    }
}

/// The state decomposed into its branches.
struct Branches {
    alice_space: HilbertSpace,
    /// Full state as an Alice × Bob matrix.
    psi: CMatrix,
    probs: Vec<f64>,
    /// Normalized |xx⟩|σ_x⟩ as Alice × Bob matrices (None when P(x) = 0).
    targets: Vec<Option<CMatrix>>,
}

fn decompose(state: &PureState, layout: &CompressionLayout) -> Result<Branches> {
    let order = layout.order();
    if order.len() != state.space().factors().len() {
        return Err(QmathError::FormViolation(
            "layout must name every factor exactly once".into(),
        ));
    }
    let st = state.reorder(&order)?;
    let dx = st.space().factor_dim(&layout.x)?;
    if st.space().factor_dim(&layout.x_tilde)? != dx {
        return Err(QmathError::FormViolation("X and X~ dimensions differ".into()));
    }
    let n_alice = layout.alice().len();
    let alice_pos: Vec<usize> = (0..n_alice).collect();
    let psi = st.as_matrix(&alice_pos);
    let da = psi.nrows() / (dx * dx);
    let db = psi.ncols();
    let mut probs = vec![0.0; dx];
    let mut targets = vec![None; dx];
    for x in 0..dx {
        for xt in 0..dx {
            for a in 0..da {
                let row = (x * dx + xt) * da + a;
                for b in 0..db {
                    let amp = psi[(row, b)];
                    if x == xt {
                        probs[x] += amp.norm_sqr();
                    } else if amp.norm() > FORM_TOL {
                        return Err(QmathError::FormViolation(format!(
                            "amplitude {:.3e} on |{x}{xt}⟩",
                            amp.norm()
                        )));
                    }
                }
            }
        }
    }
    for x in 0..dx {
        if probs[x] <= FORM_TOL * FORM_TOL {
            continue;
        }
        let mut t = CMatrix::from_element(psi.nrows(), db, ZERO);
        for a in 0..da {
            let row = (x * dx + x) * da + a;
            for b in 0..db {
                t[(row, b)] = psi[(row, b)] / c(probs[x].sqrt());
            }
        }
        targets[x] = Some(t);
    }
    Ok(Branches {
        alice_space: st.space().select(&alice_pos),
        psi,
        probs,
        targets,
    })
}

/// Moore–Penrose pseudo-inverse with the support cutoff.
fn pinv(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let inv: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s > 1e-10 { 1.0 / s } else { 0.0 })
        .collect();
    let mut v = vt.adjoint();
    for (k, s) in inv.iter().enumerate() {
        for r in 0..v.nrows() {
            v[(r, k)] *= c(*s);
        }
    }
    v * u.adjoint()
}

/// ‖|u⟩⟨u| − |v⟩⟨v|‖₁ for unit vectors given as matrices.
/// Uses 1 − |⟨u|v⟩|² = ‖v − ⟨u|v⟩u‖², which avoids cancellation near overlap 1.
fn pure_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let ov: num_complex::Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    2.0 * (v - u * ov).norm()
}

/// Success probability and closeness of one operator on one branch.
fn evaluate(op: &CMatrix, psi: &CMatrix, target: &CMatrix) -> (f64, f64) {
    let post = op * psi;
    let p = post.norm_squared();
    if !(p > 0.0) {
        return (0.0, 2.0);
    }
    (p, pure_distance(&(post / c(p.sqrt())), target))
}

/// Success and distance of the clipped steering operator along a
/// log-spaced ladder of thresholds, starting from no clipping.
struct ClipCurve {
    u: CMatrix,
    vt: CMatrix,
    sv: Vec<f64>,
    caps: Vec<f64>,
    points: Vec<(f64, f64)>,
}

impl ClipCurve {
    fn new(steer: &CMatrix, psi: &CMatrix, target: &CMatrix) -> Self {
        let svd = steer.clone().svd(true, true);
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let sv = svd
            .singular_values
            .iter()
            .map(|&s| if s > 1e-10 * top { s } else { 0.0 })
            .collect();
        let mut curve = ClipCurve {
            u: svd.u.expect("requested"),
            vt: svd.v_t.expect("requested"),
            sv,
            caps: (0..=CAP_STEPS)
                .map(|i| (top.ln() - 40.0 * i as f64 / CAP_STEPS as f64).exp())
                .collect(),
            points: Vec::new(),
        };
        curve.points = curve.caps.iter().map(|&cap| evaluate(&curve.build(cap), psi, target)).collect();
        curve
    }

    fn build(&self, cap: f64) -> CMatrix {
        let mut us = self.u.clone();
        for (k, s) in self.sv.iter().enumerate() {
            let v = s.min(cap) / cap;
            for r in 0..us.nrows() {
                us[(r, k)] *= c(v);
            }
        }
        us * &self.vt
    }

    /// Cheapest distance reaching success `level`, with its ladder index.
    fn cheapest(&self, level: f64) -> Option<(f64, usize)> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, (p, _))| *p >= level)
            .map(|(i, (_, d))| (*d, i))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

/// Result of the compression construction.
#[derive(Debug, Clone)]
pub struct Compression {
    /// Space of Alice's registers X, X~, A (in that order).
    pub space: HilbertSpace,
    /// One contraction per value of X; zero for values with P(x) = 0.
    pub operators: Vec<CMatrix>,
    pub alpha: f64,
    pub closeness: f64,
    pub report: JrsReport,
}

/// Builds the measurement family and accepts it only when the verification
/// meets α ≥ 2^{−k/δ}/4 and expected closeness ≤ 2δ.
pub fn compression_measurement(
    state: &PureState,
    layout: &CompressionLayout,
    k: f64,
    delta: f64,
) -> Result<Compression> {
    if !(delta > 0.0) || !(k >= 0.0) {
        return Err(QmathError::InvalidArgument(format!(
            "need delta > 0 and k >= 0, got {delta}, {k}"
        )));
    }
    let br = decompose(state, layout)?;
    let psi_pinv = pinv(&br.psi);
    let curves: Vec<Option<ClipCurve>> = br
        .targets
        .iter()
        .map(|t| t.as_ref().map(|t| ClipCurve::new(&(t * &psi_pinv), &br.psi, t)))
        .collect();
    // Expected distance of the cheapest choice at a success level.
    let cost = |level: f64| -> Option<f64> {
        let mut total = 0.0;
        for (curve, &p) in curves.iter().zip(&br.probs) {
            if let Some(curve) = curve {
                total += p * curve.cheapest(level)?.0;
            }
        }
        Some(total)
    };
    let mut levels: Vec<f64> = curves.iter().flatten().flat_map(|cv| cv.points.iter().map(|q| q.0)).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let feasible = |l: &f64| cost(*l).is_some_and(|v| v <= 2.0 * delta * (1.0 - 1e-12));
    let n_ok = levels.partition_point(|l| feasible(l));
    let level = if n_ok == 0 { levels.first().copied().unwrap_or(0.0) } else { levels[n_ok - 1] };
    let mut ops = Vec::with_capacity(br.probs.len());
    let mut alphas = Vec::with_capacity(br.probs.len());
    for curve in &curves {
        match curve {
            Some(cv) => {
                let i = cv.cheapest(level).map_or(0, |(_, i)| i);
                ops.push(cv.build(cv.caps[i]));
                alphas.push(cv.points[i].0);
            }
            None => {
                ops.push(CMatrix::zeros(br.psi.nrows(), br.psi.nrows()));
                alphas.push(f64::INFINITY);
            }
        }
    }
    let alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(QmathError::ConstructionFailed("zero success probability".into()));
    }
    for (op, &ax) in ops.iter_mut().zip(&alphas) {
        if ax.is_finite() {
            *op *= c((alpha / ax).sqrt());
        }
    }
    let report = jrs_verify(state, layout, &ops, k, delta)?;
    if report.success_margin < 0.0 || report.closeness_margin < 0.0 {
        return Err(QmathError::ConstructionFailed(format!(
            "alpha {:.4e}, closeness {:.4e}",
            report.alpha, report.closeness
        )));
    }
    Ok(Compression {
        space: br.alice_space,
        operators: ops,
        alpha: report.alpha,
        closeness: report.closeness,
        report,
    })
}

/// Verified properties of a measurement family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JrsReport {
    /// Success probability of each operator (NaN-free; zero-mass values skipped).
    pub alphas: Vec<f64>,
    /// Smallest success probability over values with P(x) > 0.
    pub alpha: f64,
    /// E_{P_X} of the normalized post-measurement distance to |xx⟩|σ_x⟩.
    pub closeness: f64,
    /// alpha − 2^{−k/δ}/4.
    pub success_margin: f64,
    /// 2δ − closeness.
    pub closeness_margin: f64,
    /// −max_x |α_x − alpha|: every operator should succeed equally often.
    pub uniformity_margin: f64,
}

/// Evaluates a family {Π_x} of operators on X X~ A against the state.
pub fn jrs_verify(
    state: &PureState,
    layout: &CompressionLayout,
    operators: &[CMatrix],
    k: f64,
    delta: f64,
) -> Result<JrsReport> {
    let br = decompose(state, layout)?;
    if operators.len() != br.probs.len() {
        return Err(QmathError::HypothesisViolated(format!(
            "{} operators for {} values of X",
            operators.len(),
            br.probs.len()
        )));
    }
    let mut alphas = Vec::new();
    let mut closeness = 0.0;
    for (x, op) in operators.iter().enumerate() {
        if op.nrows() != br.psi.nrows() || op.ncols() != br.psi.nrows() {
            return Err(QmathError::SpaceMismatch("operator on X X~ A".into()));
        }
        let norm = linalg::singular_values(op).into_iter().fold(0.0, f64::max);
        if norm > 1.0 + 1e-9 {
            return Err(QmathError::HypothesisViolated(format!(
                "operator {x} has norm {norm}"
            )));
        }
        if let Some(t) = &br.targets[x] {
            let (p, d) = evaluate(op, &br.psi, t);
            alphas.push(p);
            closeness += br.probs[x] * d;
        }
    }
    let alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = alphas.iter().map(|a| (a - alpha).abs()).fold(0.0, f64::max);
    Ok(JrsReport {
        success_margin: alpha - (-k / delta).exp2() / 4.0,
        closeness_margin: 2.0 * delta - closeness,
        uniformity_margin: -spread,
        alphas,
        alpha,
        closeness,
    })
}
