//! Anchored input distributions, the correlation-breaking variables (D, G),
//! and the analysis of a repeated-game strategy conditioned on winning a
//! subset of coordinates.
//!
//! Two readings of the base distribution p are supported. In distribution
//! mode p is supplied directly and G | D=0 follows p(x). In game mode p is
//! derived from an anchored game as q(x, y | y ≠ y*), with ζ = q(y*).

pub mod conditioned;
pub mod repair;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distrib::{Axis, DistribError, FiniteDistribution};
use crate::games::{Game, GameError, DEFAULT_ANCHOR};
use crate::qmath::QmathError;

pub use conditioned::{conditioned_state, ConditionedAnalysis, ConditionedSummary, DgBlock};
pub use repair::{repair_unitaries, RepairReport, RepairTerm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BreakerError {
    #[error("bad base distribution: {0}")]
    BadBase(String),
    #[error("base distribution has an empty row: {0}")]
    ZeroRow(String),
    #[error("dimension {0} exceeds the guard")]
    SizeGuard(usize),
    #[error("success probability {0:e} is too small to condition on")]
    SuccessTooRare(f64),
    #[error("game has no anchor input with positive mass")]
    NoAnchor,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Distrib(#[from] DistribError),
    #[error(transparent)]
    Qmath(#[from] QmathError),
    #[error(transparent)]
    Game(#[from] GameError),
}

pub type Result<T> = std::result::Result<T, BreakerError>;

/// Label of the D=0 choice G = x.
pub fn g_label_x(x: &str) -> String {
    format!("x={x}")
}

/// Label of the D=1 choices G = y (including G = y*).
pub fn g_label_y(y: &str) -> String {
    format!("y={y}")
}

/// Largest deviation tolerated between q(x, y*) and ζ·q(x) in game mode.
const ANCHOR_PRODUCT_TOL: f64 = 1e-9;

fn check_base(p: &FiniteDistribution, zeta: f64, anchor: &str) -> Result<()> {
    if p.axes().len() != 2 {
        return Err(BreakerError::BadBase(format!(
            "expected two axes, found {}",
            p.axes().len()
        )));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(BreakerError::BadBase(format!("zeta {zeta} outside (0, 1)")));
    }
    if p.axes()[1].labels.iter().any(|l| l == anchor) {
        return Err(BreakerError::BadBase(format!("anchor label `{anchor}` already used by Y")));
    }
    Ok(())
}

/// q(x, y) = (1−ζ)·p(x, y) and q(x, y*) = ζ·p(x), over axes "X", "Y".
pub fn build_q(p: &FiniteDistribution, zeta: f64) -> Result<FiniteDistribution> {
    build_q_with(p, zeta, DEFAULT_ANCHOR)
}

pub fn build_q_with(p: &FiniteDistribution, zeta: f64, anchor: &str) -> Result<FiniteDistribution> {
    check_base(p, zeta, anchor)?;
    let (xs, ys) = (&p.axes()[0].labels, &p.axes()[1].labels);
    let (nx, ny) = (xs.len(), ys.len());
    let w = p.weights();
    let mut out = Vec::with_capacity(nx * (ny + 1));
    for x in 0..nx {
        let px: f64 = w[x * ny..(x + 1) * ny].iter().sum();
        out.extend(w[x * ny..(x + 1) * ny].iter().map(|v| (1.0 - zeta) * v));
        out.push(zeta * px);
    }
    let mut y = ys.clone();
    y.push(anchor.to_string());
    Ok(FiniteDistribution::from_masses(
        vec![Axis::new("X", xs), Axis::new("Y", &y)],
        out,
    )?)
}

/// Joint law of (X, Y, D, G) for a single coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakerJoint {
    pub base: FiniteDistribution,
    pub zeta: f64,
    pub anchor: String,
    /// Axes "X", "Y" (extended by the anchor), "D" ∈ {0, 1} and "G".
    pub joint: FiniteDistribution,
}

/// The five-case table:
///
/// - D=0: G = x w.p. p(x); then (X, Y) = (x, y*) w.p. ζ and (x, y) w.p.
///   (1−ζ)·p(y|x).
/// - D=1: G = y* w.p. 1−(1−ζ)^{2/3} and G = y w.p. (1−ζ)^{2/3}·p(y).
/// - G = y*: X ~ p(x), Y = y*.
/// - G = y: (x, y*) w.p. (1−(1−ζ)^{1/3})·p(x|y) and (x, y) w.p.
///   (1−ζ)^{1/3}·p(x|y).
pub fn build_joint(p: &FiniteDistribution, zeta: f64) -> Result<BreakerJoint> {
    build_joint_with(p, zeta, DEFAULT_ANCHOR)
}

pub fn build_joint_with(p: &FiniteDistribution, zeta: f64, anchor: &str) -> Result<BreakerJoint> {
    check_base(p, zeta, anchor)?;
    let (xs, ys) = (&p.axes()[0].labels, &p.axes()[1].labels);
    let (nx, ny) = (xs.len(), ys.len());
    let w = p.weights();
    let px: Vec<f64> = (0..nx).map(|x| w[x * ny..(x + 1) * ny].iter().sum()).collect();
    let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| w[x * ny + y]).sum()).collect();
    if let Some(x) = px.iter().position(|&v| v <= 0.0) {
        return Err(BreakerError::ZeroRow(format!("p(x = {}) = 0", xs[x])));
    }

    let mut y_ext = ys.clone();
    y_ext.push(anchor.to_string());
    let mut g_labels: Vec<String> = xs.iter().map(|x| g_label_x(x)).collect();
    g_labels.extend(y_ext.iter().map(|y| g_label_y(y)));
    let (nyx, ng) = (ny + 1, g_labels.len());
    let star = ny;

    let c13 = (1.0 - zeta).cbrt();
    let c23 = c13 * c13;
    let mut t = vec![0.0; nx * nyx * 2 * ng];
    let idx = |x: usize, y: usize, d: usize, g: usize| ((x * nyx + y) * 2 + d) * ng + g;
    for x in 0..nx {
        // D = 0, G = x.
        t[idx(x, star, 0, x)] = 0.5 * px[x] * zeta;
        for y in 0..ny {
            t[idx(x, y, 0, x)] = 0.5 * (1.0 - zeta) * w[x * ny + y];
        }
        // D = 1, G = y*.
        t[idx(x, star, 1, nx + star)] = 0.5 * (1.0 - c23) * px[x];
        // D = 1, G = y: mass (1−ζ)^{2/3}·p(y)·p(x|y) = (1−ζ)^{2/3}·p(x, y).
        for y in 0..ny {
            if py[y] <= 0.0 {
                continue;
            }
            let pxy = c23 * w[x * ny + y];
            t[idx(x, star, 1, nx + y)] = 0.5 * (1.0 - c13) * pxy;
            t[idx(x, y, 1, nx + y)] = 0.5 * c13 * pxy;
        }
    }
    let joint = FiniteDistribution::from_masses(
        vec![
            Axis::new("X", xs),
            Axis::new("Y", &y_ext),
            Axis::new("D", &["0", "1"]),
            Axis::new("G", &g_labels),
        ],
        t,
    )?;
    Ok(BreakerJoint {
        base: p.clone(),
        zeta,
        anchor: anchor.to_string(),
        joint,
    })
}

impl BreakerJoint {
    /// Game mode: p = q(x, y | y ≠ y*) and ζ = q(y*), for a game anchored on
    /// the Y side with label `anchor`.
    pub fn from_anchored_game(game: &Game, anchor: &str) -> Result<BreakerJoint> {
        let star = game
            .y_labels()
            .iter()
            .position(|l| l == anchor)
            .ok_or(BreakerError::NoAnchor)?;
        let (nx, ny, _, _) = game.sizes();
        let zeta: f64 = (0..nx).map(|x| game.q_at(x, star)).sum();
        if zeta <= 0.0 {
            return Err(BreakerError::NoAnchor);
        }
        for x in 0..nx {
            let qx: f64 = (0..ny).map(|y| game.q_at(x, y)).sum();
            if (game.q_at(x, star) - zeta * qx).abs() > ANCHOR_PRODUCT_TOL {
                return Err(BreakerError::BadBase(format!(
                    "q(x, y*) ≠ ζ·q(x) at x = {}",
                    game.x_labels()[x]
                )));
            }
        }
        let ys: Vec<String> = game.y_labels().iter().filter(|l| *l != anchor).cloned().collect();
        let mut masses = Vec::with_capacity(nx * (ny - 1));
        for x in 0..nx {
            for y in (0..ny).filter(|&y| y != star) {
                masses.push(game.q_at(x, y));
            }
        }
        let p = FiniteDistribution::from_masses(vec![Axis::new("X", game.x_labels()), Axis::new("Y", &ys)], masses)
            .map_err(|e| BreakerError::BadBase(e.to_string()))?;
        build_joint_with(&p, zeta, anchor)
    }

    /// q rebuilt from the base.
    pub fn expected_q(&self) -> Result<FiniteDistribution> {
        build_q_with(&self.base, self.zeta, &self.anchor)
    }

    /// P(G = y* | D = 1).
    pub fn anchor_probability(&self) -> f64 {
        let star = g_label_y(&self.anchor);
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &w) in self.joint.weights().iter().enumerate() {
            let l = self.joint.labels_of(i);
            if l[2] == "1" {
                den += w;
                if l[3] == star {
                    num += w;
                }
            }
        }
        num / den
    }

    /// P(X = x, Y = y | D = d, G = g) by label indices into the joint's axes.
    pub(crate) fn conditional_xy(&self) -> Vec<Vec<f64>> {
        let (nx, ny) = (self.joint.axes()[0].len(), self.joint.axes()[1].len());
        let ng = self.joint.axes()[3].len();
        let w = self.joint.weights();
        let mut out = Vec::with_capacity(2 * ng);
        for d in 0..2 {
            for g in 0..ng {
                let mut row: Vec<f64> = (0..nx * ny).map(|xy| w[(xy * 2 + d) * ng + g]).collect();
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    row.iter_mut().for_each(|v| *v /= total);
                }
                out.push(row);
            }
        }
        out
    }

    /// P(D = d, G = g), flattened as d·|G| + g.
    pub(crate) fn dg_marginal(&self) -> Vec<f64> {
        let ng = self.joint.axes()[3].len();
        let mut out = vec![0.0; 2 * ng];
        for (i, &w) in self.joint.weights().iter().enumerate() {
            out[i % (2 * ng)] += w;
        }
        out
    }
}

/// ℓ1 distance between the joint's (X, Y) marginal and q.
pub fn verify_marginal(joint: &BreakerJoint) -> Result<f64> {
    let m = joint.joint.marginal(&["X", "Y"])?;
    Ok(m.l1_distance(&joint.expected_q()?)?)
}

/// I(X : Y | D, G) in bits.
pub fn breaking_gap(joint: &BreakerJoint) -> Result<f64> {
    Ok(joint.joint.conditional_mutual_information(&["X"], &["Y"], &["D", "G"])?)
}

/// P(Y ≠ G | D = 1), where G = y is compared with the Y label.
pub fn mismatch_probability(joint: &BreakerJoint) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &w) in joint.joint.weights().iter().enumerate() {
        let l = joint.joint.labels_of(i);
        if l[2] != "1" {
            continue;
        }
        den += w;
        if l[3] != g_label_y(l[1]) {
            num += w;
        }
    }
    num / den
}

/// (1−ζ)^{2/3}·(1−(1−ζ)^{1/3}).
pub fn mismatch_closed_form(zeta: f64) -> f64 {
    let c13 = (1.0 - zeta).cbrt();
    c13 * c13 * (1.0 - c13)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_bits() -> FiniteDistribution {
        FiniteDistribution::uniform(vec![Axis::new("X", &["0", "1"]), Axis::new("Y", &["0", "1"])]).unwrap()
    }

    #[test]
    fn q_entries() {
        let q = build_q(&uniform_bits(), 0.5).unwrap();
        assert_eq!(q.weights(), &[0.125, 0.125, 0.25, 0.125, 0.125, 0.25]);
    }

    #[test]
    fn joint_rows() {
        let p = FiniteDistribution::from_table(
            vec![Axis::new("X", &["0", "1"]), Axis::new("Y", &["0", "1"])],
            vec![0.7, 0.1, 0.1, 0.1],
        )
        .unwrap();
        let j = build_joint(&p, 0.3).unwrap();
        assert!(verify_marginal(&j).unwrap() <= 1e-12);
        assert!(breaking_gap(&j).unwrap() <= 1e-10);
        let d = j.joint.marginal(&["D"]).unwrap();
        assert!((d.weights()[0] - 0.5).abs() <= 1e-12);
        let d0 = j.joint.condition_on_value("D", "0").unwrap();
        for (i, &w) in d0.weights().iter().enumerate() {
            let l = d0.labels_of(i);
            if w > 0.0 {
                assert_eq!(l[2], g_label_x(l[0]));
            }
        }
    }

    #[test]
    fn anchor_and_mismatch_at_zeta_0_488() {
        let j = build_joint(&uniform_bits(), 0.488).unwrap();
        assert!((j.anchor_probability() - 0.36).abs() <= 1e-12);
        assert!((mismatch_probability(&j) - 0.128).abs() <= 1e-12);
        assert!((mismatch_closed_form(0.7) - 0.1481405).abs() < 1e-7);
    }

    #[test]
    fn game_mode_recovers_base() {
        use crate::games::{anchor_game, AnchorSide, AnchorSpec};
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.2)).unwrap();
        let j = BreakerJoint::from_anchored_game(&g, DEFAULT_ANCHOR).unwrap();
        assert!((j.zeta - 0.2).abs() < 1e-12);
        assert!(j.base.l1_distance(&uniform_bits()).unwrap() < 1e-12);
        assert!(matches!(
            BreakerJoint::from_anchored_game(&Game::chsh(), DEFAULT_ANCHOR),
            Err(BreakerError::NoAnchor)
        ));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(build_q(&uniform_bits(), 1.0), Err(BreakerError::BadBase(_))));
        let p = FiniteDistribution::from_table(
            vec![Axis::new("X", &["0", "1"]), Axis::new("Y", &["0", "1"])],
            vec![0.5, 0.5, 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(build_joint(&p, 0.2), Err(BreakerError::ZeroRow(_))));
    }
}
