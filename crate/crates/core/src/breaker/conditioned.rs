//! Post-measurement states of a k-fold strategy conditioned on winning the
//! coordinates in C.
//!
//! Each measurement is dilated as |e⟩ ↦ Σ_a |a⟩ ⊗ √A_a|e⟩, so for inputs
//! (x, y) the joint state on answers and environments is
//! Σ_{a,b} |a⟩|b⟩ ⊗ (√A^x_a ⊗ √B^y_b)|ψ⟩. Projecting onto answers that win
//! every coordinate in C leaves a vector of squared norm Pr[win C | x, y].
//! Inputs stay classical.

use serde::{Deserialize, Serialize};

use super::{BreakerError, BreakerJoint, Result};
use crate::distrib::{Axis, FiniteDistribution, Radix};
use crate::games::{repeat_game, EntangledStrategy, Game, DEFAULT_ANCHOR};
use crate::qmath::linalg::{c, sqrt_psd, CMatrix, CVector, ZERO};
use crate::qmath::{CQState, DensityOperator, HilbertSpace, PureState, MAX_DIM};

/// Success probabilities below this are not conditioned on.
pub const MIN_SUCCESS: f64 = 1e-12;
pub const MAX_K: usize = 3;
pub const MAX_LOCAL_DIM: usize = 2;

/// One value (d, g) of the correlation-breaking variables over all k
/// coordinates, with P(dg) and γ_dg = Pr[win C | dg].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgBlock {
    pub d: Vec<String>,
    pub g: Vec<String>,
    pub prob: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedAnalysis {
    pub game: Game,
    pub k: usize,
    /// Coordinates that must be won, 0-based and sorted.
    pub coords: Vec<usize>,
    pub dim: usize,
    pub pr_success: f64,
    /// Present when the game is anchored on the Y side with positive mass.
    pub joint: Option<BreakerJoint>,
    /// Blocks with P(dg) > 0, in lexicographic order of (d, g).
    pub dg_blocks: Vec<DgBlock>,
    /// Pr[win C | x, y], indexed by x_flat·|Y|^k + y_flat.
    pub win_given_xy: Vec<f64>,
    /// I(X_i : Y, Bob's registers) in the conditioned state, per coordinate.
    pub info_x: Vec<f64>,
    /// I(Y_i : X, Alice's registers) in the conditioned state, per coordinate.
    pub info_y: Vec<f64>,
    /// Subnormalized post-measurement vectors on [`Self::space`], same
    /// indexing as `win_given_xy`.
    pub(crate) amplitudes: Vec<CVector>,
}

/// Factors "A0".."A{k-1}", "EA", "B0".."B{k-1}", "EB".
pub fn answer_space(game: &Game, k: usize, dim: usize) -> Result<HilbertSpace> {
    let (_, _, na, nb) = game.sizes();
    let total = (na.pow(k as u32) * nb.pow(k as u32)).saturating_mul(dim * dim);
    if total > MAX_DIM {
        return Err(BreakerError::SizeGuard(total));
    }
    let mut f: Vec<(String, usize)> = (0..k).map(|j| (format!("A{j}"), na)).collect();
    f.push(("EA".into(), dim));
    f.extend((0..k).map(|j| (format!("B{j}"), nb)));
    f.push(("EB".into(), dim));
    let pairs: Vec<(&str, usize)> = f.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    Ok(HilbertSpace::of(&pairs)?)
}

fn alice_names(k: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..k).map(|j| format!("A{j}")).collect();
    v.push("EA".into());
    v
}

fn bob_names(k: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..k).map(|j| format!("B{j}")).collect();
    v.push("EB".into());
    v
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Analysis of `strategy` (for the k-fold repetition of `game`) conditioned
/// on winning every coordinate in `coords`.
pub fn conditioned_state(
    game: &Game,
    strategy: &EntangledStrategy,
    coords: &[usize],
    k: usize,
) -> Result<ConditionedAnalysis> {
    if k == 0 || k > MAX_K {
        return Err(BreakerError::InvalidArgument(format!("k = {k} outside 1..={MAX_K}")));
    }
    let mut coords = coords.to_vec();
    coords.sort_unstable();
    coords.dedup();
    if coords.iter().any(|&c| c >= k) {
        return Err(BreakerError::InvalidArgument(format!("coordinates {coords:?} outside 0..{k}")));
    }
    let d = strategy.dim;
    if d == 0 || d > MAX_LOCAL_DIM {
        return Err(BreakerError::SizeGuard(d));
    }
    let space = answer_space(game, k, d)?;
    let rep = repeat_game(game, k)?;
    let (nx, ny, na, nb) = game.sizes();
    let (kx, ky, ka, kb) = rep.sizes();
    let shape_ok = strategy.state.vector().len() == d * d
        && strategy.alice.len() == kx
        && strategy.bob.len() == ky
        && strategy.alice.iter().all(|p| p.len() == ka && p.space().dim() == d)
        && strategy.bob.iter().all(|p| p.len() == kb && p.space().dim() == d);
    if !shape_ok {
        return Err(BreakerError::InvalidArgument("strategy does not fit the repeated game".into()));
    }

    let (rx, ry) = (Radix::new(&vec![nx; k]), Radix::new(&vec![ny; k]));
    let (ra, rb) = (Radix::new(&vec![na; k]), Radix::new(&vec![nb; k]));
    let psi = CMatrix::from_fn(d, d, |i, j| strategy.state.vector()[i * d + j]);
    let sqrt_a: Vec<Vec<CMatrix>> = strategy
        .alice
        .iter()
        .map(|p| p.elements().iter().map(sqrt_psd).collect())
        .collect();
    let sqrt_b: Vec<Vec<CMatrix>> = strategy
        .bob
        .iter()
        .map(|p| p.elements().iter().map(|e| sqrt_psd(e).transpose()).collect())
        .collect();
    let a_digits: Vec<Vec<usize>> = (0..ka).map(|a| ra.digits(a)).collect();
    let b_digits: Vec<Vec<usize>> = (0..kb).map(|b| rb.digits(b)).collect();

    let mut amplitudes = Vec::with_capacity(kx * ky);
    let mut win_given_xy = Vec::with_capacity(kx * ky);
    let mut pr_success = 0.0;
    for x in 0..kx {
        let xd = rx.digits(x);
        for y in 0..ky {
            let yd = ry.digits(y);
            let mut v = CVector::from_element(space.dim(), ZERO);
            for a in 0..ka {
                let left = &sqrt_a[x][a] * &psi;
                for b in 0..kb {
                    let wins = coords
                        .iter()
                        .all(|&j| game.wins(xd[j], yd[j], a_digits[a][j], b_digits[b][j]));
                    if !wins {
                        continue;
                    }
                    let block = &left * &sqrt_b[y][b];
                    for ea in 0..d {
                        for eb in 0..d {
                            v[((a * d + ea) * kb + b) * d + eb] = block[(ea, eb)];
                        }
                    }
                }
            }
            let w = v.norm_squared();
            pr_success += rep.q_at(x, y) * w;
            win_given_xy.push(w);
            amplitudes.push(v);
        }
    }
    if !(pr_success >= MIN_SUCCESS) {
        return Err(BreakerError::SuccessTooRare(pr_success));
    }

    let joint = match BreakerJoint::from_anchored_game(game, DEFAULT_ANCHOR) {
        Ok(j) => Some(j),
        Err(BreakerError::NoAnchor) => None,
        Err(e) => return Err(e),
    };
    let dg_blocks = match &joint {
        Some(j) => dg_blocks(game, j, k, &win_given_xy)?,
        None => Vec::new(),
    };

    let mut analysis = ConditionedAnalysis {
        game: game.clone(),
        k,
        coords,
        dim: d,
        pr_success,
        joint,
        dg_blocks,
        win_given_xy,
        info_x: Vec::new(),
        info_y: Vec::new(),
        amplitudes,
    };
    let bob = bob_names(k);
    let alice = alice_names(k);
    let cq_bob = analysis.conditioned_cq(&strs(&bob))?;
    let cq_alice = analysis.conditioned_cq(&strs(&alice))?;
    let xs: Vec<String> = (0..k).map(|j| format!("X{j}")).collect();
    let ys: Vec<String> = (0..k).map(|j| format!("Y{j}")).collect();
    for i in 0..k {
        let mut rest: Vec<&str> = strs(&ys);
        rest.extend(strs(&bob));
        analysis.info_x.push(cq_bob.mutual_information(&[xs[i].as_str()], &rest)?.max(0.0));
        let mut rest: Vec<&str> = strs(&xs);
        rest.extend(strs(&alice));
        analysis.info_y.push(cq_alice.mutual_information(&[ys[i].as_str()], &rest)?.max(0.0));
    }
    Ok(analysis)
}

fn dg_blocks(game: &Game, joint: &BreakerJoint, k: usize, win: &[f64]) -> Result<Vec<DgBlock>> {
    let (nx, ny, _, _) = game.sizes();
    let jy = &joint.joint.axes()[1];
    let y_map: Vec<usize> = game
        .y_labels()
        .iter()
        .map(|l| jy.position(l).expect("joint Y axis holds the game's labels"))
        .collect();
    let g_axis = &joint.joint.axes()[3];
    let ng = g_axis.len();
    let cond = joint.conditional_xy();
    let dgm = joint.dg_marginal();
    let (rx, ry, rdg) = (Radix::new(&vec![nx; k]), Radix::new(&vec![ny; k]), Radix::new(&vec![2 * ng; k]));
    let ky = ry.len();
    let mut out = Vec::new();
    for t in 0..rdg.len() {
        let dg = rdg.digits(t);
        let prob: f64 = dg.iter().map(|&v| dgm[v]).product();
        if prob <= 0.0 {
            continue;
        }
        let mut gamma = 0.0;
        for x in 0..rx.len() {
            let xd = rx.digits(x);
            for y in 0..ky {
                let yd = ry.digits(y);
                let p: f64 = (0..k)
                    .map(|j| cond[dg[j]][xd[j] * (ny) + y_map[yd[j]]])
                    .product();
                gamma += p * win[x * ky + y];
            }
        }
        out.push(DgBlock {
            d: dg.iter().map(|&v| (v / ng).to_string()).collect(),
            g: dg.iter().map(|&v| g_axis.labels[v % ng].clone()).collect(),
            prob,
            gamma,
        });
    }
    Ok(out)
}

/// JSON-facing digest of an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionedSummary {
    pub k: usize,
    pub coords: Vec<usize>,
    pub dim: usize,
    pub pr_success: f64,
    pub dg_blocks: Vec<DgBlock>,
    pub info_x: Vec<f64>,
    pub info_y: Vec<f64>,
}

impl ConditionedAnalysis {
    pub fn summary(&self) -> ConditionedSummary {
        ConditionedSummary {
            k: self.k,
            coords: self.coords.clone(),
            dim: self.dim,
            pr_success: self.pr_success,
            dg_blocks: self.dg_blocks.clone(),
            info_x: self.info_x.clone(),
            info_y: self.info_y.clone(),
        }
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        answer_space(&self.game, self.k, self.dim)
    }

    /// Σ_dg P(dg)·γ_dg; equals `pr_success` when the game is anchored.
    pub fn dg_total(&self) -> f64 {
        self.dg_blocks.iter().map(|b| b.prob * b.gamma).sum()
    }

    /// P(x, y | E) over axes "X0".., "Y0"..
    pub fn conditioned_inputs(&self) -> Result<FiniteDistribution> {
        let rep = repeat_game(&self.game, self.k)?;
        let (kx, ky, _, _) = rep.sizes();
        let mut axes: Vec<Axis> = (0..self.k).map(|j| Axis::new(format!("X{j}"), self.game.x_labels())).collect();
        axes.extend((0..self.k).map(|j| Axis::new(format!("Y{j}"), self.game.y_labels())));
        // Axis order X0..X{k-1} Y0..Y{k-1} matches x_flat·|Y|^k + y_flat.
        let masses: Vec<f64> = (0..kx * ky)
            .map(|i| rep.q_at(i / ky, i % ky) * self.win_given_xy[i])
            .collect();
        Ok(FiniteDistribution::from_masses(axes, masses)?)
    }

    /// Normalized conditioned state for inputs (x_flat, y_flat), if they
    /// can win.
    pub fn conditioned_pure(&self, xy: usize) -> Result<Option<PureState>> {
        let v = &self.amplitudes[xy];
        let n = v.norm();
        if n * n <= MIN_SUCCESS {
            return Ok(None);
        }
        Ok(Some(PureState::new(self.space()?, v / c(n))?))
    }

    /// Σ_{xy} P(xy | E)·|xy⟩⟨xy| ⊗ ρ_{keep | xy, E}. Inputs that cannot win
    /// carry the maximally mixed state with zero weight.
    pub fn conditioned_cq(&self, keep: &[&str]) -> Result<CQState> {
        let inputs = self.conditioned_inputs()?;
        let space = self.space()?;
        let mut keep_pos = space.positions(keep)?;
        keep_pos.sort_unstable();
        let kept = space.select(&keep_pos);
        let mut states = Vec::with_capacity(self.amplitudes.len());
        for xy in 0..self.amplitudes.len() {
            states.push(match self.conditioned_pure(xy)? {
                Some(s) => s.reduce(keep)?,
                None => DensityOperator::maximally_mixed(kept.clone()),
            });
        }
        Ok(CQState::new(inputs, states)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{anchor_game, AnchorSide, AnchorSpec, DeterministicStrategy};
    use crate::qmath::Povm;

    /// Deterministic strategy embedded at d = 1.
    pub(crate) fn embed(game: &Game, s: &DeterministicStrategy) -> EntangledStrategy {
        let (_, _, na, nb) = game.sizes();
        let sp = EntangledStrategy::local_space(1).unwrap();
        EntangledStrategy {
            dim: 1,
            state: PureState::basis(HilbertSpace::of(&[("A", 1), ("B", 1)]).unwrap(), 0).unwrap(),
            alice: s.g.iter().map(|&a| Povm::constant(sp.clone(), na, a)).collect(),
            bob: s.h.iter().map(|&b| Povm::constant(sp.clone(), nb, b)).collect(),
        }
    }

    fn product_strategy(game: &Game, k: usize, g: Vec<usize>, h: Vec<usize>) -> EntangledStrategy {
        // Plays (g, h) on every coordinate.
        let (nx, ny, na, nb) = game.sizes();
        let lift = |f: &[usize], n_in: usize, n_out: usize| -> Vec<usize> {
            let r_in = Radix::new(&vec![n_in; k]);
            let r_out = Radix::new(&vec![n_out; k]);
            (0..r_in.len())
                .map(|i| r_out.flat(&r_in.digits(i).iter().map(|&v| f[v]).collect::<Vec<_>>()))
                .collect()
        };
        let rep = repeat_game(game, k).unwrap();
        embed(
            &rep,
            &DeterministicStrategy {
                g: lift(&g, nx, na),
                h: lift(&h, ny, nb),
            },
        )
    }

    #[test]
    fn deterministic_matches_classical_conditioning() {
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.2)).unwrap();
        let s = product_strategy(&g, 2, vec![0, 0], vec![0, 0, 0]);
        let an = conditioned_state(&g, &s, &[1], 2).unwrap();
        // Constant answers lose CHSH only at (1, 1).
        assert!((an.pr_success - (1.0 - 0.8 * 0.25)).abs() < 1e-12);
        assert!((an.dg_total() - an.pr_success).abs() < 1e-9);
        let inputs = an.conditioned_inputs().unwrap();
        let w = inputs.prob(&["0", "1", "1", "1"]).unwrap();
        assert_eq!(w, 0.0);
        let w = inputs.prob(&["0", "0", "1", "0"]).unwrap();
        assert!((w - 0.5 * 0.4 * 0.5 * 0.4 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn always_winning_coordinate_gives_unit_gamma() {
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.3)).unwrap();
        let bits = || vec!["0".to_string(), "1".to_string()];
        let trivial = Game::from_fn(bits(), bits(), bits(), bits(), vec![0.25; 4], |_, _, _, _| true).unwrap();
        let g_triv = anchor_game(&trivial, &AnchorSpec::new(AnchorSide::Y, 0.3)).unwrap();
        let s = product_strategy(&g_triv, 2, vec![0, 1], vec![1, 0, 0]);
        let an = conditioned_state(&g_triv, &s, &[0], 2).unwrap();
        assert!((an.pr_success - 1.0).abs() < 1e-12);
        assert!(an.dg_blocks.iter().all(|b| (b.gamma - 1.0).abs() < 1e-12));
        assert!(an.info_x.iter().chain(&an.info_y).all(|&v| v.abs() < 1e-9));
        assert!(conditioned_state(&g, &s, &[2], 2).is_err());
    }
}
