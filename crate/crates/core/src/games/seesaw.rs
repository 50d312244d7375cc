//! See-saw lower bounds on the entangled value at a fixed local dimension.
//!
//! With the shared state written as a d×d amplitude matrix M (ψ_{ij} = M_ij),
//! ⟨ψ|A ⊗ B|ψ⟩ = Tr(M†·A·M·Bᵀ). Each round best-responds Alice's measurements
//! to Bob's and the state, then Bob's, then replaces the state by the
//! principal eigenvector of the win operator Σ q·V·A ⊗ B.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EntangledStrategy, Game, GameError, Result};
use crate::qmath::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::qmath::{random, HilbertSpace, Povm, PureState};
use crate::rng;

/// Inner iterations of the multi-outcome response.
const RESPONSE_ITERS: usize = 200;
/// Relative gain below which the response iteration stops.
const RESPONSE_STALL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub dim: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            dim: 2,
            restarts: 20,
            max_iters: 500,
            tol: 1e-9,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// Value of `strategy` re-evaluated exactly.
    pub value: f64,
    pub strategy: EntangledStrategy,
    /// Objective before the first round and after each round of the best restart.
    pub trace: Vec<f64>,
    /// False when the best restart stopped at `max_iters`.
    pub converged: bool,
    pub best_restart: usize,
}

type Measurements = Vec<Vec<CMatrix>>;

pub(crate) fn state_matrix(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

fn povm_elements(p: &[Povm]) -> Measurements {
    p.iter().map(|m| m.elements().to_vec()).collect()
}

/// Σ_{ij} L_ij·B_ij = Tr(L·Bᵀ).
fn pair_trace(l: &CMatrix, b: &CMatrix) -> f64 {
    l.iter().zip(b.iter()).map(|(x, y)| (x * y).re).sum()
}

pub(crate) fn objective(game: &Game, m: &CMatrix, alice: &[Povm], bob: &[Povm]) -> f64 {
    objective_raw(game, m, &povm_elements(alice), &povm_elements(bob))
}

fn objective_raw(game: &Game, m: &CMatrix, alice: &Measurements, bob: &Measurements) -> f64 {
    let (nx, ny, na, nb) = game.sizes();
    let mut total = 0.0;
    for x in 0..nx {
        let lifted: Vec<CMatrix> = alice[x].iter().map(|a| m.adjoint() * a * m).collect();
        for y in 0..ny {
            let q = game.q_at(x, y);
            if q == 0.0 {
                continue;
            }
            for a in 0..na {
                for b in 0..nb {
                    if game.wins(x, y, a, b) {
                        total += q * pair_trace(&lifted[a], &bob[y][b]);
                    }
                }
            }
        }
    }
    total
}

/// Σ_a Tr(Π_a·W_a).
fn response_value(w: &[CMatrix], p: &[CMatrix]) -> f64 {
    w.iter().zip(p).map(|(w, p)| (w * p).trace().re).sum()
}

/// POVM maximizing Σ_a Tr(Π_a·W_a) for PSD W_a. Two outcomes use the
/// projector onto the positive part of W_0 − W_1; more outcomes iterate
/// Π_a ← Λ^{-1/2}·W_aΠ_aW_a·Λ^{-1/2} with Λ = Σ_a W_aΠ_aW_a until the value
/// stops improving, never returning something worse than `current`.
fn best_povm(w: &[CMatrix], current: &[CMatrix]) -> Vec<CMatrix> {
    let d = w[0].nrows();
    match w.len() {
        1 => vec![linalg::identity(d)],
        2 => {
            let (vals, vecs) = linalg::eigh(&(&w[0] - &w[1]));
            let mask: Vec<f64> = vals.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
            let p = linalg::from_spectrum(&mask, &vecs);
            let q = linalg::identity(d) - &p;
            vec![p, q]
        }
        _ => {
            let mut best_val = response_value(w, current);
            let mut best = current.to_vec();
            let mut p = current.to_vec();
            for _ in 0..RESPONSE_ITERS {
                let parts: Vec<CMatrix> = w.iter().zip(&p).map(|(w, p)| w * p * w).collect();
                let lambda = parts.iter().fold(CMatrix::zeros(d, d), |acc, x| acc + x);
                let (vals, vecs) = linalg::eigh(&lambda);
                let top = vals.last().copied().unwrap_or(0.0);
                if !(top > 0.0) {
                    break;
                }
                let cut = 1e-12 * top;
                let inv: Vec<f64> = vals.iter().map(|&v| if v > cut { 1.0 / v.sqrt() } else { 0.0 }).collect();
                let kernel: Vec<f64> = vals.iter().map(|&v| if v > cut { 0.0 } else { 1.0 }).collect();
                let s = linalg::from_spectrum(&inv, &vecs);
                let rest = linalg::from_spectrum(&kernel, &vecs);
                let mut next: Vec<CMatrix> = parts.iter().map(|x| linalg::hermitian_part(&(&s * x * &s))).collect();
                let sink = (0..w.len())
                    .max_by(|&i, &j| (&w[i] * &rest).trace().re.total_cmp(&(&w[j] * &rest).trace().re))
                    .unwrap_or(0);
                next[sink] += &rest;
                p = next;
                let v = response_value(w, &p);
                if v > best_val {
                    let stalled = v - best_val <= RESPONSE_STALL * v.abs().max(1.0);
                    best_val = v;
                    best = p.clone();
                    if stalled {
                        break;
                    }
                } else {
                    break;
                }
            }
            best
        }
    }
}

/// Effective operators W_{x,a} = Σ_y q·Σ_b V·M·B_bᵀ·M† seen by Alice.
fn alice_operators(game: &Game, m: &CMatrix, bob: &Measurements) -> Vec<Vec<CMatrix>> {
    let (nx, ny, na, nb) = game.sizes();
    let d = m.nrows();
    let pushed: Vec<Vec<CMatrix>> = bob
        .iter()
        .map(|ps| ps.iter().map(|b| m * b.transpose() * m.adjoint()).collect())
        .collect();
    (0..nx)
        .map(|x| {
            (0..na)
                .map(|a| {
                    let mut w = CMatrix::zeros(d, d);
                    for y in 0..ny {
                        let q = game.q_at(x, y);
                        for b in 0..nb {
                            if q > 0.0 && game.wins(x, y, a, b) {
                                w += &pushed[y][b] * c(q);
                            }
                        }
                    }
                    linalg::hermitian_part(&w)
                })
                .collect()
        })
        .collect()
}

/// Effective operators W_{y,b} = Σ_x q·Σ_a V·(M†·A_a·M)ᵀ seen by Bob.
fn bob_operators(game: &Game, m: &CMatrix, alice: &Measurements) -> Vec<Vec<CMatrix>> {
    let (nx, ny, na, nb) = game.sizes();
    let d = m.nrows();
    let pulled: Vec<Vec<CMatrix>> = alice
        .iter()
        .map(|ps| ps.iter().map(|a| (m.adjoint() * a * m).transpose()).collect())
        .collect();
    (0..ny)
        .map(|y| {
            (0..nb)
                .map(|b| {
                    let mut w = CMatrix::zeros(d, d);
                    for x in 0..nx {
                        let q = game.q_at(x, y);
                        for a in 0..na {
                            if q > 0.0 && game.wins(x, y, a, b) {
                                w += &pulled[x][a] * c(q);
                            }
                        }
                    }
                    linalg::hermitian_part(&w)
                })
                .collect()
        })
        .collect()
}

/// Principal eigenvector of Σ_{x,a} A_a^x ⊗ (Σ_{y,b} q·V·B_b^y).
fn best_state(game: &Game, alice: &Measurements, bob: &Measurements, d: usize) -> CVector {
    let (nx, ny, na, nb) = game.sizes();
    let mut omega = CMatrix::zeros(d * d, d * d);
    for x in 0..nx {
        for a in 0..na {
            let mut side = CMatrix::zeros(d, d);
            for y in 0..ny {
                let q = game.q_at(x, y);
                for b in 0..nb {
                    if q > 0.0 && game.wins(x, y, a, b) {
                        side += &bob[y][b] * c(q);
                    }
                }
            }
            omega += linalg::kron(&alice[x][a], &side);
        }
    }
    let (_, vecs) = linalg::eigh(&omega);
    vecs.column(d * d - 1).into_owned()
}

struct Run {
    value: f64,
    m: CVector,
    alice: Measurements,
    bob: Measurements,
    trace: Vec<f64>,
    converged: bool,
}

fn run_restart(game: &Game, cfg: &SeesawConfig, restart: usize) -> Result<Run> {
    let (nx, ny, na, nb) = game.sizes();
    let d = cfg.dim;
    let mut r = rng::stream(cfg.seed, restart as u64);
    let local = HilbertSpace::of(&[("A", d)])?;
    let pair = HilbertSpace::of(&[("A", d), ("B", d)])?;
    let mut alice: Measurements = (0..nx)
        .map(|_| random::projective(&local, na, &mut r).elements().to_vec())
        .collect();
    let mut bob: Measurements = (0..ny)
        .map(|_| random::projective(&local, nb, &mut r).elements().to_vec())
        .collect();
    let mut psi = random::pure(&pair, &mut r).vector().clone();
    let mut value = objective_raw(game, &state_matrix(&psi, d), &alice, &bob);
    let mut trace = vec![value];
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let m = state_matrix(&psi, d);
        let wa = alice_operators(game, &m, &bob);
        alice = wa.iter().zip(&alice).map(|(w, cur)| best_povm(w, cur)).collect();
        let wb = bob_operators(game, &m, &alice);
        bob = wb.iter().zip(&bob).map(|(w, cur)| best_povm(w, cur)).collect();
        let candidate = best_state(game, &alice, &bob, d);
        let with_old = objective_raw(game, &m, &alice, &bob);
        let with_new = objective_raw(game, &state_matrix(&candidate, d), &alice, &bob);
        let next = if with_new >= with_old {
            psi = candidate;
            with_new
        } else {
            with_old
        };
        trace.push(next);
        let gain = next - value;
        value = next;
        if gain.abs() <= cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(Run {
        value,
        m: psi,
        alice,
        bob,
        trace,
        converged,
    })
}

/// Best of `restarts` independent see-saw runs; restart r draws its
/// initialization from stream r of `seed`, and ties go to the lowest index.
pub fn entangled_value_seesaw(game: &Game, cfg: &SeesawConfig) -> Result<SeesawResult> {
    if cfg.dim == 0 || cfg.restarts == 0 {
        return Err(GameError::ParamRange("dimension and restarts must be positive".into()));
    }
    if cfg.dim * cfg.dim > crate::qmath::MAX_DIM {
        return Err(GameError::ParamRange(format!("dimension {} too large", cfg.dim)));
    }
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(game, cfg, r))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = i;
        }
    }
    let run = runs.into_iter().nth(best).expect("at least one restart");
    let d = cfg.dim;
    let local = HilbertSpace::of(&[("A", d)])?;
    let pair = HilbertSpace::of(&[("A", d), ("B", d)])?;
    let to_povm = |ms: Measurements| -> Vec<Povm> {
        ms.into_iter()
            .map(|els| Povm::from_parts_unchecked(local.clone(), els))
            .collect()
    };
    let norm = run.m.norm();
    let state = PureState::from_parts_unchecked(pair, run.m.map(|z| if norm > 0.0 { z / norm } else { ZERO }));
    let strategy = EntangledStrategy {
        dim: d,
        state,
        alice: to_povm(run.alice),
        bob: to_povm(run.bob),
    };
    let value = super::strategy_value(game, &super::Strategy::Entangled(strategy.clone()))?;
    Ok(SeesawResult {
        value,
        strategy,
        trace: run.trace,
        converged: run.converged,
        best_restart: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_reaches_tsirelson() {
        let r = entangled_value_seesaw(&Game::chsh(), &SeesawConfig::default()).unwrap();
        let target = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((r.value - target).abs() < 5e-4, "{}", r.value);
        for w in r.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
    }

    #[test]
    fn one_dimension_is_classical() {
        let cfg = SeesawConfig {
            dim: 1,
            ..SeesawConfig::default()
        };
        let r = entangled_value_seesaw(&Game::chsh(), &cfg).unwrap();
        assert!((r.value - 0.75).abs() < 1e-9);
    }
}
