//! Local unitaries that move the conditioned state at Y_i = y* to the
//! conditioned state at (x_i, y_i), for a coordinate i outside C.
//!
//! The conditioning value r_i collects the inputs and answers on C and
//! (D_j, G_j) for every j ≠ i. Inputs outside C are purified with mirror
//! registers, so the state at (x_i, y_i, r_i) is
//!
//! |x_i x_i⟩|y_i y_i⟩ ⊗ Σ_{rest} √(Π_j P(x_j y_j | d_j g_j)) |x_j x_j y_j y_j⟩ ⊗ |φ̃_{x y a_C b_C}⟩
//!
//! normalized, where "rest" ranges over coordinates outside C other than i.
//! Alice holds the X registers, their mirrors, her answers outside C and her
//! environment; Bob holds the rest.

use serde::{Deserialize, Serialize};

use super::conditioned::ConditionedAnalysis;
use super::{BreakerError, Result};
use crate::distrib::Radix;
use crate::qmath::linalg::{c, identity, CMatrix, CVector, ZERO};
use crate::qmath::uhlmann::apply_on_complement;
use crate::qmath::{uhlmann_unitary, HilbertSpace, PureState, MAX_DIM};

/// Vectors with squared norm at or below this are treated as undefined
/// conditional states.
const UNDEFINED: f64 = 1e-20;
/// Distance charged when a conditional state does not exist.
const UNDEFINED_DISTANCE: f64 = 2.0;

/// One conditioning value r_i with the unnormalized states u(x_i, y, r_i).
#[derive(Debug, Clone)]
pub struct RepairContext {
    /// Canonical labels of r_i, sorted.
    pub labels: Vec<String>,
    /// Π_{j≠i} P(d_j g_j) · Π_{j∈C} P(x_j y_j | d_j g_j).
    pub prefactor: f64,
    /// `branches[x_i][y]`, zero when (x_i, y) cannot produce r_i.
    pub branches: Vec<Vec<CVector>>,
}

#[derive(Debug, Clone)]
pub struct RepairSetup {
    pub coordinate: usize,
    pub space: HilbertSpace,
    pub alice: Vec<String>,
    pub bob: Vec<String>,
    pub anchor_index: usize,
    pub contexts: Vec<RepairContext>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairTerm {
    pub x_i: String,
    pub y_i: String,
    pub r_i: Vec<String>,
    /// P(x_i, y_i, r_i | E).
    pub weight: f64,
    /// ‖(U_x ⊗ U_y)φ_{y* r_i} − φ_{x_i y_i r_i}‖₁.
    pub distance: f64,
    /// ‖(I ⊗ U_y)φ_{x_i y* r_i} − φ_{x_i y_i r_i}‖₁.
    pub y_term: f64,
    /// ‖(U_x ⊗ I)φ_{y* r_i} − φ_{x_i y* r_i}‖₁.
    pub x_term: f64,
}

/// A unitary on one player's registers, keyed by r_i and that player's input.
#[derive(Debug, Clone)]
pub struct KeyedUnitary {
    pub r_i: Vec<String>,
    pub input: String,
    pub unitary: CMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairReport {
    pub coordinate: usize,
    /// Expected repair distance under P(x_i, y_i, r_i | E).
    pub distance: f64,
    pub y_term: f64,
    pub x_term: f64,
    /// Σ P(x_i, y_i, r_i, E); equals Pr[E].
    pub total_weight: f64,
    pub terms: Vec<RepairTerm>,
    #[serde(skip)]
    pub unitaries_x: Vec<KeyedUnitary>,
    #[serde(skip)]
    pub unitaries_y: Vec<KeyedUnitary>,
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// 2·√(1 − |⟨a|b⟩|²) for unit vectors, in a cancellation-free form.
fn pure_distance(a: &CVector, b: &CVector) -> f64 {
    let ov = a.dotc(b);
    2.0 * (b - a * ov).norm()
}

/// Enumerates the conditioning values r_i and builds the purified states.
pub fn repair_setup(analysis: &ConditionedAnalysis, i: usize) -> Result<RepairSetup> {
    let joint = analysis.joint.as_ref().ok_or(BreakerError::NoAnchor)?;
    let (k, d) = (analysis.k, analysis.dim);
    if i >= k || analysis.coords.contains(&i) {
        return Err(BreakerError::InvalidArgument(format!(
            "coordinate {i} must be below {k} and outside {:?}",
            analysis.coords
        )));
    }
    let game = &analysis.game;
    let (nx, ny, na, nb) = game.sizes();
    let anchor_index = game
        .y_labels()
        .iter()
        .position(|l| *l == joint.anchor)
        .ok_or(BreakerError::NoAnchor)?;
    let coords = &analysis.coords;
    let cbar: Vec<usize> = (0..k).filter(|j| !coords.contains(j)).collect();
    let rest: Vec<usize> = cbar.iter().copied().filter(|&j| j != i).collect();
    let m = cbar.len() as u32;
    let (nabar, nbbar) = (na.pow(m), nb.pow(m));
    let dim_alice = (nx * nx).pow(m) * nabar * d;
    let dim_bob = (ny * ny).pow(m) * nbbar * d;
    let total = dim_alice.saturating_mul(dim_bob);
    if total > MAX_DIM {
        return Err(BreakerError::SizeGuard(total));
    }
    let mut alice: Vec<(String, usize)> = Vec::new();
    let mut bob: Vec<(String, usize)> = Vec::new();
    for &j in &cbar {
        alice.push((format!("X{j}"), nx));
        alice.push((format!("X{j}~"), nx));
        bob.push((format!("Y{j}"), ny));
        bob.push((format!("Y{j}~"), ny));
    }
    alice.push(("Abar".into(), nabar));
    alice.push(("EA".into(), d));
    bob.push(("Bbar".into(), nbbar));
    bob.push(("EB".into(), d));
    let pairs: Vec<(&str, usize)> = alice.iter().chain(&bob).map(|(n, s)| (n.as_str(), *s)).collect();
    let space = HilbertSpace::of(&pairs)?;

    // Joint tables over the game's label order.
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
    let p_cond = |dg: usize, x: usize, y: usize| cond[dg][x * ny + y_map[y]];

    let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
    let dg_values: Vec<usize> = (0..2 * ng).filter(|&v| dgm[v] > 0.0).collect();
    let r_dg = Radix::new(&vec![dg_values.len(); others.len()]);
    let nc = coords.len();
    let r_xc = Radix::new(&vec![nx; nc]);
    let r_yc = Radix::new(&vec![ny; nc]);
    let r_ac = Radix::new(&vec![na; nc]);
    let r_bc = Radix::new(&vec![nb; nc]);
    let r_xrest = Radix::new(&vec![nx; rest.len()]);
    let r_yrest = Radix::new(&vec![ny; rest.len()]);
    let r_abar = Radix::new(&vec![na; cbar.len()]);
    let r_bbar = Radix::new(&vec![nb; cbar.len()]);
    let r_full_x = Radix::new(&vec![nx; k]);
    let r_full_y = Radix::new(&vec![ny; k]);
    let r_full_a = Radix::new(&vec![na; k]);
    let r_full_b = Radix::new(&vec![nb; k]);
    let ky = r_full_y.len();
    let kb = r_full_b.len();

    let mut contexts = Vec::new();
    for dg_flat in 0..r_dg.len() {
        let dg_idx = r_dg.digits(dg_flat);
        let mut dg = vec![usize::MAX; k];
        for (slot, &j) in others.iter().enumerate() {
            dg[j] = dg_values[dg_idx[slot]];
        }
        let p_dg: f64 = others.iter().map(|&j| dgm[dg[j]]).product();
        for xc_flat in 0..r_xc.len() {
            let xc = r_xc.digits(xc_flat);
            for yc_flat in 0..r_yc.len() {
                let yc = r_yc.digits(yc_flat);
                let p_c: f64 = coords
                    .iter()
                    .enumerate()
                    .map(|(s, &j)| p_cond(dg[j], xc[s], yc[s]))
                    .product();
                if p_c <= 0.0 {
                    continue;
                }
                for ac_flat in 0..r_ac.len() {
                    let ac = r_ac.digits(ac_flat);
                    for bc_flat in 0..r_bc.len() {
                        let bc = r_bc.digits(bc_flat);
                        let wins = coords
                            .iter()
                            .enumerate()
                            .all(|(s, _)| game.wins(xc[s], yc[s], ac[s], bc[s]));
                        if !wins {
                            continue;
                        }
                        let mut branches = vec![vec![CVector::from_element(space.dim(), ZERO); ny]; nx];
                        let mut any = false;
                        for xi in 0..nx {
                            for yi in 0..ny {
                                let u = &mut branches[xi][yi];
                                for xr_flat in 0..r_xrest.len() {
                                    let xr = r_xrest.digits(xr_flat);
                                    for yr_flat in 0..r_yrest.len() {
                                        let yr = r_yrest.digits(yr_flat);
                                        let coef: f64 = rest
                                            .iter()
                                            .enumerate()
                                            .map(|(s, &j)| p_cond(dg[j], xr[s], yr[s]).sqrt())
                                            .product();
                                        if coef <= 0.0 {
                                            continue;
                                        }
                                        let mut xf = vec![0; k];
                                        let mut yf = vec![0; k];
                                        for (s, &j) in coords.iter().enumerate() {
                                            xf[j] = xc[s];
                                            yf[j] = yc[s];
                                        }
                                        for (s, &j) in rest.iter().enumerate() {
                                            xf[j] = xr[s];
                                            yf[j] = yr[s];
                                        }
                                        xf[i] = xi;
                                        yf[i] = yi;
                                        let src = &analysis.amplitudes[r_full_x.flat(&xf) * ky + r_full_y.flat(&yf)];
                                        let xx = cbar.iter().fold(0, |acc, &j| acc * nx * nx + xf[j] * nx + xf[j]);
                                        let yy = cbar.iter().fold(0, |acc, &j| acc * ny * ny + yf[j] * ny + yf[j]);
                                        for abar in 0..nabar {
                                            let ad = r_abar.digits(abar);
                                            let mut af = vec![0; k];
                                            for (s, &j) in coords.iter().enumerate() {
                                                af[j] = ac[s];
                                            }
                                            for (s, &j) in cbar.iter().enumerate() {
                                                af[j] = ad[s];
                                            }
                                            let a = r_full_a.flat(&af);
                                            for bbar in 0..nbbar {
                                                let bd = r_bbar.digits(bbar);
                                                let mut bf = vec![0; k];
                                                for (s, &j) in coords.iter().enumerate() {
                                                    bf[j] = bc[s];
                                                }
                                                for (s, &j) in cbar.iter().enumerate() {
                                                    bf[j] = bd[s];
                                                }
                                                let b = r_full_b.flat(&bf);
                                                for ea in 0..d {
                                                    for eb in 0..d {
                                                        let from = ((a * d + ea) * kb + b) * d + eb;
                                                        let ai = (xx * nabar + abar) * d + ea;
                                                        let bi = (yy * nbbar + bbar) * d + eb;
                                                        u[ai * dim_bob + bi] = src[from] * c(coef);
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                                any |= u.norm_squared() > UNDEFINED;
                            }
                        }
                        if !any {
                            continue;
                        }
                        let mut labels = Vec::new();
                        for (s, &j) in coords.iter().enumerate() {
                            labels.push(format!("x{j}={}", game.x_labels()[xc[s]]));
                            labels.push(format!("y{j}={}", game.y_labels()[yc[s]]));
                            labels.push(format!("a{j}={}", game.a_labels()[ac[s]]));
                            labels.push(format!("b{j}={}", game.b_labels()[bc[s]]));
                        }
                        for &j in &others {
                            labels.push(format!("d{j}={}", dg[j] / ng));
                            labels.push(format!("g{j}={}", g_axis.labels[dg[j] % ng]));
                        }
                        labels.sort();
                        contexts.push(RepairContext {
                            labels,
                            prefactor: p_dg * p_c,
                            branches,
                        });
                    }
                }
            }
        }
    }
    Ok(RepairSetup {
        coordinate: i,
        space,
        alice: alice.into_iter().map(|(n, _)| n).collect(),
        bob: bob.into_iter().map(|(n, _)| n).collect(),
        anchor_index,
        contexts,
    })
}

/// Solver for max_U |⟨ψ|(I ⊗ U)|φ⟩| with U on the complement of `fixed`.
pub type UnitarySolver<'a> = dyn Fn(&PureState, &PureState, &[&str]) -> Result<CMatrix> + 'a;

fn svd_solver(psi: &PureState, phi: &PureState, fixed: &[&str]) -> Result<CMatrix> {
    Ok(uhlmann_unitary(psi, phi, fixed)?.unitary)
}

/// Repair unitaries from SVD-based Uhlmann, with the achieved distances.
pub fn repair_unitaries(analysis: &ConditionedAnalysis, i: usize) -> Result<RepairReport> {
    repair_with(analysis, i, &svd_solver)
}

/// Same as [`repair_unitaries`] with a caller-supplied unitary solver.
pub fn repair_with(analysis: &ConditionedAnalysis, i: usize, solver: &UnitarySolver) -> Result<RepairReport> {
    let setup = repair_setup(analysis, i)?;
    let game = &analysis.game;
    let (nx, ny, _, _) = game.sizes();
    let star = setup.anchor_index;
    let alice = strs(&setup.alice);
    let bob = strs(&setup.bob);
    let dim_alice: usize = setup.alice.iter().map(|n| setup.space.factor_dim(n).unwrap()).product();
    let dim_bob = setup.space.dim() / dim_alice;
    let normalized = |v: &CVector| -> Option<PureState> {
        let n2 = v.norm_squared();
        (n2 > UNDEFINED).then(|| PureState::new(setup.space.clone(), v / c(n2.sqrt())).expect("unit vector"))
    };

    let mut report = RepairReport {
        coordinate: i,
        distance: 0.0,
        y_term: 0.0,
        x_term: 0.0,
        total_weight: 0.0,
        terms: Vec::new(),
        unitaries_x: Vec::new(),
        unitaries_y: Vec::new(),
    };
    for ctx in &setup.contexts {
        // φ_{y r_i} = Σ_x √q(x, y)·u(x, y, r_i), normalized.
        let averaged: Vec<Option<PureState>> = (0..ny)
            .map(|y| {
                let mut v = CVector::from_element(setup.space.dim(), ZERO);
                for x in 0..nx {
                    v += &ctx.branches[x][y] * c(game.q_at(x, y).sqrt());
                }
                normalized(&v)
            })
            .collect();
        let fixed_x: Vec<Option<PureState>> = (0..nx).map(|x| normalized(&ctx.branches[x][star])).collect();
        let phi_star = &averaged[star];

        let mut u_y = Vec::with_capacity(ny);
        for (y, target) in averaged.iter().enumerate() {
            let u = match (target, phi_star) {
                (Some(t), Some(s)) => solver(t, s, &alice)?,
                _ => identity(dim_bob),
            };
            report.unitaries_y.push(KeyedUnitary {
                r_i: ctx.labels.clone(),
                input: game.y_labels()[y].clone(),
                unitary: u.clone(),
            });
            u_y.push(u);
        }
        let mut u_x = Vec::with_capacity(nx);
        for (x, target) in fixed_x.iter().enumerate() {
            let u = match (target, phi_star) {
                (Some(t), Some(s)) => solver(t, s, &bob)?,
                _ => identity(dim_alice),
            };
            report.unitaries_x.push(KeyedUnitary {
                r_i: ctx.labels.clone(),
                input: game.x_labels()[x].clone(),
                unitary: u.clone(),
            });
            u_x.push(u);
        }

        for x in 0..nx {
            for y in 0..ny {
                let w = game.q_at(x, y) * ctx.prefactor * ctx.branches[x][y].norm_squared();
                let Some(target) = normalized(&ctx.branches[x][y]) else { continue };
                let (distance, y_term, x_term) = match phi_star {
                    None => (UNDEFINED_DISTANCE, UNDEFINED_DISTANCE, UNDEFINED_DISTANCE),
                    Some(s) => {
                        let after_y = apply_on_complement(s, &alice, &u_y[y])?;
                        let after_y = PureState::new(setup.space.clone(), after_y)?;
                        let both = apply_on_complement(&after_y, &bob, &u_x[x])?;
                        let distance = pure_distance(&both, target.vector());
                        let after_x = apply_on_complement(s, &bob, &u_x[x])?;
                        let (y_term, x_term) = match &fixed_x[x] {
                            Some(fx) => {
                                let moved = apply_on_complement(fx, &alice, &u_y[y])?;
                                (
                                    pure_distance(&moved, target.vector()),
                                    pure_distance(&after_x, fx.vector()),
                                )
                            }
                            None => (UNDEFINED_DISTANCE, UNDEFINED_DISTANCE),
                        };
                        (distance, y_term, x_term)
                    }
                };
                report.total_weight += w;
                report.terms.push(RepairTerm {
                    x_i: game.x_labels()[x].clone(),
                    y_i: game.y_labels()[y].clone(),
                    r_i: ctx.labels.clone(),
                    weight: w,
                    distance,
                    y_term,
                    x_term,
                });
            }
        }
    }
    let total = report.total_weight;
    if total > 0.0 {
        for t in report.terms.iter_mut() {
            t.weight /= total;
        }
    }
    report.distance = report.terms.iter().map(|t| t.weight * t.distance).sum();
    report.y_term = report.terms.iter().map(|t| t.weight * t.y_term).sum();
    report.x_term = report.terms.iter().map(|t| t.weight * t.x_term).sum();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::breaker::conditioned_state;
    use crate::games::{anchor_game, AnchorSide, AnchorSpec, EntangledStrategy, Game};
    use crate::qmath::Povm;

    fn input_blind(game: &Game, k: usize) -> EntangledStrategy {
        // Shares |Φ+⟩ and measures Z regardless of inputs.
        let rep = crate::games::repeat_game(game, k).unwrap();
        let (kx, ky, ka, kb) = rep.sizes();
        let sp = EntangledStrategy::local_space(2).unwrap();
        let z = |outcomes: usize| {
            let mut els = vec![CMatrix::zeros(2, 2); outcomes];
            els[0][(0, 0)] = c(1.0);
            els[outcomes - 1][(1, 1)] = c(1.0);
            Povm::new(sp.clone(), els).unwrap()
        };
        let h = 1.0 / 2f64.sqrt();
        let state = PureState::new(
            HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap(),
            CVector::from_vec(vec![c(h), ZERO, ZERO, c(h)]),
        )
        .unwrap();
        EntangledStrategy {
            dim: 2,
            state,
            alice: vec![z(ka); kx],
            bob: vec![z(kb); ky],
        }
    }

    #[test]
    fn input_blind_strategy_needs_no_repair() {
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.2)).unwrap();
        let s = input_blind(&g, 2);
        let an = conditioned_state(&g, &s, &[1], 2).unwrap();
        let rep = repair_unitaries(&an, 0).unwrap();
        assert!((rep.total_weight - an.pr_success).abs() < 1e-9);
        assert!(rep.distance < 1e-7, "{}", rep.distance);
        assert!(rep.y_term < 1e-7 && rep.x_term < 1e-7);
    }

    #[test]
    fn coordinate_checks() {
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.2)).unwrap();
        let s = input_blind(&g, 2);
        let an = conditioned_state(&g, &s, &[1], 2).unwrap();
        assert!(matches!(repair_unitaries(&an, 1), Err(BreakerError::InvalidArgument(_))));
        let plain = input_blind(&Game::chsh(), 1);
        let an = conditioned_state(&Game::chsh(), &plain, &[], 1).unwrap();
        assert!(matches!(repair_unitaries(&an, 0), Err(BreakerError::NoAnchor)));
    }
}
