//! Independent reference computations shared by integration tests.

use anchorlab::breaker::BreakerError;
use anchorlab::distrib::{Axis, FiniteDistribution};
use anchorlab::games::{repeat_game, EntangledStrategy};
use anchorlab::qmath::linalg::{c, expi_hermitian, identity, kron, CMatrix};
use anchorlab::qmath::PureState;
use anchorlab::Game;
use num_complex::Complex64;

/// Amplitudes as a (fixed × complement) matrix.
fn split(state: &PureState, fixed: &[&str]) -> CMatrix {
    let names: Vec<String> = state.space().names().iter().map(|s| s.to_string()).collect();
    let mut order: Vec<&str> = fixed.to_vec();
    order.extend(names.iter().map(String::as_str).filter(|n| !fixed.contains(n)));
    let r = state.reorder(&order).unwrap();
    let df: usize = fixed.iter().map(|n| state.space().factor_dim(n).unwrap()).product();
    let dc = state.space().dim() / df;
    CMatrix::from_fn(df, dc, |i, j| r.vector()[i * dc + j])
}

/// Unitary U on the complement of `fixed` maximizing |⟨ψ|(I ⊗ U)|φ⟩|,
/// found by backtracking ascent along U ← U·exp(iηA) from the identity.
/// The objective is |Tr(U·Mᵀ)| with M = Ψ†Φ; A is its Riemannian gradient.
pub fn gradient_solver(psi: &PureState, phi: &PureState, fixed: &[&str]) -> Result<CMatrix, BreakerError> {
    let m_t = (split(psi, fixed).adjoint() * split(phi, fixed)).transpose();
    let n = m_t.nrows();
    let value = |u: &CMatrix| -> Complex64 { (u * &m_t).trace() };
    let mut u = identity(n);
    let mut z = value(&u);
    let mut eta = 1.0;
    for _ in 0..20_000 {
        let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { c(1.0) };
        let nn = &m_t * &u * phase;
        let a = (&nn - nn.adjoint()) * Complex64::new(0.0, 0.5);
        if a.norm() < 1e-14 {
            break;
        }
        loop {
            let cand = &u * expi_hermitian(&(&a * c(eta)));
            let zc = value(&cand);
            if zc.norm() > z.norm() {
                u = cand;
                z = zc;
                eta *= 1.5;
                break;
            }
            eta *= 0.5;
            if eta < 1e-12 {
                break;
            }
        }
        if eta < 1e-12 {
            break;
        }
    }
    Ok(u)
}

/// Monte-Carlo estimate of Pr[win every coordinate in `coords`] with its
/// standard error. Answers are drawn from ⟨ψ|A_a ⊗ B_b|ψ⟩.
pub fn monte_carlo_success(
    game: &Game,
    strategy: &EntangledStrategy,
    coords: &[usize],
    k: usize,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let rep = repeat_game(game, k).unwrap();
    let (_, ky, ka, kb) = rep.sizes();
    let (nx, ny, na, nb) = game.sizes();
    let digits = |mut v: usize, n: usize| -> Vec<usize> {
        let mut d = vec![0; k];
        for slot in (0..k).rev() {
            d[slot] = v % n;
            v /= n;
        }
        d
    };
    let mut rng = anchorlab::rng::stream(seed, 0);
    let inputs = rep.q().sample_indices(samples, &mut rng);
    let mut counts = vec![0usize; rep.q().len()];
    for i in inputs {
        counts[i] += 1;
    }
    let rho = strategy.state.density();
    let answers = vec![Axis::range("AB", ka * kb)];
    let mut wins = 0usize;
    for (xy, &n) in counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let (x, y) = (xy / ky, xy % ky);
        let mut probs = Vec::with_capacity(ka * kb);
        for a in 0..ka {
            for b in 0..kb {
                let op = kron(&strategy.alice[x].elements()[a], &strategy.bob[y].elements()[b]);
                probs.push(rho.expectation(&op).max(0.0));
            }
        }
        let dist = FiniteDistribution::from_masses(answers.clone(), probs).unwrap();
        let (xd, yd) = (digits(x, nx), digits(y, ny));
        for ab in dist.sample_indices(n, &mut rng) {
            let (ad, bd) = (digits(ab / kb, na), digits(ab % kb, nb));
            if coords.iter().all(|&j| game.wins(xd[j], yd[j], ad[j], bd[j])) {
                wins += 1;
            }
        }
    }
    let p = wins as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}
