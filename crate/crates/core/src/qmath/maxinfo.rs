//! Upper-bound witnesses for the smooth max-information
//! inf_σ S^ε_∞(ρ_YZ ‖ ρ_Y ⊗ σ_Z).

use super::linalg::{self, c, CMatrix, ONE};
use super::measures::{relative_min_entropy_of_matrices, smooth_min_entropy_witness};
use super::random::ginibre;
use super::state::DensityOperator;
use super::{QmathError, Result};
use crate::rng;

/// Largest Z dimension the search accepts.
pub const MAX_Z_DIM: usize = 4;
const RANDOM_RESTARTS: usize = 8;
const EVAL_BUDGET: usize = 4000;
const RIDGE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MaxInfoWitness {
    /// Best value found; an upper bound on the infimum.
    pub value: f64,
    pub sigma_z: DensityOperator,
    /// Smoothed state achieving `value` when eps > 0.
    pub smoothed: Option<DensityOperator>,
}

/// 2·min(log₂ d_Y, log₂ d_Z).
pub fn dimension_bound(dy: usize, dz: usize) -> f64 {
    2.0 * (dy.min(dz) as f64).log2()
}

struct Problem {
    rho: CMatrix,
    rho_y: CMatrix,
    dz: usize,
}

impl Problem {
    fn sigma_from(&self, params: &[f64]) -> CMatrix {
        let d = self.dz;
        let a = CMatrix::from_fn(d, d, |i, j| {
            num_complex::Complex64::new(params[2 * (i * d + j)], params[2 * (i * d + j) + 1])
        });
        let m = &a * a.adjoint() + linalg::identity(d) * c(RIDGE);
        let t = m.trace().re;
        linalg::hermitian_part(&(m / c(t)))
    }

    fn value(&self, sigma: &CMatrix) -> f64 {
        relative_min_entropy_of_matrices(&self.rho, &linalg::kron(&self.rho_y, sigma))
    }

    fn objective(&self, params: &[f64]) -> f64 {
        self.value(&self.sigma_from(params))
    }
}

/// Row-major (re, im) parameters of A.
fn params_row_major(a: &CMatrix) -> Vec<f64> {
    let d = a.nrows();
    let mut p = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for j in 0..d {
            p.push(a[(i, j)].re);
            p.push(a[(i, j)].im);
        }
    }
    p
}

/// Compass search with step halving.
fn pattern_search(problem: &Problem, mut x: Vec<f64>) -> (Vec<f64>, f64) {
    let mut fx = problem.objective(&x);
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let mut step = 0.25 * scale;
    let mut evals = 0;
    while step > 1e-7 * scale && evals < EVAL_BUDGET {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + dir * step;
                let f = problem.objective(&x);
                evals += 1;
                if f < fx - 1e-13 {
                    fx = f;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Real basis of the d×d Hermitian matrices.
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut e = CMatrix::zeros(d, d);
        e[(i, i)] = ONE;
        out.push(e);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = ONE;
            e[(j, i)] = ONE;
            out.push(e);
            let mut f = CMatrix::zeros(d, d);
            f[(i, j)] = num_complex::Complex64::new(0.0, -1.0);
            f[(j, i)] = num_complex::Complex64::new(0.0, 1.0);
            out.push(f);
        }
    }
    out
}

/// Log-barrier Newton solve of min Tr S subject to K ≤ I ⊗ S, where
/// K = ρ_Y^{-1/2} ρ_YZ ρ_Y^{-1/2} restricted to supp ρ_Y. The optimum has
/// Tr S = 2^{I_max}; iterates stay strictly feasible, so S/Tr S is a valid
/// witness at every stage.
fn barrier_candidate(problem: &Problem) -> Option<CMatrix> {
    let dz = problem.dz;
    let (vals, vecs) = linalg::eigh(&problem.rho_y);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-10).collect();
    let ry = keep.len();
    if ry == 0 {
        return None;
    }
    let p = CMatrix::from_fn(vals.len(), ry, |r, k| vecs[(r, keep[k])] / c(vals[keep[k]].sqrt()));
    let t = linalg::kron(&p, &linalg::identity(dz));
    let k = linalg::hermitian_part(&(t.adjoint() * &problem.rho * &t));
    let m = ry * dz;
    let basis = hermitian_basis(dz);
    let lifted: Vec<CMatrix> = basis.iter().map(|e| linalg::kron(&linalg::identity(ry), e)).collect();
    // Inverse and log-determinant of I ⊗ S − K, or None when not positive definite.
    let slack = |s: &CMatrix| -> Option<(CMatrix, f64)> {
        let a = linalg::hermitian_part(&(linalg::kron(&linalg::identity(ry), s) - &k));
        let ch = a.cholesky()?;
        let logdet = 2.0 * ch.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
        Some((ch.inverse(), logdet))
    };
    let top = linalg::eigvalsh(&k).last().copied().unwrap_or(0.0).max(0.0);
    let mut s = linalg::identity(dz) * c(top + 1.0);
    let mut mu = (top + 1.0) * dz as f64 / m as f64;
    let n = basis.len();
    for _ in 0..80 {
        for _ in 0..60 {
            let (w, logdet) = slack(&s)?;
            let f0 = s.trace().re - mu * logdet;
            let wl: Vec<CMatrix> = lifted.iter().map(|l| &w * l).collect();
            let g = nalgebra::DVector::from_fn(n, |i, _| basis[i].trace().re - mu * wl[i].trace().re);
            let h = nalgebra::DMatrix::from_fn(n, n, |i, j| mu * (&wl[i] * &wl[j]).trace().re);
            let step = h.cholesky()?.solve(&(-&g));
            let decrement = -g.dot(&step);
            if decrement < 1e-14 * (1.0 + f0.abs()) {
                break;
            }
            let dir = basis.iter().zip(step.iter()).fold(CMatrix::zeros(dz, dz), |acc, (e, v)| acc + e * c(*v));
            let mut tstep = 1.0;
            loop {
                let cand = &s + &dir * c(tstep);
                if let Some((_, ld)) = slack(&cand) {
                    if cand.trace().re - mu * ld <= f0 - 0.25 * tstep * decrement {
                        s = cand;
                        break;
                    }
                }
                tstep *= 0.5;
                if tstep < 1e-12 {
                    break;
                }
            }
            if tstep < 1e-12 {
                break;
            }
        }
        if mu * m as f64 <= 1e-12 * s.trace().re {
            break;
        }
        mu *= 0.2;
    }
    let tr = s.trace().re;
    (tr > 0.0).then(|| linalg::hermitian_part(&(s / c(tr))))
}

/// Coarse grid over Z states: the Bloch ball for qubits, diagonal simplices
/// in the computational and ρ_Z eigenbases for qutrits.
fn grid_candidates(dz: usize, rho_z: &CMatrix) -> Vec<CMatrix> {
    let mut out = Vec::new();
    match dz {
        1 => out.push(linalg::identity(1)),
        2 => {
            let pauli = |x: f64, y: f64, z: f64| {
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        c(0.5 * (1.0 + z)),
                        num_complex::Complex64::new(0.5 * x, -0.5 * y),
                        num_complex::Complex64::new(0.5 * x, 0.5 * y),
                        c(0.5 * (1.0 - z)),
                    ],
                )
            };
            for ri in 0..=10 {
                let r = ri as f64 / 10.0 * 0.999;
                for ti in 0..=12 {
                    let th = std::f64::consts::PI * ti as f64 / 12.0;
                    for pi in 0..12 {
                        let ph = 2.0 * std::f64::consts::PI * pi as f64 / 12.0;
                        out.push(pauli(
                            r * th.sin() * ph.cos(),
                            r * th.sin() * ph.sin(),
                            r * th.cos(),
                        ));
                        if ti == 0 || ti == 12 || ri == 0 {
                            break;
                        }
                    }
                }
            }
        }
        3 => {
            let (_, basis) = linalg::eigh(rho_z);
            let steps = 20;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let k = steps - i - j;
                    let p = [i, j, k].map(|v| (v as f64 / steps as f64).max(1e-4));
                    let d = linalg::from_spectrum(&p, &linalg::identity(3));
                    out.push(d.clone() / c(d.trace().re));
                    let e = linalg::from_spectrum(&p, &basis);
                    out.push(e.clone() / c(e.trace().re));
                }
            }
        }
        _ => {}
    }
    out
}

/// Searches for σ_Z minimizing S_∞(ρ_YZ‖ρ_Y ⊗ σ_Z), then smooths at the
/// best candidates when `eps > 0`. Starts from ρ_Z, I/d_Z and eight random
/// points and adds the barrier solution of the underlying convex program;
/// for d_Z ≤ 3 a density-matrix grid is added when `grid` is set.
pub fn max_information_with(
    rho: &DensityOperator,
    y: &[&str],
    z: &[&str],
    eps: f64,
    seed: u64,
    grid: bool,
) -> Result<MaxInfoWitness> {
    if !(eps >= 0.0) {
        return Err(QmathError::InvalidArgument(format!("eps {eps} < 0")));
    }
    if y.is_empty() || z.is_empty() {
        return Err(QmathError::InvalidArgument("empty side of the bipartition".into()));
    }
    let mut order: Vec<&str> = y.to_vec();
    order.extend_from_slice(z);
    let ryz = rho.reduce(&order)?.reorder(&order)?;
    let ry = ryz.reduce(y)?.reorder(y)?;
    let rz = ryz.reduce(z)?.reorder(z)?;
    let dz = rz.dim();
    if dz > MAX_Z_DIM {
        return Err(QmathError::DimensionGuard(dz));
    }
    let problem = Problem {
        rho: ryz.matrix().clone(),
        rho_y: ry.matrix().clone(),
        dz,
    };
    if eps >= 2.0 {
        let sigma = rz.clone();
        let smoothed = ry.tensor(&rz)?;
        return Ok(MaxInfoWitness {
            value: 0.0,
            sigma_z: sigma,
            smoothed: Some(smoothed),
        });
    }

    let mut starts: Vec<Vec<f64>> = vec![
        params_row_major(&linalg::sqrt_psd(rz.matrix())),
        params_row_major(&(linalg::identity(dz) * ONE)),
    ];
    let mut r = rng::stream(seed, 0x6d61_7869);
    for _ in 0..RANDOM_RESTARTS {
        let g = ginibre(dz, dz, &mut r);
        starts.push(params_row_major(&g));
    }
    let mut finals: Vec<(f64, CMatrix)> = starts
        .into_iter()
        .map(|s| {
            let (x, f) = pattern_search(&problem, s);
            (f, problem.sigma_from(&x))
        })
        .collect();
    if let Some(s) = barrier_candidate(&problem) {
        finals.push((problem.value(&s), s));
    }
    if grid && dz <= 3 {
        let best_grid = grid_candidates(dz, rz.matrix())
            .into_iter()
            .map(|s| (problem.value(&s), s))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((f, s)) = best_grid {
            let a = linalg::sqrt_psd(&s);
            let (x, fx) = pattern_search(&problem, params_row_major(&a));
            finals.push((f, s));
            finals.push((fx, problem.sigma_from(&x)));
        }
    }
    finals.sort_by(|a, b| a.0.total_cmp(&b.0));

    let space_z = rz.space().clone();
    if eps == 0.0 {
        let (value, sigma) = finals.swap_remove(0);
        return Ok(MaxInfoWitness {
            value,
            sigma_z: DensityOperator::from_parts_unchecked(space_z, sigma),
            smoothed: None,
        });
    }
    let smoothing = eps.min(1.0 - 1e-9);
    let mut best: Option<MaxInfoWitness> = None;
    for (_, sigma) in finals {
        let sz = DensityOperator::from_parts_unchecked(space_z.clone(), sigma);
        let reference = ry.tensor(&sz)?;
        let w = smooth_min_entropy_witness(&ryz, &reference, smoothing)?;
        if best.as_ref().is_none_or(|b| w.value < b.value) {
            best = Some(MaxInfoWitness {
                value: w.value,
                sigma_z: sz,
                smoothed: Some(w.smoothed),
            });
        }
    }
    best.ok_or(QmathError::WitnessNotFound)
}

/// Smooth max-information witness with the default seed and, for d_Z ≤ 3,
/// the grid fallback whenever the descent lands above the dimension bound.
pub fn max_information(rho: &DensityOperator, y: &[&str], z: &[&str], eps: f64) -> Result<MaxInfoWitness> {
    let w = max_information_with(rho, y, z, eps, 0, false)?;
    let dy: usize = y.iter().map(|n| rho.space().factor_dim(n)).product::<Result<usize>>()?;
    let dz: usize = z.iter().map(|n| rho.space().factor_dim(n)).product::<Result<usize>>()?;
    if w.value > dimension_bound(dy, dz) + 1e-9 && dz <= 3 {
        let g = max_information_with(rho, y, z, eps, 0, true)?;
        if g.value < w.value {
            return Ok(g);
        }
    }
    Ok(w)
}
