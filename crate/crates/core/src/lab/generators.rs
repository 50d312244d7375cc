//! Per-fact generators of hypothesis-satisfying instances.

use rand::Rng;

use super::{BatteryConfig, BreakerCheck, BreakerInstance, FactId, FactInstance, Result};
use crate::distrib::facts::{ClassicalFact, ClassicalInstance};
use crate::distrib::{dirichlet_masses, Axis, Event, FiniteDistribution, Kernel};
use crate::qmath::compression::{compression_measurement, CompressionLayout};
use crate::qmath::facts::{Channel, Matrix, QuantumFact, QuantumInstance};
use crate::qmath::linalg::{c, CVector};
use crate::qmath::maxinfo::max_information;
use crate::qmath::state::{CQState, Operator};
use crate::qmath::{random, DensityOperator, HilbertSpace, PureState};
use crate::rng;

/// Label of the planted anchor in classical instances.
pub const ANCHOR_LABEL: &str = "*";

pub fn generate(fact: FactId, trial: usize, cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<FactInstance> {
    Ok(match fact {
        FactId::Classical(f) => FactInstance::Classical(classical(f, cfg, rng)?),
        FactId::Quantum(f) => FactInstance::Quantum(quantum(f, trial, cfg, rng)?),
        FactId::Breaker(f) => FactInstance::Breaker(breaker(f, cfg, rng)?),
    })
}

fn alphabet(cfg: &BatteryConfig, rng: &mut rng::Rng) -> usize {
    rng.random_range(2..=cfg.max_alphabet)
}

fn random_axes(names: &[&str], cfg: &BatteryConfig, rng: &mut rng::Rng) -> Vec<Axis> {
    names.iter().map(|n| Axis::range(*n, alphabet(cfg, rng))).collect()
}

/// (1 − t)·p + t·r for distributions on the same axes.
fn mix(p: &FiniteDistribution, r: &FiniteDistribution, t: f64) -> Result<FiniteDistribution> {
    let w = p.weights().iter().zip(r.weights()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    Ok(FiniteDistribution::from_masses(p.axes().to_vec(), w)?)
}

/// A random distribution together with a nearby or independent second one.
fn pair(axes: Vec<Axis>, rng: &mut rng::Rng) -> Result<(FiniteDistribution, FiniteDistribution)> {
    let p = FiniteDistribution::random(axes.clone(), rng)?;
    let r = FiniteDistribution::random(axes, rng)?;
    let t = if rng.random_bool(0.5) { rng.random_range(0.0..0.2) } else { 1.0 };
    let q = mix(&p, &r, t)?;
    Ok((p, q))
}

fn random_event(dist: &FiniteDistribution, axes: &[&str], rng: &mut rng::Rng) -> Result<Event> {
    let n: usize = axes.iter().map(|a| dist.axis(a).map(Axis::len)).product::<std::result::Result<usize, _>>()?;
    let bias = rng.random_range(0.2..0.9);
    let mut indicator: Vec<bool> = (0..n).map(|_| rng.random_bool(bias)).collect();
    if !indicator.iter().any(|&b| b) {
        indicator[rng.random_range(0..n)] = true;
    }
    Ok(Event::new(axes.iter().map(|s| s.to_string()).collect(), indicator))
}

fn nonempty_subset<'a>(names: &[&'a str], rng: &mut rng::Rng) -> Vec<&'a str> {
    loop {
        let s: Vec<&str> = names.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// P_XY with P(x, y*) = α·P(x): the anchor label is appended to Y.
fn planted_anchor(cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<FiniteDistribution> {
    let nx = alphabet(cfg, rng);
    let ny = rng.random_range(1..cfg.max_alphabet);
    let alpha = rng.random_range(0.05..0.95);
    let px = FiniteDistribution::random(vec![Axis::range("X", nx)], rng)?;
    let mut labels: Vec<String> = (0..ny).map(|i| i.to_string()).collect();
    labels.push(ANCHOR_LABEL.into());
    let mut w = Vec::with_capacity(nx * (ny + 1));
    for &pxv in px.weights() {
        let r = dirichlet_masses(ny, rng);
        w.extend(r.iter().map(|v| (1.0 - alpha) * pxv * v));
        w.push(alpha * pxv);
    }
    Ok(FiniteDistribution::from_table(vec![Axis::range("X", nx), Axis::new("Y", &labels)], w)?)
}

/// Kernel Z | X, Y interpolating between Z | X and a fully Y-dependent kernel.
fn z_kernel(pxy: &FiniteDistribution, cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<Kernel> {
    let (xa, ya) = (pxy.axes()[0].clone(), pxy.axes()[1].clone());
    let z = Axis::range("Z", alphabet(cfg, rng));
    let by_x = Kernel::random(vec![xa.clone()], vec![z.clone()], rng)?;
    let by_xy = Kernel::random(vec![xa.clone(), ya.clone()], vec![z.clone()], rng)?;
    let s = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0f64).powi(2) };
    let mut rows = Vec::new();
    for x in 0..xa.len() {
        for y in 0..ya.len() {
            let a = by_x.row(x);
            let b = by_xy.row(x * ya.len() + y);
            rows.extend(a.iter().zip(b).map(|(u, v)| (1.0 - s) * u + s * v));
        }
    }
    Ok(Kernel::new(vec![xa, ya], vec![z], rows)?)
}

fn classical(fact: ClassicalFact, cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<ClassicalInstance> {
    Ok(match fact {
        ClassicalFact::MarginalL1 => {
            let n = rng.random_range(1..=3);
            let names = &["X", "Y", "Z"][..n];
            let (p, q) = pair(random_axes(names, cfg, rng), rng)?;
            let keep = nonempty_subset(names, rng).into_iter().map(String::from).collect();
            ClassicalInstance::MarginalL1 { p, q, keep }
        }
        ClassicalFact::EventGap => {
            let n = rng.random_range(1..=3);
            let names = &["X", "Y", "Z"][..n];
            let (p, q) = pair(random_axes(names, cfg, rng), rng)?;
            let on = nonempty_subset(names, rng);
            let event = random_event(&p, &on, rng)?;
            ClassicalInstance::EventGap { p, q, event }
        }
        ClassicalFact::Coupling => {
            let n = alphabet(cfg, rng);
            let axes = vec![Axis::range("X", n), Axis::range("X'", n)];
            let marginal = dirichlet_masses(n, rng);
            let diag: Vec<f64> = (0..n * n).map(|i| if i / n == i % n { marginal[i / n] } else { 0.0 }).collect();
            let diag = FiniteDistribution::from_table(axes.clone(), diag)?;
            let noise = FiniteDistribution::random(axes, rng)?;
            ClassicalInstance::Coupling { joint: mix(&diag, &noise, rng.random_range(0.0..=1.0))? }
        }
        ClassicalFact::CondProb => cond_prob(cfg, rng)?,
        ClassicalFact::Anchor => {
            let pxy = planted_anchor(cfg, rng)?;
            let k = z_kernel(&pxy, cfg, rng)?;
            ClassicalInstance::Anchor { p: pxy.compose(&k)?, anchor: ANCHOR_LABEL.into() }
        }
        ClassicalFact::AnchorCor => {
            let pxy = planted_anchor(cfg, rng)?;
            let k = z_kernel(&pxy, cfg, rng)?;
            let close = pxy.compose(&k)?;
            let noise = FiniteDistribution::random(close.axes().to_vec(), rng)?;
            let t = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.3) };
            ClassicalInstance::AnchorCor { pxy, target: mix(&close, &noise, t)?, anchor: ANCHOR_LABEL.into() }
        }
        ClassicalFact::Holenstein => holenstein(cfg, rng)?,
    })
}

/// P(E) ≥ α > ε ≥ ‖P − Q‖₁ with Q a small perturbation of P.
fn cond_prob(cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<ClassicalInstance> {
    let n = rng.random_range(1..=3);
    let names = &["X", "Y", "Z"][..n];
    let p = FiniteDistribution::random(random_axes(names, cfg, rng), rng)?;
    let on = nonempty_subset(names, rng);
    let mut event = random_event(&p, &on, rng)?;
    for _ in 0..32 {
        if p.event_probability(&event)? >= 0.2 {
            break;
        }
        event = random_event(&p, &on, rng)?;
    }
    let pe = p.event_probability(&event)?;
    let r = FiniteDistribution::random(p.axes().to_vec(), rng)?;
    let q = mix(&p, &r, rng.random_range(0.0..0.4) * pe)?;
    let eps = p.l1_distance(&q)?;
    let alpha = eps + rng.random_range(0.05..=1.0) * (pe - eps);
    Ok(ClassicalInstance::CondProb { p, q, event, alpha, eps })
}

/// P_T·Πᵢ P_{Uᵢ|T}·P_{V|TU} with a random event.
fn holenstein(cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<ClassicalInstance> {
    let k = rng.random_range(1..=cfg.max_k);
    let nt = alphabet(cfg, rng);
    let nu = rng.random_range(2..=cfg.max_alphabet.min(3));
    let nv = alphabet(cfg, rng);
    let pt = dirichlet_masses(nt, rng);
    let ku: Vec<Vec<f64>> = (0..k).map(|_| (0..nt).flat_map(|_| dirichlet_masses(nu, rng)).collect()).collect();
    let nus = nu.pow(k as u32);
    let mut axes = vec![Axis::range("T", nt)];
    axes.extend((1..=k).map(|i| Axis::range(format!("U{i}"), nu)));
    axes.push(Axis::range("V", nv));
    let mut w = Vec::with_capacity(nt * nus * nv);
    for (t, &ptv) in pt.iter().enumerate() {
        for us in 0..nus {
            let mut m = ptv;
            let mut rest = us;
            for i in (0..k).rev() {
                m *= ku[i][t * nu + rest % nu];
                rest /= nu;
            }
            let v = dirichlet_masses(nv, rng);
            w.extend(v.iter().map(|x| m * x));
        }
    }
    let dist = FiniteDistribution::from_table(axes, w)?;
    let names: Vec<String> = dist.axis_names().iter().map(|s| s.to_string()).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let on = nonempty_subset(&names, rng);
    let event = random_event(&dist, &on, rng)?;
    Ok(ClassicalInstance::Holenstein { dist, event })
}

fn system(name: &str, d: usize) -> Result<HilbertSpace> {
    Ok(HilbertSpace::of(&[(name, d)])?)
}

/// Random rank: full rank half of the time.
fn rank(d: usize, rng: &mut rng::Rng) -> Option<usize> {
    if rng.random_bool(0.5) {
        None
    } else {
        Some(rng.random_range(1..=d))
    }
}

fn density(space: &HilbertSpace, rng: &mut rng::Rng) -> DensityOperator {
    let r = rank(space.dim(), rng);
    random::density(space, r, rng)
}

/// σ with supp(ρ) ⊆ supp(σ): a mixture of ρ with an arbitrary state.
fn dominating(rho: &DensityOperator, rng: &mut rng::Rng) -> Result<DensityOperator> {
    let other = density(rho.space(), rng);
    let b = rng.random_range(0.05..=1.0);
    if b >= 1.0 || rng.random_bool(0.3) {
        return Ok(random::density(rho.space(), None, rng));
    }
    Ok(DensityOperator::mixture(&[(b, rho), (1.0 - b, &other)])?)
}

fn quantum(fact: QuantumFact, trial: usize, cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<QuantumInstance> {
    let d = rng.random_range(2..=cfg.max_dim);
    let sp = system("A", d)?;
    Ok(match fact {
        QuantumFact::Fvdg => QuantumInstance::Fvdg { rho: density(&sp, rng), sigma: density(&sp, rng) },
        QuantumFact::FvdgPureLiteral if trial == 0 => {
            let h = 0.5f64.sqrt();
            let q = system("A", 2)?;
            QuantumInstance::FvdgPureLiteral {
                psi: PureState::basis(q.clone(), 0)?,
                phi: PureState::new(q, CVector::from_vec(vec![c(h), c(h)]))?,
            }
        }
        QuantumFact::FvdgPureLiteral => QuantumInstance::FvdgPureLiteral { psi: random::pure(&sp, rng), phi: random::pure(&sp, rng) },
        QuantumFact::ChanMono => {
            let dout = rng.random_range(2..=cfg.max_dim);
            let count = d.div_ceil(dout) + rng.random_range(0..=2);
            let kraus = random::channel(d, dout, count, rng);
            QuantumInstance::ChanMono {
                rho: density(&sp, rng),
                sigma: density(&sp, rng),
                channel: Channel { output: system("B", dout)?, kraus: kraus.into_iter().map(Matrix).collect() },
            }
        }
        QuantumFact::PinskerStd => {
            let rho = density(&sp, rng);
            QuantumInstance::PinskerStd { sigma: dominating(&rho, rng)?, rho }
        }
        QuantumFact::PinskerPaper if trial == 0 => {
            let q = system("A", 2)?;
            QuantumInstance::PinskerPaper {
                rho: DensityOperator::diagonal(q.clone(), &[0.5, 0.5])?,
                sigma: DensityOperator::diagonal(q, &[0.25, 0.75])?,
            }
        }
        QuantumFact::PinskerPaper => {
            let rho = density(&sp, rng);
            QuantumInstance::PinskerPaper { sigma: dominating(&rho, rng)?, rho }
        }
        QuantumFact::EventProb => QuantumInstance::EventProb {
            rho: density(&sp, rng),
            rho_prime: density(&sp, rng),
            eps: rng.random_range(0.01..=1.0),
        },
        QuantumFact::SinfTriangle => {
            let rho = density(&sp, rng);
            let phi = dominating(&rho, rng)?;
            let sigma = dominating(&phi, rng)?;
            QuantumInstance::SinfTriangle { rho, phi, sigma }
        }
        QuantumFact::SinfUnitary => {
            let rho = density(&sp, rng);
            QuantumInstance::SinfUnitary { sigma: dominating(&rho, rng)?, rho, unitary: Matrix(random::unitary(d, rng)) }
        }
        QuantumFact::DimUb => {
            let shapes: Vec<(usize, usize)> =
                (2..=cfg.max_dim).flat_map(|a| (2..=cfg.max_dim / a).map(move |b| (a, b))).collect();
            let (dy, dz) = shapes[rng.random_range(0..shapes.len())];
            let space = HilbertSpace::of(&[("Y", dy), ("Z", dz)])?;
            QuantumInstance::DimUb { rho: density(&space, rng), y: vec!["Y".into()], z: vec!["Z".into()] }
        }
        QuantumFact::CondDec => {
            let nx = rng.random_range(2..=cfg.max_alphabet.min(3));
            let dq = rng.random_range(2..=(cfg.max_dim / nx).max(2));
            let q = system("Q", dq)?;
            let axes = vec![Axis::range("X", nx)];
            let pr = FiniteDistribution::random(axes.clone(), rng)?;
            let ps = FiniteDistribution::random(axes, rng)?;
            let rs: Vec<DensityOperator> = (0..nx).map(|_| density(&q, rng)).collect();
            let ss: Vec<DensityOperator> = rs.iter().map(|r| dominating(r, rng)).collect::<Result<_>>()?;
            QuantumInstance::CondDec { rho: CQState::new(pr, rs)?, sigma: CQState::new(ps, ss)? }
        }
        QuantumFact::ImaxClose => imax_close(cfg, rng)?,
        QuantumFact::Raz => {
            let k = rng.random_range(1..=3);
            let dq = rng.random_range(2..=cfg.max_dim.min(3));
            let q = system("Q", dq)?;
            let axes: Vec<Axis> = (1..=k).map(|i| Axis::range(format!("X{i}"), 2)).collect();
            let pr = FiniteDistribution::random(axes.clone(), rng)?;
            let rs: Vec<DensityOperator> = (0..pr.len()).map(|_| density(&q, rng)).collect();
            let mut ps = FiniteDistribution::random(axes[..1].to_vec(), rng)?;
            for a in &axes[1..] {
                ps = ps.product(&FiniteDistribution::random(vec![a.clone()], rng)?)?;
            }
            let fixed = random::density(&q, None, rng);
            let n = ps.len();
            QuantumInstance::Raz { rho: CQState::new(pr, rs)?, sigma: CQState::new(ps, vec![fixed; n])? }
        }
        QuantumFact::Substate => {
            let rho = density(&sp, rng);
            QuantumInstance::Substate { sigma: dominating(&rho, rng)?, rho, eps: rng.random_range(0.1..0.9) }
        }
        QuantumFact::JrsVerify => jrs(cfg, rng)?,
    })
}

/// P′ within δ of P, with one Z-state per (x, y).
fn imax_close(cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<QuantumInstance> {
    let nx = rng.random_range(2..=cfg.max_alphabet.min(3));
    let ny = rng.random_range(2..=cfg.max_alphabet.min(3));
    let dz = rng.random_range(2..=cfg.max_dim.min(3));
    let axes = vec![Axis::range("X", nx), Axis::range("Y", ny)];
    let p = FiniteDistribution::random(axes.clone(), rng)?;
    let r = FiniteDistribution::random(axes, rng)?;
    let p_prime = mix(&p, &r, rng.random_range(0.0..0.1))?;
    let delta = p.l1_distance(&p_prime)?;
    let eps = rng.random_range((delta + 0.01)..0.49);
    let z = system("Z", dz)?;
    let states = (0..p.len()).map(|_| density(&z, rng)).collect();
    Ok(QuantumInstance::ImaxClose { p, p_prime, states, delta, eps })
}

/// Σₓ √P(x)|xx⟩|σₓ⟩ with operators from the compression construction and
/// k the certified smooth max-information of X against B.
fn jrs(cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<QuantumInstance> {
    let dx = rng.random_range(2..=cfg.max_alphabet.min(3));
    let (da, db) = (2, 2);
    let px = dirichlet_masses(dx, rng);
    let ab = HilbertSpace::of(&[("A", da), ("B", db)])?;
    let space = HilbertSpace::of(&[("X", dx), ("X~", dx), ("A", da), ("B", db)])?;
    let mut v = CVector::zeros(space.dim());
    let first = random::pure(&ab, rng);
    let overlap = rng.random_range(0.0..=1.0);
    for (x, &w) in px.iter().enumerate() {
        let own = random::pure(&ab, rng);
        let branch = first.vector() * c(overlap) + own.vector() * c(1.0 - overlap);
        let branch = &branch / c(branch.norm());
        for i in 0..da * db {
            v[(x * dx + x) * da * db + i] = branch[i] * c(w.sqrt());
        }
    }
    let state = PureState::new(space, v)?;
    let delta = rng.random_range(0.1..=0.3);
    let xb = state.reduce(&["X", "B"])?;
    let k = max_information(&xb, &["X"], &["B"], delta)?.value.max(0.0);
    let layout = CompressionLayout::standard();
    let comp = compression_measurement(&state, &layout, k, delta)?;
    let operators = comp
        .operators
        .into_iter()
        .map(|m| Operator::new(comp.space.clone(), m))
        .collect::<std::result::Result<_, _>>()?;
    Ok(QuantumInstance::JrsVerify { state, layout, operators, k, delta })
}

fn breaker(check: BreakerCheck, cfg: &BatteryConfig, rng: &mut rng::Rng) -> Result<BreakerInstance> {
    let p = FiniteDistribution::random(random_axes(&["X", "Y"], cfg, rng), rng)?;
    let zeta = rng.random_range(0.01..0.99);
    Ok(BreakerInstance { check, p, zeta })
}
