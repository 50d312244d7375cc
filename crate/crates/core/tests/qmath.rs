use anchorlab::distrib::{Axis, FiniteDistribution};
use anchorlab::qmath::compression::{compression_measurement, jrs_verify, CompressionLayout};
use anchorlab::qmath::linalg::{c, kron, unitarity_gap, CMatrix, CVector};
use anchorlab::qmath::maxinfo::{dimension_bound, max_information};
use anchorlab::qmath::uhlmann::apply_on_complement;
use anchorlab::qmath::{
    entropy, fidelity, mutual_information, purify, random, relative_entropy, relative_min_entropy,
    smooth_min_entropy_witness, trace_distance, uhlmann_unitary, CQState, DensityOperator, HilbertSpace, PureState,
};
use anchorlab::rng;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn space(d: usize) -> HilbertSpace {
    HilbertSpace::of(&[("S", d)]).unwrap()
}

fn bell() -> PureState {
    let h = 0.5f64.sqrt();
    let sp = HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap();
    PureState::new(sp, CVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)])).unwrap()
}

#[test]
fn fuchs_van_de_graaf_sandwich() {
    let mut r = rng::stream(1, 0);
    for _ in 0..1000 {
        let d = r.random_range(2..=6);
        let sp = space(d);
        let rank = r.random_range(1..=d);
        let rho = random::density(&sp, Some(rank), &mut r);
        let sigma = random::density(&sp, None, &mut r);
        let f = fidelity(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        assert!((0.0..=1.0).contains(&f));
        assert!(1.0 - f <= t / 2.0 + 1e-9);
        assert!(t / 2.0 <= (1.0 - f * f).sqrt() + 1e-9);
    }
}

#[test]
fn channels_contract_trace_distance_and_relative_entropy() {
    let mut r = rng::stream(2, 0);
    for _ in 0..200 {
        let (din, dout) = (r.random_range(2..=4), r.random_range(2..=4));
        let rho = random::density(&space(din), None, &mut r);
        let sigma = random::density(&space(din), None, &mut r);
        let kraus = random::channel(din, dout, r.random_range(1..=3), &mut r);
        let out = HilbertSpace::of(&[("T", dout)]).unwrap();
        let (cr, cs) = (rho.apply_channel(&kraus, &out).unwrap(), sigma.apply_channel(&kraus, &out).unwrap());
        assert!(trace_distance(&cr, &cs).unwrap() <= trace_distance(&rho, &sigma).unwrap() + 1e-9);
        assert!(relative_entropy(&cr, &cs).unwrap() <= relative_entropy(&rho, &sigma).unwrap() + 1e-8);
        assert!(fidelity(&cr, &cs).unwrap() + 1e-9 >= fidelity(&rho, &sigma).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn min_entropy_dominates_relative_entropy(d in 2usize..6, seed in any::<u64>()) {
        let mut r = rng::stream(seed, 0);
        let rho = random::density(&space(d), None, &mut r);
        let sigma = random::density(&space(d), None, &mut r);
        let s = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(s >= -1e-10);
        prop_assert!(relative_min_entropy(&rho, &sigma).unwrap() + 1e-9 >= s);
        prop_assert!(entropy(&rho) <= (d as f64).log2() + 1e-9);
    }

    #[test]
    fn purification_reduces_back(d in 2usize..5, rank in 1usize..5, seed in any::<u64>()) {
        let mut r = rng::stream(seed, 0);
        let rho = random::density(&space(d), Some(rank.min(d)), &mut r);
        let back = purify(&rho).reduce(&["S"]).unwrap();
        prop_assert!(trace_distance(&back, &rho).unwrap() <= 1e-10);
    }

    #[test]
    fn uhlmann_overlap_is_the_fidelity(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let mut r = rng::stream(seed, 0);
        let sp = HilbertSpace::of(&[("A", da), ("B", db)]).unwrap();
        let (psi, phi) = (random::pure(&sp, &mut r), random::pure(&sp, &mut r));
        let u = uhlmann_unitary(&psi, &phi, &["A"]).unwrap();
        prop_assert!(unitarity_gap(&u.unitary) <= 1e-10);
        let f = fidelity(&psi.reduce(&["A"]).unwrap(), &phi.reduce(&["A"]).unwrap()).unwrap();
        prop_assert!((u.overlap - f).abs() <= 1e-9);
        let moved = apply_on_complement(&phi, &["A"], &u.unitary).unwrap();
        let ip = psi.vector().dotc(&moved);
        prop_assert!((ip.re - u.overlap).abs() <= 1e-9 && ip.im.abs() <= 1e-9);
    }

    #[test]
    fn cq_chain_rule(nx in 2usize..4, seed in any::<u64>()) {
        let mut r = rng::stream(seed, 0);
        let px = FiniteDistribution::random(vec![Axis::range("X", nx)], &mut r).unwrap();
        let sp = HilbertSpace::of(&[("B", 2), ("C", 2)]).unwrap();
        let states = (0..nx).map(|_| random::density(&sp, None, &mut r)).collect();
        let cq = CQState::new(px, states).unwrap();
        // I(X : BC) = I(X : C) + I(X : B | C)
        let lhs = cq.mutual_information(&["X"], &["B", "C"]).unwrap();
        let rhs = cq.mutual_information(&["X"], &["C"]).unwrap() + cq.conditional_mutual_information(&["X"], &["B"], &["C"]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
        let dense = cq.to_density().unwrap();
        prop_assert!((mutual_information(&dense, &["X"], &["B", "C"]).unwrap() - lhs).abs() <= 1e-9);
    }
}

/// Best overlap ⟨ψ|(I ⊗ U)|φ⟩ over U = e^{iα}·[[a, −b̄], [b, ā]] on a grid,
/// a direct search independent of the SVD construction.
fn grid_overlap(psi: &PureState, phi: &PureState) -> f64 {
    let steps = 48;
    let mut best = 0.0f64;
    for i in 0..=steps {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        for j in 0..steps {
            for k in 0..steps {
                let (p1, p2) = (std::f64::consts::TAU * j as f64 / steps as f64, std::f64::consts::TAU * k as f64 / steps as f64);
                let a = Complex64::from_polar(theta.cos(), p1);
                let b = Complex64::from_polar(theta.sin(), p2);
                let u = CMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()]);
                let moved = kron(&CMatrix::identity(2, 2), &u) * phi.vector();
                best = best.max(psi.vector().dotc(&moved).norm());
            }
        }
    }
    best
}

#[test]
fn uhlmann_bell_against_product() {
    let sp = HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap();
    let zero = PureState::basis(sp, 0).unwrap();
    let u = uhlmann_unitary(&bell(), &zero, &["A"]).unwrap();
    assert!((u.overlap - 0.5f64.sqrt()).abs() <= 1e-12);
    let grid = grid_overlap(&bell(), &zero);
    assert!(grid <= u.overlap + 1e-12 && u.overlap - grid <= 1e-3);

    let mut r = rng::stream(4, 0);
    let (psi, phi) = (random::pure(&zero.space().clone(), &mut r), random::pure(zero.space(), &mut r));
    let u = uhlmann_unitary(&psi, &phi, &["A"]).unwrap();
    let grid = grid_overlap(&psi, &phi);
    assert!(grid <= u.overlap + 1e-12 && u.overlap - grid <= 1e-3, "{grid} vs {}", u.overlap);
}

#[test]
fn smoothing_witness_on_qutrits() {
    let mut r = rng::stream(7, 0);
    let rho = random::density(&space(3), None, &mut r);
    let sigma = random::density(&space(3), None, &mut r);
    let w = smooth_min_entropy_witness(&rho, &sigma, 0.1).unwrap();
    assert!(w.distance <= 0.1 + 1e-12);
    assert!((trace_distance(&rho, &w.smoothed).unwrap() - w.distance).abs() <= 1e-10);
    assert!((relative_min_entropy(&w.smoothed, &sigma).unwrap() - w.value).abs() <= 1e-9);
    assert!(w.value <= relative_min_entropy(&rho, &sigma).unwrap() + 1e-9);
    // S_∞ dominates the relative entropy of the smoothed state itself.
    assert!(w.value + 1e-9 >= relative_entropy(&w.smoothed, &sigma).unwrap());
}

#[test]
fn max_information_examples() {
    // Product state: zero.
    let mut r = rng::stream(3, 0);
    let a = random::density(&HilbertSpace::of(&[("Y", 2)]).unwrap(), None, &mut r);
    let b = random::density(&HilbertSpace::of(&[("Z", 3)]).unwrap(), None, &mut r);
    let prod = a.tensor(&b).unwrap();
    assert!(max_information(&prod, &["Y"], &["Z"], 0.0).unwrap().value.abs() <= 1e-7);

    // Maximally entangled qubits reach the dimension bound 2.
    let e = bell().density();
    let w = max_information(&e, &["A"], &["B"], 0.0).unwrap();
    assert!((w.value - dimension_bound(2, 2)).abs() <= 1e-7, "{}", w.value);

    // Perfect classical correlation of a uniform bit: log of the alphabet.
    let sp = HilbertSpace::of(&[("Y", 2), ("Z", 2)]).unwrap();
    let cc = DensityOperator::diagonal(sp, &[0.5, 0.0, 0.0, 0.5]).unwrap();
    assert!((max_information(&cc, &["Y"], &["Z"], 0.0).unwrap().value - 1.0).abs() <= 1e-7);

    // Smoothing never increases the value.
    let sm = max_information(&e, &["A"], &["B"], 0.1).unwrap();
    assert!(sm.value <= w.value + 1e-9);
    assert!(sm.smoothed.is_some());
}

fn compression_state(overlap: f64) -> PureState {
    // σ₀ = |Φ⁺⟩, σ₁ = overlap·|Φ⁺⟩ + √(1−overlap²)·|Ψ⁺⟩ on A B, X uniform.
    let h = 0.5f64.sqrt();
    let phi = [h, 0.0, 0.0, h];
    let psi = [0.0, h, h, 0.0];
    let s = (1.0 - overlap * overlap).sqrt();
    let sig: [Vec<f64>; 2] = [phi.to_vec(), (0..4).map(|i| overlap * phi[i] + s * psi[i]).collect()];
    let sp = HilbertSpace::of(&[("X", 2), ("X~", 2), ("A", 2), ("B", 2)]).unwrap();
    let mut v = CVector::zeros(16);
    for x in 0..2 {
        for i in 0..4 {
            v[(x * 2 + x) * 4 + i] = c(sig[x][i] * h);
        }
    }
    PureState::new(sp, v).unwrap()
}

#[test]
fn compression_of_close_branches() {
    let st = compression_state(0.9);
    let delta = 0.2;
    let k = max_information(&st.reduce(&["X", "B"]).unwrap(), &["X"], &["B"], delta).unwrap().value.max(0.0);
    let layout = CompressionLayout::standard();
    let comp = compression_measurement(&st, &layout, k, delta).unwrap();
    assert!(comp.report.success_margin >= 0.0);
    assert!(comp.report.closeness_margin >= 0.0);
    assert!(comp.report.uniformity_margin.abs() <= 1e-9);
    let again = jrs_verify(&st, &layout, &comp.operators, k, delta).unwrap();
    assert_eq!(again, comp.report);
}
