mod support;

use anchorlab::breaker::repair::repair_with;
use anchorlab::breaker::{
    breaking_gap, build_joint, build_q, conditioned_state, mismatch_closed_form, mismatch_probability,
    repair_unitaries, verify_marginal, BreakerJoint,
};
use anchorlab::distrib::{Axis, Event, FiniteDistribution};
use anchorlab::games::{anchor_game, repeat_game, AnchorSide, AnchorSpec, EntangledStrategy, DEFAULT_ANCHOR};
use anchorlab::qmath::{random, HilbertSpace, Povm, PureState};
use anchorlab::rng;
use anchorlab::Game;
use proptest::prelude::*;
use support::oracles::{gradient_solver, monte_carlo_success};

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn base(nx: usize, ny: usize, seed: u64) -> FiniteDistribution {
    let mut r = rng::stream(seed, 0);
    FiniteDistribution::random(vec![Axis::new("X", &labels("x", nx)), Axis::new("Y", &labels("y", ny))], &mut r)
        .unwrap()
}

/// Game on 2×2 inputs and answers with random q and predicate, anchored on Y.
fn random_anchored(seed: u64, zeta: f64) -> Game {
    let mut r = rng::stream(seed, 1);
    let q = FiniteDistribution::random(vec![Axis::range("X", 2), Axis::range("Y", 2)], &mut r).unwrap();
    let table: Vec<bool> = (0..16).map(|i| (seed.wrapping_mul(2654435761) >> (i % 29)) & 1 == 1 || i % 5 == 0).collect();
    let bits = || vec!["0".to_string(), "1".to_string()];
    let g = Game::from_fn(bits(), bits(), bits(), bits(), q.weights().to_vec(), |x, y, a, b| {
        table[((x * 2 + y) * 2 + a) * 2 + b]
    })
    .unwrap();
    anchor_game(&g, &AnchorSpec::new(AnchorSide::Y, zeta)).unwrap()
}

fn random_strategy(game: &Game, k: usize, seed: u64) -> EntangledStrategy {
    let rep = repeat_game(game, k).unwrap();
    let (kx, ky, ka, kb) = rep.sizes();
    let mut r = rng::stream(seed, 2);
    let sp = EntangledStrategy::local_space(2).unwrap();
    EntangledStrategy {
        dim: 2,
        state: random::pure(&HilbertSpace::of(&[("A", 2), ("B", 2)]).unwrap(), &mut r),
        alice: (0..kx).map(|_| random::povm(&sp, ka, &mut r)).collect(),
        bob: (0..ky).map(|_| random::povm(&sp, kb, &mut r)).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_has_q_marginal_and_breaks_correlation(nx in 2usize..5, ny in 2usize..5, seed in any::<u64>(), zeta in 0.01f64..0.99) {
        let p = base(nx, ny, seed);
        let j = build_joint(&p, zeta).unwrap();
        prop_assert!(verify_marginal(&j).unwrap() <= 1e-12);
        prop_assert!(breaking_gap(&j).unwrap() <= 1e-10);
        let d = j.joint.marginal(&["D"]).unwrap();
        prop_assert!((d.weights()[0] - 0.5).abs() <= 1e-12);
        let star = 1.0 - (1.0 - zeta).powf(2.0 / 3.0);
        prop_assert!((j.anchor_probability() - star).abs() <= 1e-12);
        prop_assert!((mismatch_probability(&j) - mismatch_closed_form(zeta)).abs() <= 1e-12);
    }

    #[test]
    fn anchoring_bounds(zeta in 1e-6f64..=0.9) {
        let star = 1.0 - (1.0 - zeta).powf(2.0 / 3.0);
        prop_assert!(2.0 * zeta / 3.0 <= star + 1e-12 && star <= zeta + 1e-12);
        prop_assert!(mismatch_closed_form(zeta) <= zeta / 3.0 + 1e-12);
    }

    #[test]
    fn q_is_two_zeta_from_p(nx in 2usize..5, ny in 2usize..5, seed in any::<u64>(), zeta in 0.01f64..0.99) {
        let p = base(nx, ny, seed);
        let q = build_q(&p, zeta).unwrap();
        let mut padded = Vec::new();
        for row in p.weights().chunks(ny) {
            padded.extend_from_slice(row);
            padded.push(0.0);
        }
        let padded = FiniteDistribution::from_table(q.axes().to_vec(), padded).unwrap();
        prop_assert!((padded.l1_distance(&q).unwrap() - 2.0 * zeta).abs() <= 1e-12);
        let back = q.condition_on_event(&Event::from_fn(&q, &["Y"], |d| d[0] != ny).unwrap()).unwrap();
        let back = FiniteDistribution::from_table(p.axes().to_vec(), back.weights().iter().enumerate().filter(|(i, _)| i % (ny + 1) != ny).map(|(_, w)| *w).collect()).unwrap();
        prop_assert!(back.l1_distance(&p).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dg_blocks_average_to_success(seed in any::<u64>(), zeta in 0.05f64..0.9) {
        let g = random_anchored(seed, zeta);
        let s = random_strategy(&g, 2, seed);
        let an = conditioned_state(&g, &s, &[0], 2).unwrap();
        prop_assert!((an.dg_total() - an.pr_success).abs() <= 1e-9);
        let cq = an.conditioned_cq(&["B0", "B1", "EB"]).unwrap();
        for st in cq.states() {
            prop_assert!(st.eigenvalues().iter().all(|&v| v >= -1e-10));
        }
        prop_assert!(an.info_x.iter().chain(&an.info_y).all(|v| v.is_finite() && *v >= 0.0));
    }
}

#[test]
fn examples_from_closed_forms() {
    let uniform = FiniteDistribution::uniform(vec![Axis::range("X", 2), Axis::range("Y", 2)]).unwrap();
    let j = build_joint(&uniform, 0.5).unwrap();
    assert!(verify_marginal(&j).unwrap() <= 1e-12);
    let skewed = FiniteDistribution::from_table(vec![Axis::range("X", 2), Axis::range("Y", 2)], vec![0.7, 0.1, 0.1, 0.1]).unwrap();
    let j = build_joint(&skewed, 0.3).unwrap();
    assert!(verify_marginal(&j).unwrap() <= 1e-12);
    assert!(mismatch_closed_form(1e-9) < 1e-9);
}

#[test]
fn success_probability_matches_monte_carlo() {
    let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.2)).unwrap();
    let s = random_strategy(&g, 2, 5);
    let an = conditioned_state(&g, &s, &[1], 2).unwrap();
    let (est, se) = monte_carlo_success(&g, &s, &[1], 2, 100_000, 2);
    assert!((est - an.pr_success).abs() <= 3.0 * se, "{est} ± {se} vs {}", an.pr_success);
}

#[test]
fn svd_repair_matches_gradient_search() {
    let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.3)).unwrap();
    let s = random_strategy(&g, 2, 11);
    let an = conditioned_state(&g, &s, &[1], 2).unwrap();
    let svd = repair_unitaries(&an, 0).unwrap();
    let grad = repair_with(&an, 0, &gradient_solver).unwrap();
    assert!(svd.distance > 0.05);
    assert!((svd.distance - grad.distance).abs() <= 1e-6);
    assert!((svd.y_term - grad.y_term).abs() <= 1e-6);
    assert!((svd.x_term - grad.x_term).abs() <= 1e-6);
    assert!((svd.total_weight - an.pr_success).abs() <= 1e-9);
}

#[test]
fn repair_ignores_global_phase_and_labels() {
    let g = random_anchored(3, 0.25);
    let s = random_strategy(&g, 2, 3);
    let base = repair_unitaries(&conditioned_state(&g, &s, &[1], 2).unwrap(), 0).unwrap();

    let mut phased = s.clone();
    phased.state = s.state.with_phase(1.234);
    let r = repair_unitaries(&conditioned_state(&g, &phased, &[1], 2).unwrap(), 0).unwrap();
    assert!((r.distance - base.distance).abs() <= 1e-9);

    // Swap the two X labels and rename every alphabet; the strategy follows.
    let (nx, ny, na, nb) = g.sizes();
    let perm = [1usize, 0];
    let mut q = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            q.push(g.q_at(perm[x], y));
        }
    }
    let mut ys = labels("v", ny - 1);
    ys.push(DEFAULT_ANCHOR.into());
    let relabeled = Game::from_fn(labels("u", nx), ys, labels("s", na), labels("t", nb), q, |x, y, a, b| {
        g.wins(perm[x], y, a, b)
    })
    .unwrap();
    let mut moved = s.clone();
    for x0 in 0..nx {
        for x1 in 0..nx {
            moved.alice[x0 * nx + x1] = s.alice[perm[x0] * nx + perm[x1]].clone();
        }
    }
    let r = repair_unitaries(&conditioned_state(&relabeled, &moved, &[1], 2).unwrap(), 0).unwrap();
    assert!((r.distance - base.distance).abs() <= 1e-9);
    assert!((r.y_term - base.y_term).abs() <= 1e-9);
}

#[test]
fn classical_single_round_needs_no_repair() {
    // d = 1, k = 1, C empty: every conditional state is a product of
    // classical registers, so the unitaries repair exactly.
    let g = random_anchored(9, 0.4);
    let sp = EntangledStrategy::local_space(1).unwrap();
    let s = EntangledStrategy {
        dim: 1,
        state: PureState::basis(HilbertSpace::of(&[("A", 1), ("B", 1)]).unwrap(), 0).unwrap(),
        alice: vec![Povm::constant(sp.clone(), 2, 1), Povm::constant(sp.clone(), 2, 0)],
        bob: vec![Povm::constant(sp.clone(), 2, 0), Povm::constant(sp.clone(), 2, 1), Povm::constant(sp, 2, 1)],
    };
    let an = conditioned_state(&g, &s, &[], 1).unwrap();
    assert_eq!(an.pr_success, 1.0);
    let r = repair_unitaries(&an, 0).unwrap();
    assert!(r.distance < 1e-7, "{}", r.distance);
}

#[test]
fn game_mode_joint_matches_game_distribution() {
    let g = random_anchored(4, 0.35);
    let j = BreakerJoint::from_anchored_game(&g, DEFAULT_ANCHOR).unwrap();
    let m = j.joint.marginal(&["X", "Y"]).unwrap();
    assert!(m.l1_distance(g.q()).unwrap() <= 1e-12);
}

