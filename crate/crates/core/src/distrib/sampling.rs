//! Seeded sampling, correlated sampling and the two-party embedding protocol.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{Axis, DistribError, FiniteDistribution, Kernel, Result};
use crate::rng;

/// Iteration cap for one correlated-sampling draw.
pub const STREAM_CAP: usize = 1_000_000;

impl FiniteDistribution {
    /// `count` flat indices drawn i.i.d. from the table.
    pub fn sample_indices<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<usize> {
        if count == 0 {
            return Vec::new();
        }
        let dist = WeightedIndex::new(self.weights()).expect("validated weights");
        (0..count).map(|_| dist.sample(rng)).collect()
    }

    /// `count` label tuples drawn i.i.d.; deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<String>> {
        let mut rng = rng::stream(seed, 0);
        self.sample_indices(count, &mut rng)
            .into_iter()
            .map(|i| self.labels_of(i).into_iter().map(String::from).collect())
            .collect()
    }

    /// Empirical distribution of flat indices over the same axes.
    pub fn empirical(axes: Vec<Axis>, indices: &[usize]) -> Result<Self> {
        let n: usize = axes.iter().map(Axis::len).product();
        let mut counts = vec![0.0; n];
        for &i in indices {
            if i >= n {
                return Err(DistribError::Arity {
                    expected: n,
                    got: i + 1,
                });
            }
            counts[i] += 1.0;
        }
        FiniteDistribution::from_masses(axes, counts)
    }
}

fn check_alphabets(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<()> {
    if p.len() != q.len() || p.axes().iter().zip(q.axes()).any(|(a, b)| a.labels != b.labels) {
        return Err(DistribError::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            p.axis_names(),
            q.axis_names()
        )));
    }
    Ok(())
}

/// One correlated-sampling draw over two weight vectors on a common alphabet.
/// Both parties scan the same stream of (uniform label, uniform threshold)
/// pairs and accept the first pair lying under their own density.
pub fn correlated_draw<R: Rng + ?Sized>(p: &[f64], q: &[f64], rng: &mut R) -> Result<(usize, usize)> {
    let n = p.len();
    let mut a = None;
    let mut b = None;
    for _ in 0..STREAM_CAP {
        let label = rng.random_range(0..n);
        let u: f64 = rng.random();
        if a.is_none() && u < p[label] {
            a = Some(label);
        }
        if b.is_none() && u < q[label] {
            b = Some(label);
        }
        if let (Some(a), Some(b)) = (a, b) {
            return Ok((a, b));
        }
    }
    Err(DistribError::StreamExhausted(STREAM_CAP))
}

/// A single correlated sample from (P, Q), returned as flat indices.
/// Each output has exactly its own law and they differ with probability at
/// most 2·d_tv(P, Q).
pub fn correlated_sample(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    seed: u64,
) -> Result<(usize, usize)> {
    check_alphabets(p, q)?;
    let mut rng = rng::stream(seed, 0);
    correlated_draw(p.weights(), q.weights(), &mut rng)
}

/// `trials` independent correlated draws, each on its own stream of `seed`.
pub fn correlated_samples(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    check_alphabets(p, q)?;
    (0..trials)
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            correlated_draw(p.weights(), q.weights(), &mut rng)
        })
        .collect()
}

/// Outcome of a simulated embedding.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// Empirical law of (X, Y, R_A, R_B).
    pub empirical: FiniteDistribution,
    /// ℓ1 distance of `empirical` to the target with R copied to both sides.
    pub distance: f64,
    /// The two closeness hypotheses as measured.
    pub hypotheses: (f64, f64),
    /// Monte-Carlo allowance, 3·√(cells / trials).
    pub slack: f64,
}

/// ‖P_{X'Y'R'} − P_{XY}·P_{R'|side}‖₁.
fn embedding_gap(pxy: &FiniteDistribution, target: &FiniteDistribution, side: &str) -> Result<f64> {
    let k = Kernel::conditional(target, &[side], &["R"])?;
    pxy.compose(&k)?.l1_distance(target)
}

/// Simulates the two-party embedding: inputs (x, y) ~ P_XY, Alice holds the
/// row P_{R'|X'=x}, Bob holds P_{R'|Y'=y}, and the two rows are joined by
/// correlated sampling on shared randomness. `target` must have axes
/// `X`, `Y`, `R` with `X`, `Y` matching `pxy`.
pub fn embed_inputs(
    pxy: &FiniteDistribution,
    target: &FiniteDistribution,
    eps: f64,
    seed: u64,
    trials: usize,
) -> Result<Embedding> {
    if pxy.axis_names() != ["X", "Y"] || target.axis_names() != ["X", "Y", "R"] {
        return Err(DistribError::AxisMismatch(
            "expected P over (X, Y) and target over (X, Y, R)".into(),
        ));
    }
    if pxy.axes()[..] != target.axes()[..2] {
        return Err(DistribError::AlphabetMismatch("X/Y alphabets differ".into()));
    }
    if trials < 10_000 {
        return Err(DistribError::InvalidArgument(format!(
            "embedding needs at least 10^4 trials, got {trials}"
        )));
    }
    let h1 = embedding_gap(pxy, target, "X")?;
    let h2 = embedding_gap(pxy, target, "Y")?;
    if h1 > eps || h2 > eps {
        return Err(DistribError::HypothesisViolated(format!(
            "closeness {h1:.6} / {h2:.6} exceeds eps {eps}"
        )));
    }
    let rx = Kernel::conditional(target, &["X"], &["R"])?;
    let ry = Kernel::conditional(target, &["Y"], &["R"])?;
    let nx = pxy.axes()[0].len();
    let ny = pxy.axes()[1].len();
    let nr = target.axes()[2].len();

    let mut input_rng = rng::stream(seed, u64::MAX);
    let inputs = pxy.sample_indices(trials, &mut input_rng);
    let mut cells = Vec::with_capacity(trials);
    for (t, &xy) in inputs.iter().enumerate() {
        let (x, y) = (xy / ny, xy % ny);
        let mut shared = rng::stream(seed, t as u64);
        let (ra, rb) = correlated_draw(rx.row(x), ry.row(y), &mut shared)?;
        cells.push(((x * ny + y) * nr + ra) * nr + rb);
    }
    let r = &target.axes()[2];
    let axes = vec![
        pxy.axes()[0].clone(),
        pxy.axes()[1].clone(),
        Axis {
            name: "R_A".into(),
            labels: r.labels.clone(),
        },
        Axis {
            name: "R_B".into(),
            labels: r.labels.clone(),
        },
    ];
    let empirical = FiniteDistribution::empirical(axes.clone(), &cells)?;
    let mut copied = vec![0.0; nx * ny * nr * nr];
    for (i, w) in target.weights().iter().enumerate() {
        let rr = i % nr;
        let xy = i / nr;
        copied[(xy * nr + rr) * nr + rr] = *w;
    }
    let copied = FiniteDistribution::from_table(axes, copied)?;
    let distance = empirical.l1_distance(&copied)?;
    Ok(Embedding {
        empirical,
        distance,
        hypotheses: (h1, h2),
        slack: 3.0 * ((nx * ny * nr * nr) as f64 / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit(p0: f64) -> FiniteDistribution {
        FiniteDistribution::from_table(vec![Axis::range("X", 2)], vec![p0, 1.0 - p0]).unwrap()
    }

    #[test]
    fn sample_edge_cases() {
        let p = bit(0.5);
        assert!(p.sample(0, 1).is_empty());
        let point = bit(1.0);
        assert!(point.sample(50, 3).iter().all(|s| s == &["0"]));
        assert_eq!(p.sample(20, 9), p.sample(20, 9));
    }

    #[test]
    fn correlated_identical_and_disjoint() {
        let p = bit(0.3);
        for (a, b) in correlated_samples(&p, &p, 2000, 5).unwrap() {
            assert_eq!(a, b);
        }
        for (a, b) in correlated_samples(&bit(1.0), &bit(0.0), 100, 5).unwrap() {
            assert_ne!(a, b);
        }
    }

    #[test]
    fn correlated_alphabet_mismatch() {
        let q = FiniteDistribution::uniform(vec![Axis::range("X", 3)]).unwrap();
        assert!(matches!(
            correlated_sample(&bit(0.5), &q, 1),
            Err(DistribError::AlphabetMismatch(_))
        ));
    }
}
