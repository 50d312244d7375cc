//! Finite probability distributions over products of named alphabets.
//!
//! A [`FiniteDistribution`] is a row-major table of nonnegative weights indexed
//! by one label per axis. Marginals, conditioning, composition with a
//! [`Kernel`] and the information quantities used by the correlation-breaking
//! construction all work on the flat table.

pub mod facts;
pub mod sampling;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total weight when a table is constructed.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Conditioning objects lighter than this are rejected.
pub const MIN_CONDITION_MASS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistribError {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("duplicate axis `{0}`")]
    DuplicateAxis(String),
    #[error("duplicate label `{label}` on axis `{axis}`")]
    DuplicateLabel { axis: String, label: String },
    #[error("axis `{0}` has an empty alphabet")]
    EmptyAlphabet(String),
    #[error("table has {got} entries but the axes require {expected}")]
    Arity { expected: usize, got: usize },
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),
    #[error("unknown label `{label}` on axis `{axis}`")]
    UnknownLabel { axis: String, label: String },
    #[error("conditioning object has probability {0}")]
    ZeroProbabilityCondition(f64),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("correlated sampling stream exhausted after {0} pairs")]
    StreamExhausted(usize),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, DistribError>;

/// A named axis with its ordered alphabet of labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub labels: Vec<String>,
}

impl Axis {
    pub fn new<N: Into<String>, L: ToString>(name: N, labels: &[L]) -> Self {
        Axis {
            name: name.into(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
        }
    }

    /// Axis with labels `"0"`, `"1"`, ..., `n-1`.
    pub fn range<N: Into<String>>(name: N, n: usize) -> Self {
        Axis {
            name: name.into(),
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn label_index(&self, label: &str) -> Result<usize> {
        self.position(label).ok_or_else(|| DistribError::UnknownLabel {
            axis: self.name.clone(),
            label: label.to_string(),
        })
    }
}

fn validate_axes(axes: &[Axis]) -> Result<()> {
    let mut seen = HashSet::new();
    for axis in axes {
        if !seen.insert(axis.name.as_str()) {
            return Err(DistribError::DuplicateAxis(axis.name.clone()));
        }
        if axis.labels.is_empty() {
            return Err(DistribError::EmptyAlphabet(axis.name.clone()));
        }
        let mut labels = HashSet::new();
        for l in &axis.labels {
            if !labels.insert(l.as_str()) {
                return Err(DistribError::DuplicateLabel {
                    axis: axis.name.clone(),
                    label: l.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Mixed-radix indexing for row-major tables (first axis most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Radix {
    pub fn new(shape: &[usize]) -> Self {
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        let len = shape.iter().product();
        Radix {
            shape: shape.to_vec(),
            strides,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn flat(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = flat / s;
            flat %= s;
        }
        out
    }

    pub fn digit(&self, flat: usize, position: usize) -> usize {
        (flat / self.strides[position]) % self.shape[position]
    }

    /// For every flat index, the flat index of the sub-table over `positions`
    /// (in the order given).
    pub fn projection(&self, positions: &[usize]) -> Vec<usize> {
        let sub = Radix::new(&positions.iter().map(|&p| self.shape[p]).collect::<Vec<_>>());
        (0..self.len)
            .map(|i| {
                positions
                    .iter()
                    .zip(&sub.strides)
                    .map(|(&p, s)| self.digit(i, p) * s)
                    .sum()
            })
            .collect()
    }
}

/// Nonnegative table over a product of named alphabets, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct FiniteDistribution {
    axes: Vec<Axis>,
    weights: Vec<f64>,
    #[serde(skip)]
    radix: Radix,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    axes: Vec<Axis>,
    weights: Vec<f64>,
}

impl TryFrom<RawDistribution> for FiniteDistribution {
    type Error = DistribError;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        FiniteDistribution::from_table(raw.axes, raw.weights)
    }
}

impl From<FiniteDistribution> for RawDistribution {
    fn from(d: FiniteDistribution) -> Self {
        RawDistribution {
            axes: d.axes,
            weights: d.weights,
        }
    }
}

impl FiniteDistribution {
    /// Validated constructor. Weights are row-major over `axes`.
    pub fn from_table(axes: Vec<Axis>, weights: Vec<f64>) -> Result<Self> {
        validate_axes(&axes)?;
        let radix = Radix::new(&axes.iter().map(Axis::len).collect::<Vec<_>>());
        if weights.len() != radix.len() {
            return Err(DistribError::Arity {
                expected: radix.len(),
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(DistribError::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DistribError::NotNormalized { sum });
        }
        Ok(FiniteDistribution {
            axes,
            weights,
            radix,
        })
    }

    /// Builds from nonnegative masses, dividing by their total.
    pub fn from_masses(axes: Vec<Axis>, mut masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(DistribError::ZeroProbabilityCondition(total));
        }
        for m in masses.iter_mut() {
            *m /= total;
        }
        Self::from_table(axes, masses)
    }

    pub fn uniform(axes: Vec<Axis>) -> Result<Self> {
        let n: usize = axes.iter().map(Axis::len).product();
        Self::from_table(axes, vec![1.0 / n.max(1) as f64; n])
    }

    /// Point mass on the given label tuple.
    pub fn point_mass(axes: Vec<Axis>, labels: &[&str]) -> Result<Self> {
        validate_axes(&axes)?;
        let radix = Radix::new(&axes.iter().map(Axis::len).collect::<Vec<_>>());
        if labels.len() != axes.len() {
            return Err(DistribError::Arity {
                expected: axes.len(),
                got: labels.len(),
            });
        }
        let digits = axes
            .iter()
            .zip(labels)
            .map(|(a, l)| a.label_index(l))
            .collect::<Result<Vec<_>>>()?;
        let mut w = vec![0.0; radix.len()];
        w[radix.flat(&digits)] = 1.0;
        Self::from_table(axes, w)
    }

    /// Full-support random table: Dirichlet(1, ..., 1) via normalized
    /// exponentials.
    pub fn random<R: Rng + ?Sized>(axes: Vec<Axis>, rng: &mut R) -> Result<Self> {
        let n: usize = axes.iter().map(Axis::len).product();
        let masses = dirichlet_masses(n, rng);
        Self::from_table(axes, masses)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radix(&self) -> &Radix {
        &self.radix
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn axis_names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn axis_position(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| DistribError::UnknownAxis(name.to_string()))
    }

    pub fn axis(&self, name: &str) -> Result<&Axis> {
        Ok(&self.axes[self.axis_position(name)?])
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(DistribError::DuplicateAxis(n.to_string()));
                }
                self.axis_position(n)
            })
            .collect()
    }

    /// Label indices of a flat index.
    pub fn digits(&self, flat: usize) -> Vec<usize> {
        self.radix.digits(flat)
    }

    pub fn flat_index(&self, digits: &[usize]) -> usize {
        self.radix.flat(digits)
    }

    /// Labels of a flat index.
    pub fn labels_of(&self, flat: usize) -> Vec<&str> {
        self.digits(flat)
            .into_iter()
            .zip(&self.axes)
            .map(|(d, a)| a.labels[d].as_str())
            .collect()
    }

    /// Probability of a full label tuple.
    pub fn prob(&self, labels: &[&str]) -> Result<f64> {
        if labels.len() != self.axes.len() {
            return Err(DistribError::Arity {
                expected: self.axes.len(),
                got: labels.len(),
            });
        }
        let digits = self
            .axes
            .iter()
            .zip(labels)
            .map(|(a, l)| a.label_index(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.weights[self.radix.flat(&digits)])
    }

    fn check_same_axes(&self, other: &Self) -> Result<()> {
        if self.axes != other.axes {
            return Err(DistribError::AxisMismatch(format!(
                "{:?} vs {:?}",
                self.axis_names(),
                other.axis_names()
            )));
        }
        Ok(())
    }

    /// Σ |P − Q| over the common table.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_axes(other)?;
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Half the ℓ1 distance.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        Ok(0.5 * self.l1_distance(other)?)
    }

    /// Marginal over `names`, with axes in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<Self> {
        if names.is_empty() {
            return Err(DistribError::InvalidArgument(
                "marginal over an empty axis set".into(),
            ));
        }
        let pos = self.positions(names)?;
        let axes: Vec<Axis> = pos.iter().map(|&p| self.axes[p].clone()).collect();
        let proj = self.radix.projection(&pos);
        let mut w = vec![0.0; axes.iter().map(Axis::len).product()];
        for (i, &p) in proj.iter().enumerate() {
            w[p] += self.weights[i];
        }
        Ok(FiniteDistribution {
            radix: Radix::new(&axes.iter().map(Axis::len).collect::<Vec<_>>()),
            axes,
            weights: w,
        })
    }

    /// Same table with the axes permuted to `names` (which must list every axis).
    pub fn reorder(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.axes.len() {
            return Err(DistribError::AxisMismatch(format!(
                "reorder needs all {} axes",
                self.axes.len()
            )));
        }
        self.marginal(names)
    }

    /// Restriction to `axis = label`; the conditioned axis is dropped.
    pub fn condition_on_value(&self, axis: &str, label: &str) -> Result<Self> {
        let pos = self.axis_position(axis)?;
        let li = self.axes[pos].label_index(label)?;
        let mass: f64 = (0..self.len())
            .filter(|&i| self.radix.digit(i, pos) == li)
            .map(|i| self.weights[i])
            .sum();
        if mass < MIN_CONDITION_MASS {
            return Err(DistribError::ZeroProbabilityCondition(mass));
        }
        let rest: Vec<usize> = (0..self.axes.len()).filter(|&p| p != pos).collect();
        if rest.is_empty() {
            return Err(DistribError::InvalidArgument(
                "conditioning on the only axis leaves nothing".into(),
            ));
        }
        let axes: Vec<Axis> = rest.iter().map(|&p| self.axes[p].clone()).collect();
        let proj = self.radix.projection(&rest);
        let mut w = vec![0.0; axes.iter().map(Axis::len).product()];
        for i in 0..self.len() {
            if self.radix.digit(i, pos) == li {
                w[proj[i]] += self.weights[i] / mass;
            }
        }
        Ok(FiniteDistribution {
            radix: Radix::new(&axes.iter().map(Axis::len).collect::<Vec<_>>()),
            axes,
            weights: w,
        })
    }

    /// Restriction to an event; all axes are kept.
    pub fn condition_on_event(&self, event: &Event) -> Result<Self> {
        let mask = event.mask(self)?;
        let mass: f64 = mask
            .iter()
            .zip(&self.weights)
            .filter(|(m, _)| **m)
            .map(|(_, w)| w)
            .sum();
        if mass < MIN_CONDITION_MASS {
            return Err(DistribError::ZeroProbabilityCondition(mass));
        }
        let w = mask
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| if *m { w / mass } else { 0.0 })
            .collect();
        Ok(FiniteDistribution {
            axes: self.axes.clone(),
            weights: w,
            radix: self.radix.clone(),
        })
    }

    pub fn condition(&self, on: &Condition) -> Result<Self> {
        match on {
            Condition::Value { axis, label } => self.condition_on_value(axis, label),
            Condition::Event(e) => self.condition_on_event(e),
        }
    }

    pub fn event_probability(&self, event: &Event) -> Result<f64> {
        let mask = event.mask(self)?;
        Ok(mask
            .iter()
            .zip(&self.weights)
            .filter(|(m, _)| **m)
            .map(|(_, w)| w)
            .sum())
    }

    /// Joint (P·K)(x, z) = P(x) K(z | x_source), axes of P followed by the
    /// kernel's target axes.
    pub fn compose(&self, kernel: &Kernel) -> Result<Self> {
        let mut src_pos = Vec::with_capacity(kernel.source.len());
        for axis in &kernel.source {
            let p = self.axis_position(&axis.name).map_err(|_| {
                DistribError::AxisMismatch(format!("kernel source `{}` not in P", axis.name))
            })?;
            if self.axes[p] != *axis {
                return Err(DistribError::AxisMismatch(format!(
                    "kernel source `{}` has a different alphabet",
                    axis.name
                )));
            }
            src_pos.push(p);
        }
        for axis in &kernel.target {
            if self.axis_position(&axis.name).is_ok() {
                return Err(DistribError::AxisMismatch(format!(
                    "kernel target `{}` already in P",
                    axis.name
                )));
            }
        }
        let proj = self.radix.projection(&src_pos);
        let nt = kernel.target_len();
        let mut w = Vec::with_capacity(self.len() * nt);
        for (i, &s) in proj.iter().enumerate() {
            let row = kernel.row(s);
            w.extend(row.iter().map(|k| self.weights[i] * k));
        }
        let mut axes = self.axes.clone();
        axes.extend(kernel.target.iter().cloned());
        Ok(FiniteDistribution {
            radix: Radix::new(&axes.iter().map(Axis::len).collect::<Vec<_>>()),
            axes,
            weights: w,
        })
    }

    /// Product distribution P ⊗ Q (axes of P then Q).
    pub fn product(&self, other: &Self) -> Result<Self> {
        let k = Kernel::constant(vec![], other)?;
        self.compose(&k)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| -w * w.log2())
            .sum()
    }

    fn entropy_of(&self, names: &[&str]) -> Result<f64> {
        if names.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginal(names)?.entropy())
    }

    /// I(A : B) in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// I(A : B | C) in bits, via H(AC) + H(BC) − H(ABC) − H(C).
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        given: &[&str],
    ) -> Result<f64> {
        let join = |x: &[&str], y: &[&str]| -> Vec<String> {
            x.iter().chain(y.iter()).map(|s| s.to_string()).collect()
        };
        let ac = join(a, given);
        let bc = join(b, given);
        let mut abc = join(a, b);
        abc.extend(given.iter().map(|s| s.to_string()));
        fn r(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        Ok(self.entropy_of(&r(&ac))? + self.entropy_of(&r(&bc))?
            - self.entropy_of(&r(&abc))?
            - self.entropy_of(given)?)
    }

    /// Classical relative entropy D(P‖Q) in bits; +∞ on support violation.
    pub fn relative_entropy(&self, other: &Self) -> Result<f64> {
        self.check_same_axes(other)?;
        let mut s = 0.0;
        for (p, q) in self.weights.iter().zip(&other.weights) {
            if *p > 0.0 {
                if *q <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                s += p * (p / q).log2();
            }
        }
        Ok(s)
    }

    /// Renames an axis.
    pub fn rename_axis(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.axis_position(from)?;
        let mut axes = self.axes.clone();
        axes[pos].name = to.to_string();
        validate_axes(&axes)?;
        Ok(FiniteDistribution {
            axes,
            weights: self.weights.clone(),
            radix: self.radix.clone(),
        })
    }

    /// Same weights viewed over a single axis whose labels are the joined
    /// label tuples.
    pub fn flatten(&self, name: &str, sep: &str) -> Self {
        let labels = (0..self.len()).map(|i| self.labels_of(i).join(sep)).collect();
        let axes = vec![Axis {
            name: name.to_string(),
            labels,
        }];
        FiniteDistribution {
            radix: Radix::new(&[self.len()]),
            axes,
            weights: self.weights.clone(),
        }
    }
}

/// Dirichlet(1, ..., 1) masses.
pub fn dirichlet_masses<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut m: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln() + 1e-300
        })
        .collect();
    let total: f64 = m.iter().sum();
    for x in m.iter_mut() {
        *x /= total;
    }
    m
}

/// What to condition on.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Value { axis: String, label: String },
    Event(Event),
}

/// Indicator over the product of a subset of axes (row-major in the listed order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub axes: Vec<String>,
    pub indicator: Vec<bool>,
}

impl Event {
    pub fn new(axes: Vec<String>, indicator: Vec<bool>) -> Self {
        Event { axes, indicator }
    }

    /// Event that holds everywhere on `dist`.
    pub fn full(dist: &FiniteDistribution) -> Self {
        Event {
            axes: dist.axes.iter().map(|a| a.name.clone()).collect(),
            indicator: vec![true; dist.len()],
        }
    }

    /// Builds the indicator from a predicate over label indices of `axes`.
    pub fn from_fn<F: Fn(&[usize]) -> bool>(
        dist: &FiniteDistribution,
        axes: &[&str],
        f: F,
    ) -> Result<Self> {
        let pos = dist.positions(axes)?;
        let radix = Radix::new(&pos.iter().map(|&p| dist.axes[p].len()).collect::<Vec<_>>());
        let indicator = (0..radix.len()).map(|i| f(&radix.digits(i))).collect();
        Ok(Event {
            axes: axes.iter().map(|s| s.to_string()).collect(),
            indicator,
        })
    }

    pub fn complement(&self) -> Self {
        Event {
            axes: self.axes.clone(),
            indicator: self.indicator.iter().map(|b| !b).collect(),
        }
    }

    /// Indicator lifted to every flat index of `dist`.
    pub fn mask(&self, dist: &FiniteDistribution) -> Result<Vec<bool>> {
        let names: Vec<&str> = self.axes.iter().map(String::as_str).collect();
        if names.is_empty() {
            return Err(DistribError::InvalidArgument("event over no axes".into()));
        }
        let pos = dist.positions(&names)?;
        let expected: usize = pos.iter().map(|&p| dist.axes[p].len()).product();
        if self.indicator.len() != expected {
            return Err(DistribError::Arity {
                expected,
                got: self.indicator.len(),
            });
        }
        let proj = dist.radix.projection(&pos);
        Ok(proj.into_iter().map(|p| self.indicator[p]).collect())
    }
}

/// Conditional distribution of target axes given source axes, one row per
/// source tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct Kernel {
    source: Vec<Axis>,
    target: Vec<Axis>,
    rows: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawKernel {
    source: Vec<Axis>,
    target: Vec<Axis>,
    rows: Vec<f64>,
}

impl TryFrom<RawKernel> for Kernel {
    type Error = DistribError;
    fn try_from(raw: RawKernel) -> Result<Self> {
        Kernel::new(raw.source, raw.target, raw.rows)
    }
}

impl From<Kernel> for RawKernel {
    fn from(k: Kernel) -> Self {
        RawKernel {
            source: k.source,
            target: k.target,
            rows: k.rows,
        }
    }
}

impl Kernel {
    /// `rows` is source-major: row `s` holds the target table for source tuple `s`.
    pub fn new(source: Vec<Axis>, target: Vec<Axis>, rows: Vec<f64>) -> Result<Self> {
        let mut all = source.clone();
        all.extend(target.iter().cloned());
        validate_axes(&all)?;
        if target.is_empty() {
            return Err(DistribError::InvalidArgument("kernel without target axes".into()));
        }
        let ns: usize = source.iter().map(Axis::len).product();
        let nt: usize = target.iter().map(Axis::len).product();
        if rows.len() != ns * nt {
            return Err(DistribError::Arity {
                expected: ns * nt,
                got: rows.len(),
            });
        }
        for (index, &value) in rows.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(DistribError::NegativeWeight { index, value });
            }
        }
        for r in 0..ns {
            let sum: f64 = rows[r * nt..(r + 1) * nt].iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(DistribError::NotNormalized { sum });
            }
        }
        Ok(Kernel {
            source,
            target,
            rows,
        })
    }

    /// Kernel ignoring its (possibly empty) source and always returning `dist`.
    pub fn constant(source: Vec<Axis>, dist: &FiniteDistribution) -> Result<Self> {
        let ns: usize = source.iter().map(Axis::len).product();
        let rows = (0..ns).flat_map(|_| dist.weights.iter().copied()).collect();
        Kernel::new(source, dist.axes.clone(), rows)
    }

    /// Deterministic copy of a source axis into a new axis `target_name`.
    pub fn copy(source: &Axis, target_name: &str) -> Result<Self> {
        let n = source.len();
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        let target = Axis {
            name: target_name.to_string(),
            labels: source.labels.clone(),
        };
        Kernel::new(vec![source.clone()], vec![target], rows)
    }

    /// Random full-support kernel.
    pub fn random<R: Rng + ?Sized>(
        source: Vec<Axis>,
        target: Vec<Axis>,
        rng: &mut R,
    ) -> Result<Self> {
        let ns: usize = source.iter().map(Axis::len).product();
        let nt: usize = target.iter().map(Axis::len).product();
        let rows = (0..ns).flat_map(|_| dirichlet_masses(nt, rng)).collect();
        Kernel::new(source, target, rows)
    }

    /// P_{target | given} extracted from a joint. Rows for zero-mass source
    /// tuples are uniform; they never carry weight when composed back with a
    /// marginal of the same joint.
    pub fn conditional(dist: &FiniteDistribution, given: &[&str], target: &[&str]) -> Result<Self> {
        let mut names: Vec<&str> = given.to_vec();
        names.extend_from_slice(target);
        let joint = dist.marginal(&names)?;
        let source: Vec<Axis> = joint.axes[..given.len()].to_vec();
        let tgt: Vec<Axis> = joint.axes[given.len()..].to_vec();
        let ns: usize = source.iter().map(Axis::len).product();
        let nt: usize = tgt.iter().map(Axis::len).product();
        let mut rows = joint.weights.clone();
        for r in 0..ns {
            let row = &mut rows[r * nt..(r + 1) * nt];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            } else {
                row.iter_mut().for_each(|x| *x = 1.0 / nt as f64);
            }
        }
        Kernel::new(source, tgt, rows)
    }

    pub fn source(&self) -> &[Axis] {
        &self.source
    }

    pub fn target(&self) -> &[Axis] {
        &self.target
    }

    pub fn target_len(&self) -> usize {
        self.target.iter().map(Axis::len).product()
    }

    pub fn source_len(&self) -> usize {
        self.source.iter().map(Axis::len).product()
    }

    pub fn row(&self, source_index: usize) -> &[f64] {
        let nt = self.target_len();
        &self.rows[source_index * nt..(source_index + 1) * nt]
    }

    /// Row for a source tuple as a distribution over the target axes.
    pub fn row_distribution(&self, source_index: usize) -> FiniteDistribution {
        FiniteDistribution {
            axes: self.target.clone(),
            weights: self.row(source_index).to_vec(),
            radix: Radix::new(&self.target.iter().map(Axis::len).collect::<Vec<_>>()),
        }
    }
}
