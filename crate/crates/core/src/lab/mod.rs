//! Seeded verification battery over every classical, quantum and breaker check.
//!
//! Trial `t` of fact number `f` draws its instance from
//! `rng::stream(seed, rng::pair(f, t))`, so a report depends only on the
//! configuration and never on scheduling.

pub mod generators;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::breaker::{
    breaking_gap, build_joint, mismatch_closed_form, mismatch_probability, verify_marginal, BreakerError,
};
use crate::distrib::facts::{verify_classical_fact, ClassicalFact, ClassicalInstance};
use crate::distrib::{DistribError, FiniteDistribution};
use crate::qmath::facts::{evaluate_quantum_fact, FactOutcome, OutcomeKind, QuantumFact, QuantumInstance};
use crate::qmath::QmathError;
use crate::rng;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration out of range: {0}")]
    ConfigRange(String),
    #[error(transparent)]
    Distrib(#[from] DistribError),
    #[error(transparent)]
    Qmath(#[from] QmathError),
    #[error(transparent)]
    Breaker(#[from] BreakerError),
}

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Classical,
    Quantum,
    Breaker,
    All,
}

impl FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Suite::Classical),
            "quantum" => Ok(Suite::Quantum),
            "breaker" => Ok(Suite::Breaker),
            "all" => Ok(Suite::All),
            _ => Err(LabError::ConfigRange(format!("unknown suite `{s}`"))),
        }
    }
}

/// Invariants of the correlation-breaking joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BreakerCheck {
    /// The (X, Y) marginal equals q.
    #[serde(rename = "BREAKER_MARGINAL")]
    Marginal,
    /// I(X:Y | D, G) = 0.
    #[serde(rename = "BREAKER_INDEPENDENCE")]
    Independence,
    /// Pr[mismatch] matches its closed form and stays below ζ/3.
    #[serde(rename = "BREAKER_MISMATCH")]
    Mismatch,
    /// 2ζ/3 ≤ Pr[Y = y*] = 1 − (1 − ζ)^{2/3} ≤ ζ.
    #[serde(rename = "BREAKER_SANDWICH")]
    Sandwich,
}

impl BreakerCheck {
    pub const ALL: [BreakerCheck; 4] = [
        BreakerCheck::Marginal,
        BreakerCheck::Independence,
        BreakerCheck::Mismatch,
        BreakerCheck::Sandwich,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BreakerCheck::Marginal => "BREAKER_MARGINAL",
            BreakerCheck::Independence => "BREAKER_INDEPENDENCE",
            BreakerCheck::Mismatch => "BREAKER_MISMATCH",
            BreakerCheck::Sandwich => "BREAKER_SANDWICH",
        }
    }
}

/// One base distribution and ζ, checked against a single invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakerInstance {
    #[serde(rename = "fact")]
    pub check: BreakerCheck,
    pub p: FiniteDistribution,
    pub zeta: f64,
}

impl BreakerInstance {
    /// Signed margin; negative means the invariant fails.
    pub fn margin(&self) -> Result<f64> {
        let j = build_joint(&self.p, self.zeta)?;
        Ok(match self.check {
            BreakerCheck::Marginal => -verify_marginal(&j)?,
            BreakerCheck::Independence => -breaking_gap(&j)?,
            BreakerCheck::Mismatch => {
                let m = mismatch_probability(&j);
                (-(m - mismatch_closed_form(self.zeta)).abs()).min(self.zeta / 3.0 - m)
            }
            BreakerCheck::Sandwich => {
                let z = self.zeta;
                let star = j.anchor_probability();
                let exact = 1.0 - (1.0 - z).powf(2.0 / 3.0);
                (star - 2.0 * z / 3.0).min(z - star).min(-(star - exact).abs())
            }
        })
    }
}

/// Any fact identifier the battery knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactId {
    Classical(ClassicalFact),
    Quantum(QuantumFact),
    Breaker(BreakerCheck),
}

impl FactId {
    /// Every fact in stream order: classical, quantum, breaker.
    pub fn all() -> Vec<FactId> {
        let mut v: Vec<FactId> = ClassicalFact::ALL.iter().map(|&f| FactId::Classical(f)).collect();
        v.extend(QuantumFact::ALL.iter().map(|&f| FactId::Quantum(f)));
        v.extend(BreakerCheck::ALL.iter().map(|&f| FactId::Breaker(f)));
        v
    }

    pub fn id(self) -> &'static str {
        match self {
            FactId::Classical(f) => f.id(),
            FactId::Quantum(f) => f.id(),
            FactId::Breaker(f) => f.id(),
        }
    }

    pub fn from_id(id: &str) -> Option<FactId> {
        FactId::all().into_iter().find(|f| f.id() == id)
    }

    pub fn in_suite(self, suite: Suite) -> bool {
        matches!(
            (suite, self),
            (Suite::All, _)
                | (Suite::Classical, FactId::Classical(_))
                | (Suite::Quantum, FactId::Quantum(_))
                | (Suite::Breaker, FactId::Breaker(_))
        )
    }

    /// Report-only facts return a signed discrepancy and never fail a run.
    pub fn report_only(self) -> bool {
        matches!(self, FactId::Quantum(f) if f.kind() == OutcomeKind::Report)
    }
}

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// An instance of any fact. Each variant carries its id under `"fact"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactInstance {
    Classical(ClassicalInstance),
    Quantum(QuantumInstance),
    Breaker(BreakerInstance),
}

impl FactInstance {
    pub fn fact(&self) -> FactId {
        match self {
            FactInstance::Classical(i) => FactId::Classical(i.fact()),
            FactInstance::Quantum(i) => FactId::Quantum(i.fact()),
            FactInstance::Breaker(i) => FactId::Breaker(i.check),
        }
    }

    /// Runs the fact's dispatcher on this instance.
    pub fn evaluate(&self) -> Result<FactOutcome> {
        Ok(match self {
            FactInstance::Classical(i) => FactOutcome {
                kind: OutcomeKind::Inequality,
                value: verify_classical_fact(i)?,
            },
            FactInstance::Quantum(i) => evaluate_quantum_fact(i)?,
            FactInstance::Breaker(i) => FactOutcome {
                kind: OutcomeKind::Inequality,
                value: i.margin()?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    pub seed: u64,
    pub trials: usize,
    pub suite: Suite,
    /// Largest classical alphabet.
    pub max_alphabet: usize,
    /// Largest number of U coordinates in HOLENSTEIN instances.
    pub max_k: usize,
    /// Largest quantum dimension (total for single systems and bipartite
    /// DIM_UB states; per factor elsewhere).
    pub max_dim: usize,
    /// Violation threshold for classical and breaker margins.
    pub classical_tolerance: f64,
    /// Violation threshold for quantum margins.
    pub quantum_tolerance: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            seed: 7,
            trials: 100,
            suite: Suite::All,
            max_alphabet: 4,
            max_k: 4,
            max_dim: 6,
            classical_tolerance: 1e-9,
            quantum_tolerance: 1e-8,
        }
    }
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, v: usize, lo: usize, hi: usize| {
            if v < lo || v > hi {
                Err(LabError::ConfigRange(format!("{name} = {v} outside {lo}..={hi}")))
            } else {
                Ok(())
            }
        };
        range("trials", self.trials, 0, 1_000_000)?;
        range("max_alphabet", self.max_alphabet, 2, 6)?;
        range("max_k", self.max_k, 1, 6)?;
        range("max_dim", self.max_dim, 2, 8)?;
        for (name, t) in [("classical_tolerance", self.classical_tolerance), ("quantum_tolerance", self.quantum_tolerance)] {
            if !t.is_finite() {
                return Err(LabError::ConfigRange(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, fact: FactId) -> f64 {
        match fact {
            FactId::Quantum(_) => self.quantum_tolerance,
            _ => self.classical_tolerance,
        }
    }

    pub fn facts(&self) -> Vec<FactId> {
        FactId::all().into_iter().filter(|f| f.in_suite(self.suite)).collect()
    }
}

/// A failing trial: the instance (when generation succeeded) and what went wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dump {
    pub trial: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub instance: Option<FactInstance>,
}

/// Statistics of the signed discrepancies of a report-only fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// Trials whose discrepancy is below −tolerance.
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactReport {
    pub trials: usize,
    /// Smallest margin over trials; None for report-only facts and empty runs.
    pub min_margin: Option<f64>,
    /// Trials with margin < −tolerance or an error; one dump each.
    pub violations: usize,
    pub report_only: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub discrepancy: Option<Discrepancy>,
    pub dumps: Vec<Dump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub seed: u64,
    pub config: BatteryConfig,
    pub facts: BTreeMap<String, FactReport>,
}

impl BatteryReport {
    pub fn violations(&self) -> usize {
        self.facts.values().filter(|r| !r.report_only).map(|r| r.violations).sum()
    }

    /// Pass iff no assertable fact has a violation.
    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Trial {
    instance: Option<FactInstance>,
    outcome: std::result::Result<FactOutcome, String>,
}

/// Instance generated for one (fact, trial) slot of the configuration.
pub fn trial_instance(cfg: &BatteryConfig, fact: FactId, trial: usize) -> Result<FactInstance> {
    let index = FactId::all().iter().position(|f| *f == fact).expect("known fact") as u64;
    let mut r = rng::stream(cfg.seed, rng::pair(index, trial as u64));
    generators::generate(fact, trial, cfg, &mut r)
}

fn run_trial(cfg: &BatteryConfig, fact: FactId, trial: usize) -> Trial {
    match trial_instance(cfg, fact, trial) {
        Ok(inst) => Trial {
            outcome: inst.evaluate().map_err(|e| e.to_string()),
            instance: Some(inst),
        },
        Err(e) => Trial {
            instance: None,
            outcome: Err(format!("generation failed: {e}")),
        },
    }
}

fn aggregate(fact: FactId, tol: f64, trials: Vec<Trial>) -> FactReport {
    let report_only = fact.report_only();
    let mut rep = FactReport {
        trials: trials.len(),
        min_margin: None,
        violations: 0,
        report_only,
        discrepancy: None,
        dumps: Vec::new(),
    };
    let mut values = Vec::new();
    for (t, tr) in trials.into_iter().enumerate() {
        match tr.outcome {
            Err(e) => {
                rep.violations += 1;
                rep.dumps.push(Dump { trial: t, margin: None, error: Some(e), instance: tr.instance });
            }
            Ok(out) => match out.margin() {
                None => values.push(out.value),
                Some(m) => {
                    rep.min_margin = Some(rep.min_margin.map_or(m, |v: f64| v.min(m)));
                    if m < -tol || m.is_nan() {
                        rep.violations += 1;
                        rep.dumps.push(Dump { trial: t, margin: Some(m), error: None, instance: tr.instance });
                    }
                }
            },
        }
    }
    if report_only && !values.is_empty() {
        rep.discrepancy = Some(Discrepancy {
            count: values.iter().filter(|&&v| v < -tol).count(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        });
    }
    rep
}

/// Runs `trials` seeded instances of every fact in the configured suite.
pub fn run_battery(cfg: &BatteryConfig) -> Result<BatteryReport> {
    cfg.validate()?;
    let facts = cfg.facts();
    let slots: Vec<(usize, usize)> =
        (0..facts.len()).flat_map(|f| (0..cfg.trials).map(move |t| (f, t))).collect();
    let mut results: Vec<Trial> = slots.par_iter().map(|&(f, t)| run_trial(cfg, facts[f], t)).collect();
    let mut out = BTreeMap::new();
    for fact in facts.iter().rev() {
        let tail = results.split_off(results.len() - cfg.trials);
        out.insert(fact.id().to_string(), aggregate(*fact, cfg.tolerance(*fact), tail));
    }
    Ok(BatteryReport { seed: cfg.seed, config: cfg.clone(), facts: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(suite: Suite, trials: usize) -> BatteryConfig {
        BatteryConfig { suite, trials, ..Default::default() }
    }

    #[test]
    fn zero_trials_is_an_empty_pass() {
        let r = run_battery(&cfg(Suite::All, 0)).unwrap();
        assert!(r.passed());
        assert_eq!(r.facts.len(), FactId::all().len());
        assert!(r.facts.values().all(|f| f.trials == 0 && f.min_margin.is_none()));
    }

    #[test]
    fn config_range() {
        let bad = BatteryConfig { max_dim: 9, ..Default::default() };
        assert!(matches!(run_battery(&bad), Err(LabError::ConfigRange(_))));
        let bad = BatteryConfig { quantum_tolerance: f64::NAN, ..Default::default() };
        assert!(matches!(run_battery(&bad), Err(LabError::ConfigRange(_))));
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn ids_round_trip() {
        for f in FactId::all() {
            assert_eq!(FactId::from_id(f.id()), Some(f));
        }
        assert_eq!(FactId::all().len(), 25);
    }

    #[test]
    fn every_generator_satisfies_its_hypotheses() {
        let c = cfg(Suite::All, 3);
        for f in FactId::all() {
            for t in 0..3 {
                let inst = trial_instance(&c, f, t).unwrap_or_else(|e| panic!("{f} trial {t}: {e}"));
                assert_eq!(inst.fact(), f);
                let json = serde_json::to_string(&inst).unwrap();
                let back: FactInstance = serde_json::from_str(&json).unwrap();
                assert_eq!(back.fact(), f);
                inst.evaluate().unwrap_or_else(|e| panic!("{f} trial {t}: {e}"));
            }
        }
    }

    #[test]
    fn printed_forms_report_discrepancies() {
        let r = run_battery(&BatteryConfig { suite: Suite::Quantum, trials: 2, ..Default::default() }).unwrap();
        for id in ["PINSKER_PAPER", "FVDG_PURE_LITERAL"] {
            let f = &r.facts[id];
            assert!(f.report_only && f.violations == 0);
            assert!(f.discrepancy.as_ref().unwrap().count >= 1, "{id}");
        }
    }
}
