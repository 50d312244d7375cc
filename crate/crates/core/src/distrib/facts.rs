//! Executable checks of the classical ℓ1 lemmas.
//!
//! Each instance carries exactly the objects its inequality quantifies over.
//! Both sides are evaluated by full-table enumeration and the check returns
//! `rhs - lhs`, so a negative margin is a counterexample.

use serde::{Deserialize, Serialize};

use super::{DistribError, Event, FiniteDistribution, Kernel, Result};

/// Hypothesis tolerance for structural equalities (anchoring, product form).
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassicalFact {
    MarginalL1,
    EventGap,
    Coupling,
    CondProb,
    Anchor,
    AnchorCor,
    Holenstein,
}

impl ClassicalFact {
    pub const ALL: [ClassicalFact; 7] = [
        ClassicalFact::MarginalL1,
        ClassicalFact::EventGap,
        ClassicalFact::Coupling,
        ClassicalFact::CondProb,
        ClassicalFact::Anchor,
        ClassicalFact::AnchorCor,
        ClassicalFact::Holenstein,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ClassicalFact::MarginalL1 => "MARGINAL_L1",
            ClassicalFact::EventGap => "EVENT_GAP",
            ClassicalFact::Coupling => "COUPLING",
            ClassicalFact::CondProb => "COND_PROB",
            ClassicalFact::Anchor => "ANCHOR",
            ClassicalFact::AnchorCor => "ANCHOR_COR",
            ClassicalFact::Holenstein => "HOLENSTEIN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fact", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassicalInstance {
    /// ‖P_S − Q_S‖₁ ≤ ‖P − Q‖₁.
    MarginalL1 {
        p: FiniteDistribution,
        q: FiniteDistribution,
        keep: Vec<String>,
    },
    /// |P(E) − Q(E)| ≤ ½‖P − Q‖₁.
    EventGap {
        p: FiniteDistribution,
        q: FiniteDistribution,
        event: Event,
    },
    /// ‖P_X − P_X'‖₁ ≤ 2·Pr[X ≠ X'] for a coupling over axes `X`, `X'`.
    Coupling { joint: FiniteDistribution },
    /// ‖P_{X|E} − P_{X'|E}‖₁ ≤ 2ε/α when ‖P − P'‖₁ ≤ ε and P(E) ≥ α > ε.
    CondProb {
        p: FiniteDistribution,
        q: FiniteDistribution,
        event: Event,
        alpha: f64,
        eps: f64,
    },
    /// ‖P_XYZ − P_XY·P_{Z|X,y*}‖₁ ≤ (2/α)‖P_XYZ − P_XY·P_{Z|X}‖₁ over axes
    /// `X`, `Y`, `Z` with P_XY(x, y*) = α·P_X(x).
    Anchor {
        p: FiniteDistribution,
        anchor: String,
    },
    /// ‖P_{X'Z'|y*} − P_{X'Z'}‖₁ ≤ (11/α)‖P_X'Y'Z' − P_XY·P_{Z'|X'}‖₁ where
    /// `pxy` satisfies P(x, y*) = α·P_X(x) and `target` has axes `X`, `Y`, `Z`.
    AnchorCor {
        pxy: FiniteDistribution,
        target: FiniteDistribution,
        anchor: String,
    },
    /// Σᵢ ‖P_{TUᵢV|E} − P_{TV|E}·P_{Uᵢ|T}‖₁ ≤ √(k(log|V| + log 1/Pr[E])) for
    /// P = P_T·Πᵢ P_{Uᵢ|T}·P_{V|TU} over axes `T`, `U1`..`Uk`, `V`.
    Holenstein {
        dist: FiniteDistribution,
        event: Event,
    },
}

/// Both sides of an evaluated inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

impl ClassicalInstance {
    pub fn fact(&self) -> ClassicalFact {
        match self {
            ClassicalInstance::MarginalL1 { .. } => ClassicalFact::MarginalL1,
            ClassicalInstance::EventGap { .. } => ClassicalFact::EventGap,
            ClassicalInstance::Coupling { .. } => ClassicalFact::Coupling,
            ClassicalInstance::CondProb { .. } => ClassicalFact::CondProb,
            ClassicalInstance::Anchor { .. } => ClassicalFact::Anchor,
            ClassicalInstance::AnchorCor { .. } => ClassicalFact::AnchorCor,
            ClassicalInstance::Holenstein { .. } => ClassicalFact::Holenstein,
        }
    }
}

/// Evaluates both sides of the instance's inequality.
pub fn evaluate_classical_fact(instance: &ClassicalInstance) -> Result<Sides> {
    match instance {
        ClassicalInstance::MarginalL1 { p, q, keep } => {
            let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
            Ok(Sides {
                lhs: p.marginal(&keep)?.l1_distance(&q.marginal(&keep)?)?,
                rhs: p.l1_distance(q)?,
            })
        }
        ClassicalInstance::EventGap { p, q, event } => Ok(Sides {
            lhs: (p.event_probability(event)? - q.event_probability(event)?).abs(),
            rhs: 0.5 * p.l1_distance(q)?,
        }),
        ClassicalInstance::Coupling { joint } => coupling(joint),
        ClassicalInstance::CondProb {
            p,
            q,
            event,
            alpha,
            eps,
        } => cond_prob(p, q, event, *alpha, *eps),
        ClassicalInstance::Anchor { p, anchor } => anchor_fact(p, anchor),
        ClassicalInstance::AnchorCor {
            pxy,
            target,
            anchor,
        } => anchor_cor(pxy, target, anchor),
        ClassicalInstance::Holenstein { dist, event } => holenstein(dist, event),
    }
}

/// Margin `rhs - lhs` of the instance.
pub fn verify_classical_fact(instance: &ClassicalInstance) -> Result<f64> {
    evaluate_classical_fact(instance).map(|s| s.margin())
}

fn violated(msg: impl Into<String>) -> DistribError {
    DistribError::HypothesisViolated(msg.into())
}

fn coupling(joint: &FiniteDistribution) -> Result<Sides> {
    if joint.axis_names() != ["X", "X'"] {
        return Err(violated("coupling needs axes X, X'"));
    }
    if joint.axes()[0].labels != joint.axes()[1].labels {
        return Err(violated("coupled axes must share an alphabet"));
    }
    let n = joint.axes()[0].len();
    let disagree: f64 = (0..n * n)
        .filter(|i| i / n != i % n)
        .map(|i| joint.weights()[i])
        .sum();
    let px = joint.marginal(&["X"])?;
    let pxp = joint.marginal(&["X'"])?.rename_axis("X'", "X")?;
    Ok(Sides {
        lhs: px.l1_distance(&pxp)?,
        rhs: 2.0 * disagree,
    })
}

fn cond_prob(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    event: &Event,
    alpha: f64,
    eps: f64,
) -> Result<Sides> {
    let d = p.l1_distance(q)?;
    if !(alpha > eps) || !(eps >= 0.0) {
        return Err(violated(format!("need alpha > eps, got {alpha} <= {eps}")));
    }
    if d > eps + STRUCTURE_TOL {
        return Err(violated(format!("l1 distance {d} exceeds eps {eps}")));
    }
    let pe = p.event_probability(event)?;
    if pe < alpha - STRUCTURE_TOL {
        return Err(violated(format!("P(E) = {pe} below alpha {alpha}")));
    }
    Ok(Sides {
        lhs: p
            .condition_on_event(event)?
            .l1_distance(&q.condition_on_event(event)?)?,
        rhs: 2.0 * eps / alpha,
    })
}

/// α with P_XY(x, y*) = α·P_X(x) for every x, or a hypothesis error.
pub fn anchor_mass(pxy: &FiniteDistribution, anchor: &str) -> Result<f64> {
    let pxy = pxy.marginal(&["X", "Y"])?;
    let ny = pxy.axes()[1].len();
    let ys = pxy.axes()[1]
        .position(anchor)
        .ok_or_else(|| violated(format!("anchor `{anchor}` not in Y")))?;
    let px = pxy.marginal(&["X"])?;
    let alpha = pxy.marginal(&["Y"])?.weights()[ys];
    if alpha <= 0.0 {
        return Err(violated("anchor has zero mass"));
    }
    for (x, &pxv) in px.weights().iter().enumerate() {
        let w = pxy.weights()[x * ny + ys];
        if (w - alpha * pxv).abs() > STRUCTURE_TOL {
            return Err(violated(format!(
                "P(x, y*) = {w} differs from alpha * P(x) = {}",
                alpha * pxv
            )));
        }
    }
    Ok(alpha)
}

fn require_axes(p: &FiniteDistribution, names: &[&str]) -> Result<()> {
    if p.axis_names() != names {
        return Err(violated(format!(
            "expected axes {names:?}, got {:?}",
            p.axis_names()
        )));
    }
    Ok(())
}

fn anchor_fact(p: &FiniteDistribution, anchor: &str) -> Result<Sides> {
    require_axes(p, &["X", "Y", "Z"])?;
    let alpha = anchor_mass(p, anchor)?;
    let pxy = p.marginal(&["X", "Y"])?;
    let z_given_x = Kernel::conditional(p, &["X"], &["Z"])?;
    let z_given_x_anchor = Kernel::conditional(&p.condition_on_value("Y", anchor)?, &["X"], &["Z"])?;
    Ok(Sides {
        lhs: pxy.compose(&z_given_x_anchor)?.l1_distance(p)?,
        rhs: 2.0 / alpha * pxy.compose(&z_given_x)?.l1_distance(p)?,
    })
}

fn anchor_cor(pxy: &FiniteDistribution, target: &FiniteDistribution, anchor: &str) -> Result<Sides> {
    require_axes(pxy, &["X", "Y"])?;
    require_axes(target, &["X", "Y", "Z"])?;
    if pxy.axes()[..] != target.axes()[..2] {
        return Err(violated("X/Y alphabets differ"));
    }
    let alpha = anchor_mass(pxy, anchor)?;
    let z_given_x = Kernel::conditional(target, &["X"], &["Z"])?;
    let rhs = 11.0 / alpha * pxy.compose(&z_given_x)?.l1_distance(target)?;
    let xz = target.marginal(&["X", "Z"])?;
    let xz_anchor = target.condition_on_value("Y", anchor)?;
    Ok(Sides {
        lhs: xz_anchor.l1_distance(&xz)?,
        rhs,
    })
}

/// Names `U1`..`Uk` of a Holenstein instance, checked against the layout.
fn holenstein_layout(dist: &FiniteDistribution) -> Result<Vec<String>> {
    let names = dist.axis_names();
    let k = names.len().saturating_sub(2);
    if k == 0 || names[0] != "T" || names[names.len() - 1] != "V" {
        return Err(violated("expected axes T, U1..Uk, V"));
    }
    let us: Vec<String> = (1..=k).map(|i| format!("U{i}")).collect();
    for (i, u) in us.iter().enumerate() {
        if names[i + 1] != u {
            return Err(violated("expected axes T, U1..Uk, V"));
        }
        if dist.axes()[i + 1].labels != dist.axes()[1].labels {
            return Err(violated("U axes must share an alphabet"));
        }
    }
    Ok(us)
}

fn holenstein(dist: &FiniteDistribution, event: &Event) -> Result<Sides> {
    let us = holenstein_layout(dist)?;
    let k = us.len();
    let mut tu: Vec<&str> = vec!["T"];
    tu.extend(us.iter().map(String::as_str));
    let ptu = dist.marginal(&tu)?;
    let mut product = dist.marginal(&["T"])?;
    for u in &us {
        product = product.compose(&Kernel::conditional(dist, &["T"], &[u.as_str()])?)?;
    }
    let gap = product.l1_distance(&ptu)?;
    if gap > STRUCTURE_TOL {
        return Err(violated(format!(
            "U coordinates are not conditionally independent given T (gap {gap})"
        )));
    }
    let pe = dist.event_probability(event)?;
    let cond = dist.condition_on_event(event)?;
    let tv = cond.marginal(&["T", "V"])?;
    let mut lhs = 0.0;
    for u in &us {
        let lhs_dist = cond.marginal(&["T", u.as_str(), "V"])?;
        let ui_given_t = Kernel::conditional(dist, &["T"], &[u.as_str()])?;
        let rhs_dist = tv.compose(&ui_given_t)?.reorder(&["T", u.as_str(), "V"])?;
        lhs += lhs_dist.l1_distance(&rhs_dist)?;
    }
    let v = dist.axes()[dist.axes().len() - 1].len() as f64;
    Ok(Sides {
        lhs,
        rhs: (k as f64 * (v.log2() + (1.0 / pe).log2())).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distrib::Axis;

    #[test]
    fn cond_prob_identical_distributions() {
        let p = FiniteDistribution::from_table(vec![Axis::range("X", 3)], vec![0.2, 0.3, 0.5])
            .unwrap();
        let e = Event::new(vec!["X".into()], vec![true, true, false]);
        let inst = ClassicalInstance::CondProb {
            p: p.clone(),
            q: p,
            event: e,
            alpha: 0.5,
            eps: 0.1,
        };
        let s = evaluate_classical_fact(&inst).unwrap();
        assert_eq!(s.lhs, 0.0);
        assert!((s.margin() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn cond_prob_rejects_small_alpha() {
        let p = FiniteDistribution::uniform(vec![Axis::range("X", 2)]).unwrap();
        let inst = ClassicalInstance::CondProb {
            p: p.clone(),
            q: p,
            event: Event::new(vec!["X".into()], vec![true, false]),
            alpha: 0.1,
            eps: 0.2,
        };
        assert!(matches!(
            verify_classical_fact(&inst),
            Err(DistribError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn anchor_rejects_missing_product_structure() {
        let axes = vec![Axis::range("X", 2), Axis::new("Y", &["0", "*"]), Axis::range("Z", 1)];
        let p = FiniteDistribution::from_table(axes, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let inst = ClassicalInstance::Anchor {
            p,
            anchor: "*".into(),
        };
        assert!(matches!(
            verify_classical_fact(&inst),
            Err(DistribError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn instance_json_tag() {
        let p = FiniteDistribution::uniform(vec![Axis::range("X", 2), Axis::range("X'", 2)]).unwrap();
        let inst = ClassicalInstance::Coupling { joint: p };
        let s = serde_json::to_string(&inst).unwrap();
        assert!(s.starts_with(r#"{"fact":"COUPLING""#));
        let back: ClassicalInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
        assert!((verify_classical_fact(&back).unwrap() - 1.0).abs() < 1e-15);
    }
}
