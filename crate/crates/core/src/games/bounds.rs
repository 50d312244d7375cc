//! Right-hand sides of the direct-product and parallel-repetition bounds,
//! with the unspecified exponent constant exposed as `c`.

use serde::{Deserialize, Serialize};

use super::{GameError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "which", rename_all = "snake_case")]
pub enum BoundParams {
    /// (1 − (1−ω)⁵)^{c·ζ²k / log₂(|A|·|B|)}.
    ParRep {
        omega: f64,
        zeta: f64,
        k: u64,
        a_size: usize,
        b_size: usize,
        c: f64,
    },
    /// 1 − (1−ε)^{c·ζ⁶k / log₂|Z|}.
    Dpt {
        eps: f64,
        zeta: f64,
        k: u64,
        z_size: usize,
        c: f64,
    },
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(GameError::ParamRange(msg()))
    }
}

pub fn theorem_bound(params: &BoundParams) -> Result<f64> {
    match *params {
        BoundParams::ParRep {
            omega,
            zeta,
            k,
            a_size,
            b_size,
            c,
        } => {
            check((0.0..=1.0).contains(&omega), || format!("omega {omega} outside [0, 1]"))?;
            check(zeta > 0.0 && zeta < 1.0, || format!("zeta {zeta} outside (0, 1)"))?;
            check(a_size >= 2 && b_size >= 2, || "answer alphabets need at least 2 labels".into())?;
            check(c > 0.0 && c.is_finite(), || format!("constant {c} must be positive"))?;
            let base = 1.0 - (1.0 - omega).powi(5);
            let exponent = c * zeta * zeta * k as f64 / ((a_size * b_size) as f64).log2();
            Ok(if exponent == 0.0 { 1.0 } else { base.powf(exponent) })
        }
        BoundParams::Dpt {
            eps,
            zeta,
            k,
            z_size,
            c,
        } => {
            check((0.0..=1.0).contains(&eps), || format!("eps {eps} outside [0, 1]"))?;
            check(zeta > 0.0 && zeta < 1.0, || format!("zeta {zeta} outside (0, 1)"))?;
            check(z_size >= 2, || "output alphabet needs at least 2 labels".into())?;
            check(c > 0.0 && c.is_finite(), || format!("constant {c} must be positive"))?;
            let exponent = c * zeta.powi(6) * k as f64 / (z_size as f64).log2();
            Ok(1.0 - (1.0 - eps).powf(exponent))
        }
    }
}

/// Proof-internal thresholds δ and δ′ of the coordinate-selection lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub delta: f64,
    pub delta_prime: f64,
}

impl Thresholds {
    /// δ = ζ⁶/1440000, δ′ = δ / log₂|Z|.
    pub fn dpt(zeta: f64, z_size: usize) -> Thresholds {
        let delta = zeta.powi(6) / 1_440_000.0;
        Thresholds {
            delta,
            delta_prime: delta / (z_size as f64).log2(),
        }
    }

    /// δ = ζ²ε⁴/1440000, δ′ = δ / log₂(|A|·|B|).
    pub fn par_rep(zeta: f64, eps: f64, a_size: usize, b_size: usize) -> Thresholds {
        let delta = zeta * zeta * eps.powi(4) / 1_440_000.0;
        Thresholds {
            delta,
            delta_prime: delta / ((a_size * b_size) as f64).log2(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn par_rep(omega: f64, k: u64) -> f64 {
        theorem_bound(&BoundParams::ParRep {
            omega,
            zeta: 0.2,
            k,
            a_size: 2,
            b_size: 2,
            c: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn par_rep_examples() {
        assert_eq!(par_rep(1.0, 7), 1.0);
        assert_eq!(par_rep(0.75, 0), 1.0);
        let expected = (1.0f64 - 0.25f64.powi(5)).powf(0.2);
        assert!((par_rep(0.75, 10) - expected).abs() < 1e-15);
        assert!((par_rep(0.75, 10) - 0.999805).abs() < 5e-7);
    }

    #[test]
    fn range_errors() {
        let bad = BoundParams::Dpt {
            eps: 0.1,
            zeta: 0.0,
            k: 1,
            z_size: 2,
            c: 1.0,
        };
        assert!(matches!(theorem_bound(&bad), Err(GameError::ParamRange(_))));
    }
}
