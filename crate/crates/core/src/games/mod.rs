//! Two-player non-local games: model, JSON form, strategies and values.

pub mod bounds;
pub mod classical;
pub mod seesaw;
pub mod transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distrib::{Axis, FiniteDistribution};
use crate::qmath::{HilbertSpace, Povm, PureState, QmathError};

pub use bounds::{theorem_bound, BoundParams, Thresholds};
pub use classical::classical_value_exact;
pub use seesaw::{entangled_value_seesaw, SeesawConfig, SeesawResult};
pub use transform::{anchor_game, repeat_game, AnchorSide, AnchorSpec, DEFAULT_ANCHOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("bad input distribution: {0}")]
    BadDistribution(String),
    #[error("bad predicate: {0}")]
    PredicateShape(String),
    #[error("empty alphabet `{0}`")]
    EmptyAlphabet(&'static str),
    #[error("duplicate label `{label}` in alphabet `{alphabet}`")]
    DuplicateLabel { alphabet: &'static str, label: String },
    #[error("enumeration needs {0:e} strategy pairs")]
    EnumerationGuard(f64),
    #[error("strategy does not fit the game: {0}")]
    ShapeMismatch(String),
    #[error("anchor label `{0}` already in use")]
    LabelCollision(String),
    #[error("repeated predicate table would have {0:e} entries")]
    SizeGuard(f64),
    #[error("parameter out of range: {0}")]
    ParamRange(String),
    #[error(transparent)]
    Qmath(#[from] QmathError),
}

pub type Result<T> = std::result::Result<T, GameError>;

/// A game (q, X×Y, A×B, V). The predicate is stored as a flat table indexed
/// by ((x·|Y| + y)·|A| + a)·|B| + b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGame", into = "RawGame")]
pub struct Game {
    x: Vec<String>,
    y: Vec<String>,
    a: Vec<String>,
    b: Vec<String>,
    q: FiniteDistribution,
    win: Vec<bool>,
}

/// JSON form. Either `win` (accepted tuples) or `predicate` (full nested
/// boolean table indexed [x][y][a][b]) must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawGame {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub q: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub win: Option<Vec<[String; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<Vec<Vec<Vec<Vec<bool>>>>>,
}

impl TryFrom<RawGame> for Game {
    type Error = GameError;
    fn try_from(raw: RawGame) -> Result<Self> {
        validate_game(raw)
    }
}

impl From<Game> for RawGame {
    fn from(g: Game) -> Self {
        let ny = g.y.len();
        let q = (0..g.x.len())
            .map(|x| g.q.weights()[x * ny..(x + 1) * ny].to_vec())
            .collect();
        let mut win = Vec::new();
        for x in 0..g.x.len() {
            for y in 0..ny {
                for a in 0..g.a.len() {
                    for b in 0..g.b.len() {
                        if g.wins(x, y, a, b) {
                            win.push([g.x[x].clone(), g.y[y].clone(), g.a[a].clone(), g.b[b].clone()]);
                        }
                    }
                }
            }
        }
        RawGame {
            x: g.x,
            y: g.y,
            a: g.a,
            b: g.b,
            q,
            win: Some(win),
            predicate: None,
        }
    }
}

fn check_alphabet(name: &'static str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(GameError::EmptyAlphabet(name));
    }
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(GameError::DuplicateLabel {
                alphabet: name,
                label: l.clone(),
            });
        }
    }
    Ok(())
}

fn find(name: &'static str, labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| GameError::PredicateShape(format!("unknown {name} label `{label}`")))
}

/// Checks every invariant of the raw description. Label order is the order
/// given in the file.
pub fn validate_game(raw: RawGame) -> Result<Game> {
    check_alphabet("x", &raw.x)?;
    check_alphabet("y", &raw.y)?;
    check_alphabet("a", &raw.a)?;
    check_alphabet("b", &raw.b)?;
    let (nx, ny, na, nb) = (raw.x.len(), raw.y.len(), raw.a.len(), raw.b.len());
    if raw.q.len() != nx || raw.q.iter().any(|r| r.len() != ny) {
        return Err(GameError::BadDistribution(format!("q must be {nx}×{ny}")));
    }
    let weights: Vec<f64> = raw.q.iter().flatten().copied().collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(GameError::BadDistribution("non-finite weight".into()));
    }
    let q = FiniteDistribution::from_table(
        vec![Axis::new("X", &raw.x), Axis::new("Y", &raw.y)],
        weights,
    )
    .map_err(|e| GameError::BadDistribution(e.to_string()))?;
    let mut win = vec![false; nx * ny * na * nb];
    match (raw.win, raw.predicate) {
        (Some(list), None) => {
            for t in list {
                let idx = (((find("x", &raw.x, &t[0])? * ny + find("y", &raw.y, &t[1])?) * na
                    + find("a", &raw.a, &t[2])?)
                    * nb)
                    + find("b", &raw.b, &t[3])?;
                if win[idx] {
                    return Err(GameError::PredicateShape(format!("tuple {t:?} listed twice")));
                }
                win[idx] = true;
            }
        }
        (None, Some(table)) => {
            let shape_ok = table.len() == nx
                && table.iter().all(|r| {
                    r.len() == ny && r.iter().all(|s| s.len() == na && s.iter().all(|t| t.len() == nb))
                });
            if !shape_ok {
                return Err(GameError::PredicateShape(format!(
                    "predicate must be {nx}×{ny}×{na}×{nb}"
                )));
            }
            for (i, v) in table.into_iter().flatten().flatten().flatten().enumerate() {
                win[i] = v;
            }
        }
        _ => {
            return Err(GameError::PredicateShape(
                "exactly one of `win` and `predicate` is required".into(),
            ))
        }
    }
    Ok(Game {
        x: raw.x,
        y: raw.y,
        a: raw.a,
        b: raw.b,
        q,
        win,
    })
}

impl Game {
    /// Builds a game from a predicate function on indices.
    pub fn from_fn<F: Fn(usize, usize, usize, usize) -> bool>(
        x: Vec<String>,
        y: Vec<String>,
        a: Vec<String>,
        b: Vec<String>,
        q: Vec<f64>,
        pred: F,
    ) -> Result<Game> {
        let (nx, ny, na, nb) = (x.len(), y.len(), a.len(), b.len());
        let predicate = (0..nx)
            .map(|xi| {
                (0..ny)
                    .map(|yi| {
                        (0..na)
                            .map(|ai| (0..nb).map(|bi| pred(xi, yi, ai, bi)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        if ny == 0 || q.len() != nx * ny {
            return Err(GameError::BadDistribution(format!("q must have {} entries", nx * ny)));
        }
        let q = q.chunks(ny).map(<[f64]>::to_vec).collect();
        validate_game(RawGame {
            x,
            y,
            a,
            b,
            q,
            win: None,
            predicate: Some(predicate),
        })
    }

    /// CHSH: uniform inputs, win iff a ⊕ b = x ∧ y.
    pub fn chsh() -> Game {
        let bits = || vec!["0".to_string(), "1".to_string()];
        Game::from_fn(bits(), bits(), bits(), bits(), vec![0.25; 4], |x, y, a, b| {
            (a ^ b) == (x & y)
        })
        .expect("CHSH is well formed")
    }

    pub fn from_json(text: &str) -> std::result::Result<Game, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("games serialize")
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y
    }

    pub fn a_labels(&self) -> &[String] {
        &self.a
    }

    pub fn b_labels(&self) -> &[String] {
        &self.b
    }

    /// (|X|, |Y|, |A|, |B|).
    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.x.len(), self.y.len(), self.a.len(), self.b.len())
    }

    /// Input distribution over axes X, Y.
    pub fn q(&self) -> &FiniteDistribution {
        &self.q
    }

    pub fn q_at(&self, x: usize, y: usize) -> f64 {
        self.q.weights()[x * self.y.len() + y]
    }

    pub fn wins(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.win[((x * self.y.len() + y) * self.a.len() + a) * self.b.len() + b]
    }

    pub(crate) fn from_parts(
        x: Vec<String>,
        y: Vec<String>,
        a: Vec<String>,
        b: Vec<String>,
        q: FiniteDistribution,
        win: Vec<bool>,
    ) -> Game {
        Game { x, y, a, b, q, win }
    }
}

/// g: X → A and h: Y → B as label indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub g: Vec<usize>,
    pub h: Vec<usize>,
}

/// Shared state on factors "A", "B" of dimension d each, one POVM per input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntangledStrategy {
    pub dim: usize,
    pub state: PureState,
    pub alice: Vec<Povm>,
    pub bob: Vec<Povm>,
}

impl EntangledStrategy {
    pub fn local_space(d: usize) -> std::result::Result<HilbertSpace, QmathError> {
        HilbertSpace::of(&[("A", d)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Deterministic(DeterministicStrategy),
    Entangled(EntangledStrategy),
}

/// Exact expected win probability.
pub fn strategy_value(game: &Game, strategy: &Strategy) -> Result<f64> {
    let (nx, ny, na, nb) = game.sizes();
    match strategy {
        Strategy::Deterministic(s) => {
            if s.g.len() != nx || s.h.len() != ny || s.g.iter().any(|&a| a >= na) || s.h.iter().any(|&b| b >= nb) {
                return Err(GameError::ShapeMismatch("deterministic strategy".into()));
            }
            let mut v = 0.0;
            for x in 0..nx {
                for y in 0..ny {
                    if game.wins(x, y, s.g[x], s.h[y]) {
                        v += game.q_at(x, y);
                    }
                }
            }
            Ok(v)
        }
        Strategy::Entangled(s) => {
            let d = s.dim;
            let shape_ok = s.state.vector().len() == d * d
                && s.alice.len() == nx
                && s.bob.len() == ny
                && s.alice.iter().all(|p| p.len() == na && p.space().dim() == d)
                && s.bob.iter().all(|p| p.len() == nb && p.space().dim() == d);
            if !shape_ok {
                return Err(GameError::ShapeMismatch("entangled strategy".into()));
            }
            let m = seesaw::state_matrix(s.state.vector(), d);
            Ok(seesaw::objective(game, &m, &s.alice, &s.bob).clamp(0.0, 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chsh_raw() -> RawGame {
        serde_json::from_str(&Game::chsh().to_json()).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let g = Game::chsh();
        let back: Game = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn validation_errors() {
        let mut raw = chsh_raw();
        raw.q[0][0] = 0.15;
        assert!(matches!(validate_game(raw), Err(GameError::BadDistribution(_))));

        let mut raw = chsh_raw();
        raw.win = None;
        let mut table = vec![vec![vec![vec![true; 2]; 2]; 2]; 2];
        table[1][1][1].pop();
        raw.predicate = Some(table);
        assert!(matches!(validate_game(raw), Err(GameError::PredicateShape(_))));

        let mut raw = chsh_raw();
        raw.a.clear();
        assert!(matches!(validate_game(raw), Err(GameError::EmptyAlphabet("a"))));
    }

    #[test]
    fn constant_strategy_on_chsh() {
        let s = Strategy::Deterministic(DeterministicStrategy {
            g: vec![0, 0],
            h: vec![0, 0],
        });
        assert!((strategy_value(&Game::chsh(), &s).unwrap() - 0.75).abs() < 1e-15);
    }
}
