//! Anchoring and parallel repetition.

use serde::{Deserialize, Serialize};

use super::{Game, GameError, Result};
use crate::distrib::{Axis, FiniteDistribution};

pub const DEFAULT_ANCHOR: &str = "__anchor__";
/// Largest (|X||Y||A||B|)^k accepted by [`repeat_game`].
pub const REPEAT_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorSide {
    X,
    Y,
    Both,
}

impl std::str::FromStr for AnchorSide {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "x" => Ok(AnchorSide::X),
            "y" => Ok(AnchorSide::Y),
            "both" => Ok(AnchorSide::Both),
            other => Err(format!("unknown side `{other}` (expected x, y or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSpec {
    pub side: AnchorSide,
    pub zeta: f64,
    pub x_label: String,
    pub y_label: String,
}

impl AnchorSpec {
    pub fn new(side: AnchorSide, zeta: f64) -> Self {
        AnchorSpec {
            side,
            zeta,
            x_label: DEFAULT_ANCHOR.into(),
            y_label: DEFAULT_ANCHOR.into(),
        }
    }
}

/// Replaces y by a fresh input with probability ζ, independently of x; the
/// new input accepts every answer pair.
fn anchor_y(game: &Game, zeta: f64, label: &str) -> Result<Game> {
    let (nx, ny, na, nb) = game.sizes();
    if game.y_labels().iter().any(|l| l == label) {
        return Err(GameError::LabelCollision(label.to_string()));
    }
    let qx = game.q().marginal(&["X"]).map_err(|e| GameError::BadDistribution(e.to_string()))?;
    let mut y = game.y_labels().to_vec();
    y.push(label.to_string());
    let mut weights = Vec::with_capacity(nx * (ny + 1));
    let mut win = Vec::with_capacity(nx * (ny + 1) * na * nb);
    for x in 0..nx {
        for yi in 0..ny {
            weights.push((1.0 - zeta) * game.q_at(x, yi));
        }
        weights.push(zeta * qx.weights()[x]);
    }
    for x in 0..nx {
        for yi in 0..=ny {
            for a in 0..na {
                for b in 0..nb {
                    win.push(yi == ny || game.wins(x, yi, a, b));
                }
            }
        }
    }
    let q = FiniteDistribution::from_masses(vec![Axis::new("X", game.x_labels()), Axis::new("Y", &y)], weights)
        .map_err(|e| GameError::BadDistribution(e.to_string()))?;
    Ok(Game::from_parts(
        game.x_labels().to_vec(),
        y,
        game.a_labels().to_vec(),
        game.b_labels().to_vec(),
        q,
        win,
    ))
}

/// Exchanges the roles of the two players.
fn swap_players(game: &Game) -> Game {
    let (nx, ny, na, nb) = game.sizes();
    let mut weights = Vec::with_capacity(nx * ny);
    let mut win = Vec::with_capacity(nx * ny * na * nb);
    for y in 0..ny {
        for x in 0..nx {
            weights.push(game.q_at(x, y));
        }
    }
    for y in 0..ny {
        for x in 0..nx {
            for b in 0..nb {
                for a in 0..na {
                    win.push(game.wins(x, y, a, b));
                }
            }
        }
    }
    let q = FiniteDistribution::from_masses(
        vec![Axis::new("X", game.y_labels()), Axis::new("Y", game.x_labels())],
        weights,
    )
    .expect("a permutation of a valid table");
    Game::from_parts(
        game.y_labels().to_vec(),
        game.x_labels().to_vec(),
        game.b_labels().to_vec(),
        game.a_labels().to_vec(),
        q,
        win,
    )
}

/// Anchors the game on one or both sides. Two-sided anchoring applies the
/// x-map and then the y-map, so each input is replaced independently.
/// ζ = 0 adds an anchor input of zero mass.
pub fn anchor_game(game: &Game, spec: &AnchorSpec) -> Result<Game> {
    if !(spec.zeta >= 0.0 && spec.zeta < 1.0) {
        return Err(GameError::ParamRange(format!("zeta {} outside [0, 1)", spec.zeta)));
    }
    let on_x = |g: &Game| -> Result<Game> { Ok(swap_players(&anchor_y(&swap_players(g), spec.zeta, &spec.x_label)?)) };
    match spec.side {
        AnchorSide::Y => anchor_y(game, spec.zeta, &spec.y_label),
        AnchorSide::X => on_x(game),
        AnchorSide::Both => anchor_y(&on_x(game)?, spec.zeta, &spec.y_label),
    }
}

fn join_labels(alphabet: &[String], k: usize) -> Vec<String> {
    let n = alphabet.len();
    let total = n.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            let mut parts = vec![""; k];
            for slot in (0..k).rev() {
                parts[slot] = &alphabet[idx % n];
                idx /= n;
            }
            parts.join(",")
        })
        .collect()
}

/// k parallel copies: inputs drawn from q^k, answers judged coordinatewise.
/// Tuple labels join the coordinate labels with commas, first coordinate
/// most significant.
pub fn repeat_game(game: &Game, k: usize) -> Result<Game> {
    if k == 0 {
        return Err(GameError::ParamRange("k must be at least 1".into()));
    }
    let (nx, ny, na, nb) = game.sizes();
    let size = ((nx * ny * na * nb) as f64).powi(k as i32);
    if size > REPEAT_LIMIT {
        return Err(GameError::SizeGuard(size));
    }
    let (kx, ky, ka, kb) = (nx.pow(k as u32), ny.pow(k as u32), na.pow(k as u32), nb.pow(k as u32));
    let digits = |mut idx: usize, n: usize| -> Vec<usize> {
        let mut d = vec![0; k];
        for slot in (0..k).rev() {
            d[slot] = idx % n;
            idx /= n;
        }
        d
    };
    let xs: Vec<Vec<usize>> = (0..kx).map(|i| digits(i, nx)).collect();
    let ys: Vec<Vec<usize>> = (0..ky).map(|i| digits(i, ny)).collect();
    let as_: Vec<Vec<usize>> = (0..ka).map(|i| digits(i, na)).collect();
    let bs: Vec<Vec<usize>> = (0..kb).map(|i| digits(i, nb)).collect();
    let mut weights = Vec::with_capacity(kx * ky);
    for x in &xs {
        for y in &ys {
            weights.push((0..k).map(|c| game.q_at(x[c], y[c])).product());
        }
    }
    let mut win = Vec::with_capacity(kx * ky * ka * kb);
    for x in &xs {
        for y in &ys {
            for a in &as_ {
                for b in &bs {
                    win.push((0..k).all(|c| game.wins(x[c], y[c], a[c], b[c])));
                }
            }
        }
    }
    let (lx, ly) = (join_labels(game.x_labels(), k), join_labels(game.y_labels(), k));
    let q = FiniteDistribution::from_masses(vec![Axis::new("X", &lx), Axis::new("Y", &ly)], weights)
        .map_err(|e| GameError::BadDistribution(e.to_string()))?;
    Ok(Game::from_parts(
        lx,
        ly,
        join_labels(game.a_labels(), k),
        join_labels(game.b_labels(), k),
        q,
        win,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::classical_value_exact;

    #[test]
    fn anchored_chsh() {
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.2)).unwrap();
        assert!((classical_value_exact(&g).unwrap().0 - 0.8).abs() < 1e-12);
        let g = anchor_game(&Game::chsh(), &AnchorSpec::new(AnchorSide::Y, 0.5)).unwrap();
        assert_eq!(g.q().weights(), &[0.125, 0.125, 0.25, 0.125, 0.125, 0.25]);
    }

    #[test]
    fn label_collision() {
        let mut spec = AnchorSpec::new(AnchorSide::Y, 0.2);
        spec.y_label = "1".into();
        assert!(matches!(
            anchor_game(&Game::chsh(), &spec),
            Err(GameError::LabelCollision(_))
        ));
    }

    #[test]
    fn repeated_chsh() {
        let g2 = repeat_game(&Game::chsh(), 2).unwrap();
        assert_eq!(g2.x_labels()[1], "0,1");
        assert!((classical_value_exact(&g2).unwrap().0 - 0.625).abs() < 1e-12);
        assert_eq!(repeat_game(&Game::chsh(), 1).unwrap(), Game::chsh());
    }
}
