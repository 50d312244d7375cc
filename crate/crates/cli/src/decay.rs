//! Values of the k-fold repetition for k = 1..kmax.

use anchorlab::games::{
    classical_value_exact, entangled_value_seesaw, repeat_game, theorem_bound, BoundParams, SeesawConfig,
    DEFAULT_ANCHOR,
};
use anchorlab::Game;
use serde::Serialize;

use crate::{input, CliError, Result};

pub const CSV_HEADER: &str = "k,classical_value,entangled_lb,dim,restarts,seed,theorem_bound_C";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: usize,
    /// Exact classical value of G^k.
    pub classical_value: f64,
    /// max(see-saw value of G^k, entangled_lb(1)^k).
    pub entangled_lb: f64,
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Repetition bound with the supplied constant, evaluated at the k = 1
    /// lower bound; absent when the game carries no anchor.
    pub theorem_bound: Option<f64>,
}

/// Mass of the anchor input, Y side first.
pub fn anchor_mass(game: &Game) -> Option<f64> {
    let (nx, ny, _, _) = game.sizes();
    if let Some(y) = game.y_labels().iter().position(|l| l == DEFAULT_ANCHOR) {
        return Some((0..nx).map(|x| game.q_at(x, y)).sum());
    }
    let x = game.x_labels().iter().position(|l| l == DEFAULT_ANCHOR)?;
    Some((0..ny).map(|y| game.q_at(x, y)).sum())
}

/// One row per k. The see-saw runs with the same configuration at every k.
pub fn decay_experiment(game: &Game, kmax: usize, cfg: &SeesawConfig, constant: f64) -> Result<Vec<DecayRow>> {
    if kmax == 0 {
        return Err(CliError::Input("kmax must be at least 1".into()));
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(CliError::Input(format!("constant {constant} must be positive")));
    }
    let games: Vec<Game> = (1..=kmax).map(|k| repeat_game(game, k)).collect::<std::result::Result<_, _>>().map_err(input)?;
    let zeta = anchor_mass(game).filter(|z| *z > 0.0 && *z < 1.0);
    if zeta.is_none() {
        eprintln!("warning: game is not anchored; the bound column is left empty");
    }
    let (_, _, na, nb) = game.sizes();
    let mut rows = Vec::with_capacity(kmax);
    let mut single = 0.0;
    for (i, g) in games.iter().enumerate() {
        let k = i + 1;
        let classical = classical_value_exact(g).map_err(input)?.0;
        let seesaw = entangled_value_seesaw(g, cfg).map_err(input)?.value;
        if k == 1 {
            single = seesaw;
        }
        let theorem_bound = match zeta {
            Some(zeta) if na >= 2 && nb >= 2 => Some(
                theorem_bound(&BoundParams::ParRep {
                    omega: single.clamp(0.0, 1.0),
                    zeta,
                    k: k as u64,
                    a_size: na,
                    b_size: nb,
                    c: constant,
                })
                .map_err(input)?,
            ),
            _ => None,
        };
        rows.push(DecayRow {
            k,
            classical_value: classical,
            entangled_lb: seesaw.max(single.powi(k as i32)).min(1.0),
            dim: cfg.dim,
            restarts: cfg.restarts,
            seed: cfg.seed,
            theorem_bound,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[DecayRow]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        let bound = r.theorem_bound.map_or(String::new(), |b| format!("{b:.10}"));
        s.push_str(&format!(
            "{},{:.10},{:.10},{},{},{},{bound}\n",
            r.k, r.classical_value, r.entangled_lb, r.dim, r.restarts, r.seed
        ));
    }
    s
}
