//! Exact classical value by enumerating one player's deterministic
//! strategies and best-responding with the other.

use super::{DeterministicStrategy, Game, GameError, Result};

/// Largest |A|^|X|·|B|^|Y| accepted.
pub const ENUMERATION_LIMIT: f64 = 1e8;

/// Advances a mixed-radix counter; false after the last value.
fn next(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Best response of the second player to the first player's fixed strategy.
/// `score(i, j, r, s)` is the weight won on inputs (i, j) with answers (r, s).
fn best_response<F: Fn(usize, usize, usize, usize) -> f64>(
    first: &[usize],
    n_second_inputs: usize,
    n_second_answers: usize,
    score: &F,
) -> (f64, Vec<usize>) {
    let mut total = 0.0;
    let mut resp = Vec::with_capacity(n_second_inputs);
    for j in 0..n_second_inputs {
        let mut best = (f64::NEG_INFINITY, 0);
        for s in 0..n_second_answers {
            let v: f64 = first.iter().enumerate().map(|(i, &r)| score(i, j, r, s)).sum();
            if v > best.0 {
                best = (v, s);
            }
        }
        total += best.0;
        resp.push(best.1);
    }
    (total, resp)
}

/// Maximum of Σ q(x,y)·V(x,y,g(x),h(y)) over deterministic pairs, with the
/// first optimal strategy in enumeration order.
pub fn classical_value_exact(game: &Game) -> Result<(f64, DeterministicStrategy)> {
    let (nx, ny, na, nb) = game.sizes();
    let alice = (na as f64).powi(nx as i32);
    let bob = (nb as f64).powi(ny as i32);
    if alice * bob > ENUMERATION_LIMIT {
        return Err(GameError::EnumerationGuard(alice * bob));
    }
    let score_ab = |x: usize, y: usize, a: usize, b: usize| {
        if game.wins(x, y, a, b) {
            game.q_at(x, y)
        } else {
            0.0
        }
    };
    let mut best = (f64::NEG_INFINITY, Vec::new(), Vec::new());
    if alice <= bob {
        let mut g = vec![0; nx];
        loop {
            let (v, h) = best_response(&g, ny, nb, &score_ab);
            if v > best.0 + 1e-15 {
                best = (v, g.clone(), h);
            }
            if !next(&mut g, na) {
                break;
            }
        }
    } else {
        let score_ba = |y: usize, x: usize, b: usize, a: usize| score_ab(x, y, a, b);
        let mut h = vec![0; ny];
        loop {
            let (v, g) = best_response(&h, nx, na, &score_ba);
            if v > best.0 + 1e-15 {
                best = (v, g, h.clone());
            }
            if !next(&mut h, nb) {
                break;
            }
        }
    }
    Ok((best.0, DeterministicStrategy { g: best.1, h: best.2 }))
}
