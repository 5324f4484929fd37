//! Entry-by-entry payoff matrices and plain tree recursion, with no
//! Toeplitz shortcut and no memo table.

use bidsolve_core::game_graph::{ChipState, GameGraph, Player, VertexId};

use crate::float_game::game_value;

fn value_of(g: &GameGraph, values: &dyn Fn(VertexId, u32) -> Option<f64>, w: VertexId, a: u32) -> f64 {
    if w == g.win_a() {
        1.0
    } else if w == g.win_b() {
        0.0
    } else {
        values(w, a).unwrap_or_else(|| panic!("no value for vertex {w} at {a} chips"))
    }
}

/// A's unadjusted matrix at `v`; entry `(i, j)` is B bidding `i`, A bidding
/// `j`.
pub fn naive_matrix(
    g: &GameGraph,
    v: VertexId,
    chips: ChipState,
    values: &dyn Fn(VertexId, u32) -> Option<f64>,
    advantage: Player,
) -> Vec<Vec<f64>> {
    let (a, b) = (chips.a, chips.b);
    let mut m = vec![vec![0.0; a as usize + 1]; b as usize + 1];
    for i in 0..=b {
        for j in 0..=a {
            let a_after = a - j + i;
            let a_wins = j > i || (j == i && advantage == Player::A);
            let mut best_a: Option<f64> = None;
            for &w in g.edges(v, Player::A) {
                let val = value_of(g, values, w, a_after);
                best_a = Some(best_a.map_or(val, |m: f64| m.max(val)));
            }
            let mut best_b: Option<f64> = None;
            for &w in g.edges(v, Player::B) {
                let val = value_of(g, values, w, a_after);
                best_b = Some(best_b.map_or(val, |m: f64| m.min(val)));
            }
            m[i as usize][j as usize] = match (best_a, best_b) {
                (Some(p), Some(q)) if a_wins => p.max(q),
                (Some(p), Some(q)) => q.min(p),
                (Some(p), None) => p,
                (None, Some(q)) => q,
                (None, None) => panic!("vertex {v} has no moves"),
            };
        }
    }
    m
}

/// Adjusted values of `v` for every split of `total`, recomputing every
/// subtree from scratch.
pub fn naive_values(g: &GameGraph, v: VertexId, total: u32, x: f64) -> Vec<f64> {
    if v == g.win_a() {
        return vec![1.0; total as usize + 1];
    }
    if v == g.win_b() {
        return vec![0.0; total as usize + 1];
    }
    let mut children: Vec<(VertexId, Vec<f64>)> = Vec::new();
    for p in [Player::A, Player::B] {
        for &w in g.edges(v, p) {
            if !g.is_terminal(w) && !children.iter().any(|(c, _)| *c == w) {
                children.push((w, naive_values(g, w, total, x)));
            }
        }
    }
    let lookup = |w: VertexId, a: u32| {
        children
            .iter()
            .find(|(c, _)| *c == w)
            .map(|(_, vals)| vals[a as usize])
    };
    (0..=total)
        .map(|a| {
            let chips = ChipState::new(a, total - a);
            let mut m = naive_matrix(g, v, chips, &lookup, chips.advantage());
            for (i, row) in m.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    *e += x * (a as f64 - j as f64 + i as f64);
                }
            }
            game_value(&m).0
        })
        .collect()
}
