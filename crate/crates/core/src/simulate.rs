//! Self-play: both players sample bids from the equilibrium and move
//! optimally.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag_solver::{resolve_bids, sample_bid_with, turn_at, BidOutcome, DagError, ValueTable};
use crate::game_graph::{ChipState, GameGraph, Player, VertexId};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<BidOutcome>,
    pub winner: Player,
}

pub fn play_game<T: Scalar>(
    g: &GameGraph,
    table: &ValueTable<T>,
    start: VertexId,
    chips: ChipState,
    seed: u64,
) -> Result<Trajectory, DagError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut v, mut chips) = (start, chips);
    let mut steps = Vec::new();
    while !g.is_terminal(v) {
        let turn = turn_at(g, table, v, chips)?;
        let bid_a = sample_bid_with(&turn.strategy_a.to_f64(), &mut rng);
        let bid_b = sample_bid_with(&turn.strategy_b.to_f64(), &mut rng);
        let out = resolve_bids(g, table, v, chips, bid_a, bid_b)?;
        v = out.next_vertex;
        chips = out.next_chips;
        steps.push(out);
    }
    let winner = g.terminal_winner(v).expect("loop ends on a terminal");
    Ok(Trajectory { steps, winner })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub wins_a: u64,
    pub win_rate: f64,
    /// Binomial standard error of `win_rate`.
    pub std_error: f64,
}

/// Plays `trials` games from `(start, a)`; trial `i` uses seed `seed + i`.
pub fn simulate<T: Scalar>(
    g: &GameGraph,
    table: &ValueTable<T>,
    start: VertexId,
    a: u32,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, DagError> {
    if trials == 0 {
        return Err(DagError::InvalidParameter("trials must be positive".into()));
    }
    let chips = ChipState::split(table.total, a)
        .ok_or_else(|| DagError::InvalidParameter(format!("a={a} exceeds total {}", table.total)))?;
    let wins_a = (0..trials)
        .into_par_iter()
        .map(|i| play_game(g, table, start, chips, seed.wrapping_add(i)).map(|t| (t.winner == Player::A) as u64))
        .try_reduce(|| 0, |p, q| Ok(p + q))?;
    let p = wins_a as f64 / trials as f64;
    Ok(SimulationReport {
        trials,
        wins_a,
        win_rate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag_solver::{solve_game, SolveOptions};
    use crate::game_graph::race_graph;

    #[test]
    fn forced_win_always_wins() {
        let g = race_graph(1, 1).unwrap();
        let t = solve_game(&g, 5, &SolveOptions::default()).unwrap();
        let r = simulate(&g, &t, g.start(), 4, 200, 1).unwrap();
        assert_eq!(r.win_rate, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let g = race_graph(2, 2).unwrap();
        let t = solve_game(&g, 6, &SolveOptions::default()).unwrap();
        let chips = ChipState::new(3, 3);
        let p = play_game(&g, &t, g.start(), chips, 99).unwrap();
        let q = play_game(&g, &t, g.start(), chips, 99).unwrap();
        assert_eq!(p, q);
        for step in &p.steps {
            assert_eq!(step.next_chips.total(), 6);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = race_graph(1, 1).unwrap();
        let t = solve_game(&g, 2, &SolveOptions::default()).unwrap();
        assert!(simulate(&g, &t, g.start(), 3, 10, 0).is_err());
        assert!(simulate(&g, &t, g.start(), 1, 0, 0).is_err());
    }
}
