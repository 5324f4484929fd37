//! Retrograde solve of a whole game graph at a fixed chip total, plus the
//! per-turn helpers used in play: bid resolution, mover designation, best
//! moves and bid sampling.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{solve_for, EquilibriumError, Strategy, TurnSolution};
use crate::game_graph::{ChipState, GameGraph, GraphError, Player, VertexId};
use crate::payoff_matrix::{best_of, build_matrix, MatrixError};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ENTRIES: usize = 50_000_000;
pub const MIN_X: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DagError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error("table would hold {entries} entries, cap is {cap}")]
    GraphTooLarge { entries: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} has no legal move here")]
    NoLegalMove(Player),
    #[error("bid {bid} exceeds {player}'s {chips} chips")]
    InvalidBid { player: Player, bid: u32, chips: u32 },
    #[error("chips {a}+{b} do not add up to the table total {total}")]
    ChipMismatch { a: u32, b: u32, total: u32 },
    #[error("table format mismatch: {0}")]
    FormatMismatch(String),
    #[error("table was built for graph {found}, expected {expected}")]
    GraphHashMismatch { expected: String, found: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Perturbation used when none is given: small enough that the accumulated
/// bonus stays below 1e-6.
pub fn default_x(g: &GameGraph, total: u32) -> f64 {
    let depth = g.max_depth().max(1) as f64;
    (1e-6 / (depth * total.max(1) as f64)).max(MIN_X)
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub x: Option<f64>,
    pub store_strategies: bool,
    pub max_entries: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            x: None,
            store_strategies: false,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

/// Stored equilibrium pair at one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredTurn<T> {
    pub s_a: Strategy<T>,
    pub s_b: Strategy<T>,
}

/// Adjusted values `v_A(v, a)` for every vertex and every split of `total`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTable<T> {
    pub graph_hash: String,
    pub total: u32,
    pub x: T,
    pub vertices: usize,
    /// Indexed `v * (total + 1) + a`.
    pub values: Vec<T>,
    pub lengths: Vec<u32>,
    pub strategies: Option<Vec<Option<StoredTurn<T>>>>,
    pub turns_solved: u64,
}

impl<T: Scalar> ValueTable<T> {
    fn index(&self, v: VertexId, a: u32) -> Option<usize> {
        (v < self.vertices && a <= self.total).then(|| v * (self.total as usize + 1) + a as usize)
    }

    pub fn value(&self, v: VertexId, a: u32) -> Option<&T> {
        self.index(v, a).map(|i| &self.values[i])
    }

    pub fn length(&self, v: VertexId, a: u32) -> Option<u32> {
        self.index(v, a).map(|i| self.lengths[i])
    }

    pub fn stored(&self, v: VertexId, a: u32) -> Option<&StoredTurn<T>> {
        let i = self.index(v, a)?;
        self.strategies.as_ref()?.get(i)?.as_ref()
    }

    pub fn has_strategies(&self) -> bool {
        self.strategies.is_some()
    }

    /// Values at `v` for `a = 0..=total`.
    pub fn row(&self, v: VertexId) -> &[T] {
        let n = self.total as usize + 1;
        &self.values[v * n..(v + 1) * n]
    }

    /// Bound on how far the adjusted values can sit from the true ones.
    pub fn error_bound(&self, g: &GameGraph) -> f64 {
        g.max_depth() as f64 * self.x.to_f64() * self.total as f64
    }

    fn check_chips(&self, chips: ChipState) -> Result<(), DagError> {
        if chips.total() != self.total {
            return Err(DagError::ChipMismatch {
                a: chips.a,
                b: chips.b,
                total: self.total,
            });
        }
        Ok(())
    }

    fn lookup(&self) -> impl Fn(VertexId, u32) -> Option<T> + '_ {
        move |v, a| self.value(v, a).cloned()
    }
}

pub type Table = ValueTable<f64>;

/// Solves one turn given completed successor values.
pub fn solve_cell<T: Scalar>(
    g: &GameGraph,
    v: VertexId,
    chips: ChipState,
    x: &T,
    lookup: &impl Fn(VertexId, u32) -> Option<T>,
) -> Result<TurnSolution<T>, DagError> {
    let advantage = chips.advantage();
    let m = build_matrix(g, v, chips, lookup, advantage)?.adjust_precision(x);
    let total = T::one() + x.clone() * T::from_i64(chips.total() as i64);
    Ok(solve_for(&m, &total, advantage)?)
}

pub fn solve_game(g: &GameGraph, total: u32, opts: &SolveOptions) -> Result<Table, DagError> {
    let x = opts.x.unwrap_or_else(|| default_x(g, total));
    if !(x > 0.0 && x.is_finite()) {
        return Err(DagError::InvalidParameter(format!("x must be positive, got {x}")));
    }
    solve_game_with(g, total, x, opts)
}

/// Level-by-level retrograde solve; cells of one height run in parallel.
pub fn solve_game_with<T: Scalar>(g: &GameGraph, total: u32, x: T, opts: &SolveOptions) -> Result<ValueTable<T>, DagError> {
    if !x.is_positive() {
        return Err(DagError::InvalidParameter("x must be positive".into()));
    }
    let per_vertex = total as usize + 1;
    let entries = g.len().saturating_mul(per_vertex);
    if entries > opts.max_entries {
        return Err(DagError::GraphTooLarge {
            entries,
            cap: opts.max_entries,
        });
    }
    let mut table = ValueTable {
        graph_hash: g.hash().to_string(),
        total,
        x: x.clone(),
        vertices: g.len(),
        values: vec![T::zero(); entries],
        lengths: vec![0; entries],
        strategies: opts.store_strategies.then(|| vec![None; entries]),
        turns_solved: 0,
    };
    for a in 0..=total as usize {
        table.values[g.win_a() * per_vertex + a] = T::one();
    }

    let mut levels: Vec<Vec<VertexId>> = vec![Vec::new(); g.max_depth() as usize + 1];
    for v in 0..g.len() {
        if !g.is_terminal(v) {
            levels[g.height(v) as usize].push(v);
        }
    }
    let counter = AtomicU64::new(0);
    for level in levels.iter().skip(1) {
        let cells: Vec<(VertexId, u32)> = level.iter().flat_map(|&v| (0..=total).map(move |a| (v, a))).collect();
        let solved = {
            let lookup = table.lookup();
            cells
                .par_iter()
                .map(|&(v, a)| {
                    counter.fetch_add(1, Ordering::Relaxed);
                    solve_cell(g, v, ChipState::new(a, total - a), &x, &lookup)
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        for ((v, a), sol) in cells.into_iter().zip(solved) {
            let i = v * per_vertex + a as usize;
            table.values[i] = sol.value;
            table.lengths[i] = sol.length as u32;
            if let Some(store) = table.strategies.as_mut() {
                store[i] = Some(StoredTurn {
                    s_a: sol.strategy_a,
                    s_b: sol.strategy_b,
                });
            }
        }
    }
    table.turns_solved = counter.into_inner();
    Ok(table)
}

/// The equilibrium at `(v, chips)`: stored if available, else recomputed
/// from the successor values.
pub fn turn_at<T: Scalar>(
    g: &GameGraph,
    table: &ValueTable<T>,
    v: VertexId,
    chips: ChipState,
) -> Result<TurnSolution<T>, DagError> {
    table.check_chips(chips)?;
    if g.is_terminal(v) {
        return Err(GraphError::TerminalVertex(g.name(v).to_string()).into());
    }
    let advantage = chips.advantage();
    if let Some(stored) = table.stored(v, chips.a) {
        return Ok(TurnSolution {
            value: table.value(v, chips.a).cloned().expect("in range"),
            strategy_a: stored.s_a.clone(),
            strategy_b: stored.s_b.clone(),
            length: table.length(v, chips.a).unwrap_or(0) as usize,
            advantage,
            best_response_gap: T::zero(),
        });
    }
    solve_cell(g, v, chips, &table.x, &table.lookup())
}

fn succ_value<T: Scalar>(g: &GameGraph, table: &ValueTable<T>, w: VertexId, a: u32) -> T {
    if w == g.win_a() {
        T::one()
    } else if w == g.win_b() {
        T::zero()
    } else {
        table.value(w, a).cloned().expect("chip count in range")
    }
}

fn own_terminal(g: &GameGraph, p: Player) -> VertexId {
    match p {
        Player::A => g.win_a(),
        Player::B => g.win_b(),
    }
}

/// The mover's best successor at `chips`; first in order wins ties.
///
/// An immediate win is always taken: chip bonuses can push a won but
/// unfinished position above the terminal's value.
pub fn best_move<T: Scalar>(
    g: &GameGraph,
    table: &ValueTable<T>,
    v: VertexId,
    chips: ChipState,
    mover: Player,
) -> Result<VertexId, DagError> {
    table.check_chips(chips)?;
    let succ = g.successors(v, mover)?;
    if succ.contains(&own_terminal(g, mover)) {
        return Ok(own_terminal(g, mover));
    }
    let mut best: Option<(VertexId, T)> = None;
    for &w in succ {
        let val = succ_value(g, table, w, chips.a);
        let better = match &best {
            None => true,
            Some((_, b)) => match mover {
                Player::A => val > *b,
                Player::B => val < *b,
            },
        };
        if better {
            best = Some((w, val));
        }
    }
    best.map(|(w, _)| w).ok_or(DagError::NoLegalMove(mover))
}

/// Who the bid winner sends to move at the post-bid `chips`. The winner
/// moves itself unless forcing the opponent is strictly better.
pub fn designate<T: Scalar>(
    g: &GameGraph,
    table: &ValueTable<T>,
    v: VertexId,
    chips: ChipState,
    winner: Player,
) -> Result<Player, DagError> {
    table.check_chips(chips)?;
    if g.is_terminal(v) {
        return Err(GraphError::TerminalVertex(g.name(v).to_string()).into());
    }
    if g.edges(v, winner).contains(&own_terminal(g, winner)) {
        return Ok(winner);
    }
    let lookup = table.lookup();
    let own = best_of(g, v, chips.a, winner, &lookup)?;
    let other = best_of(g, v, chips.a, winner.opponent(), &lookup)?;
    Ok(match (own, other) {
        (Some(o), Some(f)) => {
            let forced_better = match winner {
                Player::A => f > o,
                Player::B => f < o,
            };
            if forced_better {
                winner.opponent()
            } else {
                winner
            }
        }
        (None, Some(_)) => winner.opponent(),
        _ => winner,
    })
}

/// Bid winner and whether the tie-break decided it.
pub fn bid_winner(chips: ChipState, bid_a: u32, bid_b: u32) -> (Player, bool) {
    if bid_a > bid_b {
        (Player::A, false)
    } else if bid_b > bid_a {
        (Player::B, false)
    } else {
        (chips.advantage(), true)
    }
}

/// Both players pay their bid to the other.
pub fn exchange(chips: ChipState, bid_a: u32, bid_b: u32) -> Result<ChipState, DagError> {
    for (player, bid) in [(Player::A, bid_a), (Player::B, bid_b)] {
        if bid > chips.of(player) {
            return Err(DagError::InvalidBid {
                player,
                bid,
                chips: chips.of(player),
            });
        }
    }
    Ok(ChipState::new(chips.a - bid_a + bid_b, chips.b - bid_b + bid_a))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidOutcome {
    pub bid_a: u32,
    pub bid_b: u32,
    pub winner: Player,
    pub by_advantage: bool,
    pub mover: Player,
    pub from_vertex: VertexId,
    pub next_vertex: VertexId,
    pub next_chips: ChipState,
}

/// Plays one turn with both players following the table after the bids.
pub fn resolve_bids<T: Scalar>(
    g: &GameGraph,
    table: &ValueTable<T>,
    v: VertexId,
    chips: ChipState,
    bid_a: u32,
    bid_b: u32,
) -> Result<BidOutcome, DagError> {
    table.check_chips(chips)?;
    let next_chips = exchange(chips, bid_a, bid_b)?;
    let (winner, by_advantage) = bid_winner(chips, bid_a, bid_b);
    let mover = designate(g, table, v, next_chips, winner)?;
    let next_vertex = best_move(g, table, v, next_chips, mover)?;
    Ok(BidOutcome {
        bid_a,
        bid_b,
        winner,
        by_advantage,
        mover,
        from_vertex: v,
        next_vertex,
        next_chips,
    })
}

/// Inverse-CDF draw from `s`.
pub fn sample_bid_with<R: Rng + ?Sized>(s: &Strategy<f64>, rng: &mut R) -> u32 {
    let u: f64 = rng.random::<f64>() * s.sum();
    let mut acc = 0.0;
    for (bid, p) in s.probs.iter().enumerate() {
        acc += p;
        if u < acc && *p > 0.0 {
            return bid as u32;
        }
    }
    s.length().saturating_sub(1) as u32
}

pub fn sample_bid(s: &Strategy<f64>, seed: u64) -> u32 {
    sample_bid_with(s, &mut ChaCha8Rng::seed_from_u64(seed))
}
