//! A single human-vs-engine game. Everything here is synchronous; the HTTP
//! layer only locks, calls and serializes.

use bidsolve_core::dag_solver::{
    best_move, bid_winner, designate, exchange, sample_bid_with, turn_at, DagError,
};
use bidsolve_core::game_graph::GameSelector;
use bidsolve_core::tictactoe::{parse_board, placed_cell};
use bidsolve_core::{ChipState, GameGraph, Player, Table, VertexId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingBid,
    AwaitingHumanMove,
    Finished,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Bid {
        bid_a: u32,
        bid_b: u32,
        winner: Player,
        by_advantage: bool,
        chips_after: ChipState,
    },
    Move {
        mover: Player,
        designated_by: Player,
        from: String,
        to: String,
    },
}

/// Persistent session record; also the snapshot format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub game: String,
    pub chips_total: u32,
    pub human: Player,
    pub seed: u64,
    pub vertex: VertexId,
    pub chips: ChipState,
    pub phase: Phase,
    /// Who the human may send to move while `phase` is `AwaitingHumanMove`.
    pub designations: Vec<Player>,
    pub history: Vec<Event>,
    pub bids_played: u64,
    pub winner: Option<Player>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoveOption {
    pub vertex: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LegalActions {
    pub designations: Vec<Player>,
    pub moves: Vec<MoveOption>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChipView {
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "B")]
    pub b: u32,
    pub human: u32,
    pub engine: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexView {
    pub id: VertexId,
    pub name: String,
    pub terminal: bool,
    /// Nine cells, `"X"`, `"O"` or `""`, for tic-tac-toe positions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub board: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateView {
    pub session_id: String,
    pub game: String,
    pub chips_total: u32,
    pub human: Player,
    pub engine: Player,
    pub seed: u64,
    pub vertex: VertexView,
    pub chips: ChipView,
    pub advantage: Player,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legal: Option<LegalActions>,
    pub history: Vec<Event>,
    pub winner: Option<Player>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reveal {
    pub bid_a: u32,
    pub bid_b: u32,
    pub human_bid: u32,
    pub engine_bid: u32,
    pub winner: Player,
    pub by_advantage: bool,
    /// Chips that changed hands, from the higher bidder to the lower.
    pub net_transfer: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoveOutcome {
    pub mover: Player,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hint {
    pub player: Player,
    pub strategy: Vec<f64>,
    /// The human's adjusted value (win probability estimate).
    pub value: f64,
    pub value_a: f64,
    pub error_bound: f64,
}

fn bad_move(msg: impl Into<String>) -> ApiError {
    ApiError::unprocessable("illegal_move", msg)
}

impl Session {
    pub fn new(id: String, game: &GameSelector, g: &GameGraph, chips_total: u32, human: Player, seed: u64) -> Self {
        let a = chips_total - chips_total / 2;
        Session {
            id,
            game: game.to_string(),
            chips_total,
            human,
            seed,
            vertex: g.start(),
            chips: ChipState::new(a, chips_total - a),
            phase: Phase::AwaitingBid,
            designations: Vec::new(),
            history: Vec::new(),
            bids_played: 0,
            winner: None,
        }
    }

    pub fn engine(&self) -> Player {
        self.human.opponent()
    }

    fn require(&self, phase: Phase) -> Result<(), ApiError> {
        if self.phase != phase {
            return Err(ApiError::conflict(format!(
                "session is {:?}, expected {:?}",
                self.phase, phase
            )));
        }
        Ok(())
    }

    fn engine_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.bids_played);
        rng
    }

    /// Moves `mover` to `to` and settles the phase.
    fn advance(&mut self, g: &GameGraph, mover: Player, designated_by: Player, to: VertexId) -> MoveOutcome {
        let out = MoveOutcome {
            mover,
            from: g.name(self.vertex).to_string(),
            to: g.name(to).to_string(),
        };
        self.history.push(Event::Move {
            mover,
            designated_by,
            from: out.from.clone(),
            to: out.to.clone(),
        });
        self.vertex = to;
        self.designations.clear();
        match g.terminal_winner(to) {
            Some(w) => {
                self.phase = Phase::Finished;
                self.winner = Some(w);
            }
            None => self.phase = Phase::AwaitingBid,
        }
        out
    }

    /// Resolves a human bid against a sampled engine bid.
    pub fn bid(&mut self, g: &GameGraph, t: &Table, human_bid: i64) -> Result<(Reveal, Option<MoveOutcome>), ApiError> {
        self.require(Phase::AwaitingBid)?;
        let have = self.chips.of(self.human);
        if human_bid < 0 || human_bid > have as i64 {
            return Err(ApiError::unprocessable(
                "bid_out_of_range",
                format!("bid {human_bid} outside 0..={have}"),
            ));
        }
        let human_bid = human_bid as u32;
        let turn = turn_at(g, t, self.vertex, self.chips)?;
        let engine_strategy = match self.engine() {
            Player::A => turn.strategy_a,
            Player::B => turn.strategy_b,
        };
        let engine_bid = sample_bid_with(&engine_strategy, &mut self.engine_rng()).min(self.chips.of(self.engine()));
        let (bid_a, bid_b) = match self.human {
            Player::A => (human_bid, engine_bid),
            Player::B => (engine_bid, human_bid),
        };
        let (winner, by_advantage) = bid_winner(self.chips, bid_a, bid_b);
        let next = exchange(self.chips, bid_a, bid_b)?;
        self.bids_played += 1;
        self.chips = next;
        self.history.push(Event::Bid {
            bid_a,
            bid_b,
            winner,
            by_advantage,
            chips_after: next,
        });
        let reveal = Reveal {
            bid_a,
            bid_b,
            human_bid,
            engine_bid,
            winner,
            by_advantage,
            net_transfer: bid_a.abs_diff(bid_b),
        };
        let designees = self.legal_designations(g);
        if winner == self.human {
            self.designations = designees;
            self.phase = Phase::AwaitingHumanMove;
            return Ok((reveal, None));
        }
        let mover = designate(g, t, self.vertex, next, winner)?;
        if mover == self.human {
            self.designations = vec![self.human];
            self.phase = Phase::AwaitingHumanMove;
            return Ok((reveal, None));
        }
        let to = best_move(g, t, self.vertex, next, mover)?;
        Ok((reveal, Some(self.advance(g, mover, winner, to))))
    }

    fn legal_designations(&self, g: &GameGraph) -> Vec<Player> {
        [self.human, self.engine()]
            .into_iter()
            .filter(|&p| !g.edges(self.vertex, p).is_empty())
            .collect()
    }

    /// Applies the human's designation and, if they move, their move.
    pub fn play(
        &mut self,
        g: &GameGraph,
        t: &Table,
        designee: Option<Player>,
        target: Option<&str>,
    ) -> Result<MoveOutcome, ApiError> {
        self.require(Phase::AwaitingHumanMove)?;
        let designee = match (designee, self.designations.as_slice()) {
            (Some(p), _) => p,
            (None, [only]) => *only,
            (None, _) => return Err(bad_move("designate is required")),
        };
        if !self.designations.contains(&designee) {
            return Err(bad_move(format!("cannot designate {designee} here")));
        }
        let chooser = self.last_bid_winner().unwrap_or(self.human);
        if designee == self.engine() {
            if target.is_some() {
                return Err(bad_move("move must be omitted when the engine moves"));
            }
            let to = best_move(g, t, self.vertex, self.chips, designee)?;
            return Ok(self.advance(g, designee, chooser, to));
        }
        let name = target.ok_or_else(|| bad_move("move is required when the human moves"))?;
        let to = g
            .edges(self.vertex, self.human)
            .iter()
            .copied()
            .find(|&w| g.name(w) == name)
            .ok_or_else(|| bad_move(format!("{name:?} is not a legal move")))?;
        Ok(self.advance(g, self.human, chooser, to))
    }

    fn last_bid_winner(&self) -> Option<Player> {
        self.history.iter().rev().find_map(|e| match e {
            Event::Bid { winner, .. } => Some(*winner),
            Event::Move { .. } => None,
        })
    }

    pub fn hint(&self, g: &GameGraph, t: &Table) -> Result<Hint, ApiError> {
        self.require(Phase::AwaitingBid)?;
        let turn = turn_at(g, t, self.vertex, self.chips)?;
        let strategy = match self.human {
            Player::A => turn.strategy_a,
            Player::B => turn.strategy_b,
        };
        let total = 1.0 + t.x * t.total as f64;
        let value_a = turn.value;
        Ok(Hint {
            player: self.human,
            strategy: strategy.padded(self.chips.of(self.human) as usize).probs,
            value: match self.human {
                Player::A => value_a,
                Player::B => total - value_a,
            },
            value_a,
            error_bound: t.error_bound(g),
        })
    }

    fn move_options(&self, g: &GameGraph) -> Vec<MoveOption> {
        let here = parse_board(g.name(self.vertex));
        g.edges(self.vertex, self.human)
            .iter()
            .map(|&w| MoveOption {
                vertex: g.name(w).to_string(),
                cell: here.and_then(|b| {
                    let cell = parse_board(g.name(w)).and_then(|nb| placed_cell(&b, &nb));
                    cell.or_else(|| {
                        // Terminal successor: the one empty cell whose mark completes it.
                        (0..9).find(|&c| {
                            bidsolve_core::tictactoe::move_to_cell(g, self.vertex, self.human, c) == Some(w)
                        })
                    })
                }),
            })
            .collect()
    }

    pub fn view(&self, g: &GameGraph) -> StateView {
        let name = g.name(self.vertex).to_string();
        let board = parse_board(&name).map(|b| {
            b.iter()
                .map(|c| match c {
                    bidsolve_core::tictactoe::Cell::X => "X".to_string(),
                    bidsolve_core::tictactoe::Cell::O => "O".to_string(),
                    bidsolve_core::tictactoe::Cell::Empty => String::new(),
                })
                .collect()
        });
        let legal = (self.phase == Phase::AwaitingHumanMove).then(|| LegalActions {
            designations: self.designations.clone(),
            moves: if self.designations.contains(&self.human) {
                self.move_options(g)
            } else {
                Vec::new()
            },
        });
        StateView {
            session_id: self.id.clone(),
            game: self.game.clone(),
            chips_total: self.chips_total,
            human: self.human,
            engine: self.engine(),
            seed: self.seed,
            vertex: VertexView {
                id: self.vertex,
                name,
                terminal: g.is_terminal(self.vertex),
                board,
            },
            chips: ChipView {
                a: self.chips.a,
                b: self.chips.b,
                human: self.chips.of(self.human),
                engine: self.chips.of(self.engine()),
            },
            advantage: self.chips.advantage(),
            phase: self.phase,
            legal,
            history: self.history.clone(),
            winner: self.winner,
        }
    }
}

impl From<DagError> for ApiError {
    fn from(e: DagError) -> Self {
        match e {
            DagError::GraphTooLarge { .. } => ApiError::insufficient_storage(e.to_string()),
            DagError::InvalidBid { .. } => ApiError::unprocessable("bid_out_of_range", e.to_string()),
            DagError::NoLegalMove(_) => bad_move(e.to_string()),
            _ => ApiError::internal(e.to_string()),
        }
    }
}
