//! Equilibrium solver for all-pay bidding games on acyclic game graphs.
//!
//! The numeric modules are generic over [`scalar::Scalar`]; the aliases below
//! fix the common instantiations.

pub mod dag_solver;
pub mod equilibrium;
pub mod game_graph;
pub mod payoff_matrix;
pub mod scalar;
pub mod simulate;
pub mod table_io;
pub mod tictactoe;
pub mod toeplitz_solver;

use num_rational::BigRational;

pub use dag_solver::{solve_game, DagError, SolveOptions, Table, ValueTable};
pub use equilibrium::{solve_turn, EquilibriumResult, Strategy, TurnSolution};
pub use game_graph::{ChipState, GameGraph, GameSelector, Player, VertexId};
pub use payoff_matrix::ToeplitzPayoff;
pub use scalar::Scalar;

pub type Payoff = ToeplitzPayoff<f64>;
pub type Payoff32 = ToeplitzPayoff<f32>;
pub type ExactPayoff = ToeplitzPayoff<BigRational>;

pub type MixedStrategy = Strategy<f64>;
pub type ExactStrategy = Strategy<BigRational>;

pub type Equilibrium = EquilibriumResult<f64>;
pub type ExactEquilibrium = EquilibriumResult<BigRational>;

pub type ExactTable = ValueTable<BigRational>;
