//! Reference solvers for cross-checking `bidsolve-core`.
//!
//! None of these use the Toeplitz structure, the length search or the
//! closed-form strategy. They are slow and only meant for small instances.

pub mod float_game;
pub mod generate;
pub mod naive;
pub mod rational;
pub mod scan;
pub mod segment;
pub mod support;

pub use generate::{random_precise, PreciseInstance};
pub use naive::{naive_matrix, naive_values};
pub use rational::RationalMatrix;
pub use scan::scan_length;
pub use segment::segment_distance;
pub use support::{support_enumeration, ExactSolution, OracleError};
