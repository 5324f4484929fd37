//! Single-turn equilibria of precise Toeplitz games.
//!
//! Everything here works on the advantage player's matrix: the column player
//! holds advantage, so `cols >= rows`. [`solve_for`] turns A's matrix into
//! that orientation when B holds advantage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game_graph::Player;
use crate::payoff_matrix::{MatrixError, ToeplitzPayoff};
use crate::scalar::Scalar;
use crate::toeplitz_solver::{levinson_solve, SolveError};

/// Negativity tolerance of the length test, relative to the matrix scale.
pub const NONNEG_REL_TOL: f64 = 1e-9;
pub const EQUALIZATION_TOL: f64 = 1e-8;
pub const BEST_RESPONSE_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("a player has no chips; the bid search needs at least one each")]
    DegenerateChips,
    #[error("{rows}x{cols} matrix does not belong to the advantage player")]
    NotAdvantageMatrix { rows: usize, cols: usize },
    #[error("strategy entry {index} is {value}, below tolerance")]
    NegativeStrategy { index: usize, value: f64 },
    #[error("strategy has no positive mass")]
    ZeroMass,
}

/// Mixed bid distribution over `0..=cap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy<T> {
    pub probs: Vec<T>,
}

impl<T: Scalar> Strategy<T> {
    pub fn new(probs: Vec<T>) -> Self {
        Strategy { probs }
    }

    pub fn pure(bid: usize, cap: usize) -> Self {
        let mut probs = vec![T::zero(); cap + 1];
        probs[bid] = T::one();
        Strategy { probs }
    }

    pub fn cap(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    /// One past the last nonzero bid.
    pub fn length(&self) -> usize {
        self.probs.iter().rposition(|p| !p.is_zero()).map_or(0, |i| i + 1)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| !self.probs[i].is_zero()).collect()
    }

    /// No zero entry between the first and last nonzero ones.
    pub fn is_gap_free(&self) -> bool {
        let support = self.support();
        support.windows(2).all(|w| w[1] == w[0] + 1)
    }

    pub fn sum(&self) -> T {
        self.probs.iter().fold(T::zero(), |acc, p| acc + p.clone())
    }

    pub fn get(&self, bid: usize) -> T {
        self.probs.get(bid).cloned().unwrap_or_else(T::zero)
    }

    /// Zero-padded (or truncated) to `cap + 1` entries.
    pub fn padded(&self, cap: usize) -> Self {
        let mut probs = self.probs.clone();
        probs.resize(cap + 1, T::zero());
        Strategy { probs }
    }

    pub fn to_f64(&self) -> Strategy<f64> {
        Strategy {
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult<T> {
    pub value: T,
    pub s_a: Strategy<T>,
    pub s_b: Strategy<T>,
    pub length: usize,
    pub best_response_gap: T,
}

fn ones<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

fn min_of<T: Scalar>(v: &[T]) -> T {
    v.iter()
        .skip(1)
        .fold(v[0].clone(), |m, x| if *x < m { x.clone() } else { m })
}

fn max_of<T: Scalar>(v: &[T]) -> T {
    v.iter()
        .skip(1)
        .fold(v[0].clone(), |m, x| if *x > m { x.clone() } else { m })
}

fn check_orientation<T>(m: &ToeplitzPayoff<T>) -> Result<(), EquilibriumError> {
    if m.rows() > m.cols() {
        return Err(EquilibriumError::NotAdvantageMatrix {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(())
}

/// Whether `restrict(m, k)` is invertible with `restrict(m, k)⁻¹·1 ≥ −τ`.
pub fn nonneg_solution_test<T: Scalar>(m: &ToeplitzPayoff<T>, k: usize) -> bool {
    let Ok(mk) = m.restrict(k) else {
        return false;
    };
    let tau = T::tolerance(&m.scale(), NONNEG_REL_TOL);
    match levinson_solve(&mk, &ones(k)) {
        Ok(report) => report.solution.iter().all(|y| *y >= -tau.clone()),
        Err(_) => false,
    }
}

/// Binary search for the advantage player's strategy length.
///
/// Invariant: the test passes at `low` and fails at `high` (exclusive).
pub fn find_length<T: Scalar>(m: &ToeplitzPayoff<T>) -> Result<usize, EquilibriumError> {
    check_orientation(m)?;
    if m.rows() < 2 {
        return Err(EquilibriumError::DegenerateChips);
    }
    let (mut low, mut high) = (1, m.min_dim() + 1);
    while low + 1 != high {
        let k = (low + high) / 2;
        if nonneg_solution_test(m, k) {
            low = k;
        } else {
            high = k;
        }
    }
    Ok(low)
}

/// `M(ℓ)⁻¹·1` normalized to a distribution, padded to the column cap.
pub fn advantage_strategy<T: Scalar>(m: &ToeplitzPayoff<T>, len: usize) -> Result<Strategy<T>, EquilibriumError> {
    let ml = m.restrict(len)?;
    let mut y = levinson_solve(&ml, &ones(len))?.solution;
    let tau = T::tolerance(&m.scale(), NONNEG_REL_TOL);
    for (index, yi) in y.iter_mut().enumerate() {
        if yi.is_negative() {
            if *yi < -tau.clone() {
                return Err(EquilibriumError::NegativeStrategy {
                    index,
                    value: yi.to_f64(),
                });
            }
            *yi = T::zero();
        }
    }
    let total = y.iter().fold(T::zero(), |acc, v| acc + v.clone());
    if !total.is_positive() {
        return Err(EquilibriumError::ZeroMass);
    }
    let probs: Vec<T> = y.into_iter().map(|v| v / total.clone()).collect();
    Ok(Strategy::new(probs).padded(m.cols() - 1))
}

/// Bids `0..ℓ` in reverse order, padded to `opponent_cap + 1` entries.
pub fn reverse<T: Scalar>(s: &Strategy<T>, opponent_cap: usize) -> Strategy<T> {
    let len = s.length();
    let mut probs: Vec<T> = s.probs[..len].iter().rev().cloned().collect();
    probs.resize(probs.len().max(opponent_cap + 1), T::zero());
    probs.truncate(opponent_cap + 1);
    Strategy::new(probs)
}

/// Equilibrium of the turn whose advantage-player matrix is `m`.
pub fn solve_turn<T: Scalar>(m: &ToeplitzPayoff<T>) -> Result<EquilibriumResult<T>, EquilibriumError> {
    check_orientation(m)?;
    if m.rows() == 1 {
        // The opponent can only bid 0 and loses the tie.
        let row: Vec<T> = (0..m.cols()).map(|j| m.entry(0, j).clone()).collect();
        let best = max_of(&row);
        let bid = row.iter().position(|v| *v == best).expect("nonempty row");
        return Ok(EquilibriumResult {
            value: best,
            s_a: Strategy::pure(bid, m.cols() - 1),
            s_b: Strategy::pure(0, 0),
            length: bid + 1,
            best_response_gap: T::zero(),
        });
    }
    let length = find_length(m)?;
    let s_a = advantage_strategy(m, length)?;
    let s_b = reverse(&s_a, m.rows() - 1);
    let value = min_of(&m.apply(&s_a.probs)?);
    let deviation = max_of(&m.apply_transpose(&s_b.probs)?);
    Ok(EquilibriumResult {
        best_response_gap: deviation - value.clone(),
        value,
        s_a,
        s_b,
        length,
    })
}

/// A turn solved from A's point of view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnSolution<T> {
    pub value: T,
    pub strategy_a: Strategy<T>,
    pub strategy_b: Strategy<T>,
    pub length: usize,
    pub advantage: Player,
    pub best_response_gap: T,
}

/// Solves the turn with A's adjusted matrix `m_a`, whose zero-sum total is
/// `total`.
pub fn solve_for<T: Scalar>(
    m_a: &ToeplitzPayoff<T>,
    total: &T,
    advantage: Player,
) -> Result<TurnSolution<T>, EquilibriumError> {
    match advantage {
        Player::A => {
            let r = solve_turn(m_a)?;
            Ok(TurnSolution {
                value: r.value,
                strategy_a: r.s_a,
                strategy_b: r.s_b,
                length: r.length,
                advantage,
                best_response_gap: r.best_response_gap,
            })
        }
        Player::B => {
            let r = solve_turn(&m_a.opponent_matrix(total))?;
            Ok(TurnSolution {
                value: total.clone() - r.value,
                strategy_a: r.s_b,
                strategy_b: r.s_a,
                length: r.length,
                advantage,
                best_response_gap: r.best_response_gap,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport<T> {
    /// `s_bᵀ·M·s_a`.
    pub value: T,
    /// Largest deviation of `M·s_a` from `value` on the support of `s_b`.
    pub equalization_error: T,
    /// Gain of the best pure deviation of the column player.
    pub gap_a: T,
    /// Gain of the best pure deviation of the row player.
    pub gap_b: T,
    pub gap_free: bool,
    pub bids_zero: bool,
    /// `s_b` bids 1 with positive probability (vacuous for length 1).
    pub opponent_bids_one: bool,
}

impl<T: Scalar> VerificationReport<T> {
    pub fn equalized(&self) -> bool {
        self.equalization_error.is_negligible(&T::one(), EQUALIZATION_TOL)
    }

    pub fn is_equilibrium(&self) -> bool {
        let tol = T::tolerance(&T::one(), BEST_RESPONSE_TOL);
        self.gap_a <= tol && self.gap_b <= tol
    }

    pub fn structural(&self) -> bool {
        self.gap_free && self.bids_zero && self.opponent_bids_one
    }

    pub fn passed(&self) -> bool {
        self.equalized() && self.is_equilibrium() && self.structural()
    }
}

/// Checks a candidate pair on the advantage player's matrix.
pub fn verify_equilibrium<T: Scalar>(
    m: &ToeplitzPayoff<T>,
    s_a: &Strategy<T>,
    s_b: &Strategy<T>,
) -> Result<VerificationReport<T>, EquilibriumError> {
    let payoffs = m.apply(&s_a.probs)?;
    let value = m.expected_payoff(&s_b.probs, &s_a.probs)?;
    let equalization_error = s_b
        .support()
        .into_iter()
        .map(|i| (payoffs[i].clone() - value.clone()).abs())
        .fold(T::zero(), |acc, e| if e > acc { e } else { acc });
    let gap_a = max_of(&m.apply_transpose(&s_b.probs)?) - value.clone();
    let gap_b = value.clone() - min_of(&payoffs);
    Ok(VerificationReport {
        equalization_error,
        gap_a,
        gap_b,
        gap_free: s_a.is_gap_free(),
        bids_zero: s_a.get(0).is_positive(),
        opponent_bids_one: s_a.length() < 2 || s_b.get(1).is_positive(),
        value,
    })
}
