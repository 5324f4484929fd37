//! Toeplitz payoff matrices of a single bidding turn.
//!
//! Rows are the row player's bids `0..rows`, columns the column player's bids
//! `0..cols`, and the entry only depends on the difference `d = col - row`
//! because both players pay each other. For A's own matrix the column player
//! is A, so `cols = a + 1` and `rows = b + 1`.
//!
//! Layout: one contiguous vector `diag` holding `d = -(rows-1) ..= cols-1` in
//! increasing order, i.e. `diag[d + rows - 1]`. No other layout exists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game_graph::{ChipState, GameGraph, Player, VertexId};
use crate::scalar::{max_abs, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("no value for vertex {vertex} with {a} chips for A")]
    MissingValue { vertex: VertexId, a: u32 },
    #[error("vertex {0} is terminal")]
    TerminalVertex(VertexId),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid restriction length {len} for a {rows}x{cols} matrix")]
    InvalidLength { len: usize, rows: usize, cols: usize },
    #[error("malformed matrix: {0}")]
    Malformed(String),
}

/// Source of already-computed values `v_A(vertex, a)` at a fixed chip total.
pub trait ValueLookup<T> {
    fn value(&self, v: VertexId, a: u32) -> Option<T>;
}

impl<T, F> ValueLookup<T> for F
where
    F: Fn(VertexId, u32) -> Option<T>,
{
    fn value(&self, v: VertexId, a: u32) -> Option<T> {
        self(v, a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPayoff<T>", into = "RawPayoff<T>")]
#[serde(bound(serialize = "T: Clone + Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ToeplitzPayoff<T> {
    rows: usize,
    cols: usize,
    diag: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct RawPayoff<T> {
    rows: usize,
    cols: usize,
    diag: Vec<T>,
}

impl<T> TryFrom<RawPayoff<T>> for ToeplitzPayoff<T> {
    type Error = MatrixError;

    fn try_from(raw: RawPayoff<T>) -> Result<Self, Self::Error> {
        ToeplitzPayoff::from_diagonal(raw.rows, raw.cols, raw.diag)
    }
}

impl<T> From<ToeplitzPayoff<T>> for RawPayoff<T> {
    fn from(m: ToeplitzPayoff<T>) -> Self {
        RawPayoff {
            rows: m.rows,
            cols: m.cols,
            diag: m.diag,
        }
    }
}

impl<T> ToeplitzPayoff<T> {
    /// `diag` in storage order, `d = -(rows-1) ..= cols-1`.
    pub fn from_diagonal(rows: usize, cols: usize, diag: Vec<T>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Malformed(format!("empty {rows}x{cols} matrix")));
        }
        if diag.len() != rows + cols - 1 {
            return Err(MatrixError::DimensionMismatch {
                expected: rows + cols - 1,
                got: diag.len(),
            });
        }
        Ok(ToeplitzPayoff { rows, cols, diag })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(isize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let diag = (-(rows as isize - 1)..cols as isize).map(&mut f).collect();
        ToeplitzPayoff { rows, cols, diag }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn min_dim(&self) -> usize {
        self.rows.min(self.cols)
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    /// Payoff when the column bid exceeds the row bid by `d`.
    pub fn at_diff(&self, d: isize) -> &T {
        &self.diag[(d + self.rows as isize - 1) as usize]
    }

    pub fn entry(&self, row: usize, col: usize) -> &T {
        &self.diag[col + self.rows - 1 - row]
    }

    /// Smallest and largest stored difference.
    pub fn diff_range(&self) -> (isize, isize) {
        (-(self.rows as isize - 1), self.cols as isize - 1)
    }
}

impl<T: Scalar> ToeplitzPayoff<T> {
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).clone()).collect())
            .collect()
    }

    /// Largest absolute entry; the reference scale for relative tolerances.
    pub fn scale(&self) -> T {
        max_abs(&self.diag)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> ToeplitzPayoff<U> {
        ToeplitzPayoff {
            rows: self.rows,
            cols: self.cols,
            diag: self.diag.iter().map(f).collect(),
        }
    }

    /// The row player's matrix of the same turn: `total - self^T`.
    ///
    /// `total` is the zero-sum total, 1 for an unadjusted turn and
    /// `1 + (a+b)x` for an adjusted one.
    pub fn opponent_matrix(&self, total: &T) -> Self {
        let diag = self.diag.iter().rev().map(|v| total.clone() - v.clone()).collect();
        ToeplitzPayoff {
            rows: self.cols,
            cols: self.rows,
            diag,
        }
    }

    /// Adds the chip bonus `x` per chip the column player holds after the
    /// bids: entry at difference `d` gains `x * (cols - 1 - d)`.
    pub fn adjust_precision(&self, x: &T) -> Self {
        let own = self.cols as isize - 1;
        let (lo, _) = self.diff_range();
        let diag = self
            .diag
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let d = lo + k as isize;
                v.clone() + x.clone() * T::from_i64((own - d) as i64)
            })
            .collect();
        ToeplitzPayoff {
            rows: self.rows,
            cols: self.cols,
            diag,
        }
    }

    /// Top-left `len x len` minor: the turn with both bids capped at `len-1`.
    pub fn restrict(&self, len: usize) -> Result<Self, MatrixError> {
        if len == 0 || len > self.min_dim() {
            return Err(MatrixError::InvalidLength {
                len,
                rows: self.rows,
                cols: self.cols,
            });
        }
        let first = self.rows - len;
        Ok(ToeplitzPayoff {
            rows: len,
            cols: len,
            diag: self.diag[first..first + 2 * len - 1].to_vec(),
        })
    }

    /// `self * s`: the column player's payoff against each pure row bid.
    pub fn apply(&self, s: &[T]) -> Result<Vec<T>, MatrixError> {
        if s.len() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: self.cols,
                got: s.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(T::zero(), |acc, j| acc + self.entry(i, j).clone() * s[j].clone())
            })
            .collect())
    }

    /// `r^T * self`: the column player's payoff for each pure column bid
    /// against row strategy `r`.
    pub fn apply_transpose(&self, r: &[T]) -> Result<Vec<T>, MatrixError> {
        if r.len() != self.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: self.rows,
                got: r.len(),
            });
        }
        Ok((0..self.cols)
            .map(|j| {
                (0..self.rows).fold(T::zero(), |acc, i| acc + self.entry(i, j).clone() * r[i].clone())
            })
            .collect())
    }

    /// `row^T * self * col`.
    pub fn expected_payoff(&self, row: &[T], col: &[T]) -> Result<T, MatrixError> {
        if row.len() != self.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: self.rows,
                got: row.len(),
            });
        }
        let p = self.apply(col)?;
        Ok(p.into_iter()
            .zip(row)
            .fold(T::zero(), |acc, (pi, ri)| acc + pi * ri.clone()))
    }
}

fn terminal_or_lookup<T: Scalar, L: ValueLookup<T>>(
    g: &GameGraph,
    values: &L,
    w: VertexId,
    a: u32,
) -> Result<T, MatrixError> {
    if w == g.win_a() {
        Ok(T::one())
    } else if w == g.win_b() {
        Ok(T::zero())
    } else {
        values.value(w, a).ok_or(MatrixError::MissingValue { vertex: w, a })
    }
}

/// Value for A after the bids, given the bid winner and A's chips.
///
/// The winner picks who moves: its own best move or the opponent's best
/// reply, whichever suits it better. A player without edges can't be
/// picked.
pub fn resolved_value<T: Scalar, L: ValueLookup<T>>(
    g: &GameGraph,
    v: VertexId,
    a_after: u32,
    winner: Player,
    values: &L,
) -> Result<T, MatrixError> {
    let best_a = best_of(g, v, a_after, Player::A, values)?;
    let best_b = best_of(g, v, a_after, Player::B, values)?;
    let pick = match (best_a, best_b) {
        (Some(x), Some(y)) => match winner {
            Player::A => if y > x { y } else { x },
            Player::B => if x < y { x } else { y },
        },
        (Some(x), None) => x,
        (None, Some(y)) => y,
        (None, None) => return Err(MatrixError::TerminalVertex(v)),
    };
    Ok(pick)
}

/// Best value `mover` can reach from `v` (max for A, min for B).
pub fn best_of<T: Scalar, L: ValueLookup<T>>(
    g: &GameGraph,
    v: VertexId,
    a_after: u32,
    mover: Player,
    values: &L,
) -> Result<Option<T>, MatrixError> {
    let mut best: Option<T> = None;
    for &w in g.edges(v, mover) {
        let val = terminal_or_lookup(g, values, w, a_after)?;
        best = Some(match best {
            None => val,
            Some(b) => match mover {
                Player::A => if val > b { val } else { b },
                Player::B => if val < b { val } else { b },
            },
        });
    }
    Ok(best)
}

/// A's unadjusted payoff matrix at `v` with `chips`.
///
/// Difference `d` (A's bid minus B's) moves A to `a - d` chips. A wins the
/// bid for `d > 0`, or `d = 0` when A holds `advantage`.
pub fn build_matrix<T: Scalar, L: ValueLookup<T>>(
    g: &GameGraph,
    v: VertexId,
    chips: ChipState,
    values: &L,
    advantage: Player,
) -> Result<ToeplitzPayoff<T>, MatrixError> {
    if g.is_terminal(v) {
        return Err(MatrixError::TerminalVertex(v));
    }
    let (a, b) = (chips.a as isize, chips.b as isize);
    let mut diag = Vec::with_capacity((a + b + 1) as usize);
    for d in -b..=a {
        let winner = if d > 0 || (d == 0 && advantage == Player::A) {
            Player::A
        } else {
            Player::B
        };
        diag.push(resolved_value(g, v, (a - d) as u32, winner, values)?);
    }
    ToeplitzPayoff::from_diagonal(chips.b as usize + 1, chips.a as usize + 1, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_graph::{race_graph, GraphBuilder};
    use crate::scalar::ratio;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn int_matrix(m: &ToeplitzPayoff<f64>) -> Vec<Vec<i64>> {
        m.to_dense()
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as i64).collect())
            .collect()
    }

    /// Unadjusted race values at `(1,1)`: whoever wins the single bid wins,
    /// so A wins exactly when it holds at least as many chips.
    fn race_lookup(g: &GameGraph, total: u32) -> impl Fn(VertexId, u32) -> Option<f64> + '_ {
        let inner = g.id("1,1").unwrap();
        move |v, a| (v == inner).then(|| if a >= total - a { 1.0 } else { 0.0 })
    }

    #[test]
    fn race_2_1_matrices_under_bilateral_exchange() {
        let g = race_graph(2, 1).unwrap();
        let chips = ChipState::new(5, 3);
        let lookup = race_lookup(&g, 8);
        let m: ToeplitzPayoff<f64> =
            build_matrix(&g, g.start(), chips, &lookup, chips.advantage()).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 6));
        // Bidding two more than B leaves A with 3 against 5 at (1,1), a loss.
        assert_eq!(
            int_matrix(&m),
            vec![
                vec![1, 1, 0, 0, 0, 0],
                vec![0, 1, 1, 0, 0, 0],
                vec![0, 0, 1, 1, 0, 0],
                vec![0, 0, 0, 1, 1, 0],
            ]
        );
        let mb = m.opponent_matrix(&1.0);
        assert_eq!((mb.rows(), mb.cols()), (6, 4));
        assert_eq!(int_matrix(&mb)[0], vec![0, 1, 1, 1]);
        assert_eq!(int_matrix(&mb)[2], vec![1, 0, 0, 1]);
    }

    #[test]
    fn forced_win_is_all_ones() {
        let mut b = GraphBuilder::default();
        let s = b.vertex("s");
        let wa = b.win_a();
        b.edge(s, wa, Player::A).edge(s, wa, Player::B);
        let g = b.build().unwrap();
        let none = |_: VertexId, _: u32| -> Option<f64> { None };
        let m = build_matrix(&g, s, ChipState::new(2, 4), &none, Player::B).unwrap();
        assert!(m.diagonal().iter().all(|&v| v == 1.0));
        assert!(matches!(
            build_matrix(&g, g.win_a(), ChipState::new(1, 1), &none, Player::A),
            Err(MatrixError::TerminalVertex(_))
        ));
    }

    #[test]
    fn missing_value_is_reported() {
        let g = race_graph(2, 1).unwrap();
        let none = |_: VertexId, _: u32| -> Option<f64> { None };
        let err = build_matrix(&g, g.start(), ChipState::new(1, 1), &none, Player::A).unwrap_err();
        assert!(matches!(err, MatrixError::MissingValue { .. }));
    }

    #[test]
    fn opponent_of_all_ones_is_zero() {
        let m = ToeplitzPayoff::from_fn(3, 5, |_| 1.0);
        let o = m.opponent_matrix(&1.0);
        assert_eq!((o.rows(), o.cols()), (5, 3));
        assert!(o.diagonal().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjust_corners() {
        let m = ToeplitzPayoff::from_fn(4, 6, |_| 0.0);
        let adj = m.adjust_precision(&1.0);
        assert_eq!(*adj.entry(0, 0), 5.0);
        assert_eq!(*adj.entry(3, 5), 3.0);
        assert_eq!(*adj.entry(3, 0), 8.0);
        assert_eq!(*adj.entry(0, 5), 0.0);
    }

    #[test]
    fn adjust_vanishes_as_x_goes_to_zero() {
        let g = race_graph(2, 1).unwrap();
        let lookup = race_lookup(&g, 8);
        let m: ToeplitzPayoff<f64> =
            build_matrix(&g, g.start(), ChipState::new(5, 3), &lookup, Player::A).unwrap();
        let adj = m.adjust_precision(&1e-12);
        let dev = m
            .diagonal()
            .iter()
            .zip(adj.diagonal())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-11);
    }

    #[test]
    fn adjusted_race_diagonal_is_decreasing() {
        let g = race_graph(2, 1).unwrap();
        let lookup = race_lookup(&g, 8);
        let m: ToeplitzPayoff<f64> =
            build_matrix(&g, g.start(), ChipState::new(5, 3), &lookup, Player::A).unwrap();
        let adj = m.adjust_precision(&0.01);
        let (neg, nonneg) = adj.diagonal().split_at(m.rows() - 1);
        assert!(neg.windows(2).all(|w| w[1] < w[0]));
        assert!(nonneg.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn restrict_takes_top_left_minor() {
        let m = ToeplitzPayoff::from_fn(4, 6, |d| d as f64);
        let r = m.restrict(2).unwrap();
        assert_eq!(r.to_dense(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.restrict(3).unwrap().entry(i, j), m.entry(i, j));
            }
        }
        let sq = ToeplitzPayoff::from_fn(3, 3, |d| (d * d) as f64);
        assert_eq!(sq.restrict(3).unwrap(), sq);
        assert!(m.restrict(5).is_err());
        assert!(m.restrict(0).is_err());
    }

    #[test]
    fn bilinear_example() {
        let m = ToeplitzPayoff::from_diagonal(2, 2, vec![ratio(0, 1), ratio(1, 1), ratio(1, 2)]).unwrap();
        let half = vec![ratio(1, 2), ratio(1, 2)];
        assert_eq!(m.apply(&half).unwrap(), vec![ratio(3, 4), ratio(1, 2)]);
        assert_eq!(m.expected_payoff(&half, &half).unwrap(), ratio(5, 8));
        assert_eq!(
            m.apply(&[ratio(1, 1), ratio(0, 1)]).unwrap(),
            vec![ratio(1, 1), ratio(0, 1)]
        );
        assert!(matches!(
            m.apply(&[ratio(1, 1)]),
            Err(MatrixError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn json_layout() {
        let m = ToeplitzPayoff::from_diagonal(2, 3, vec![0.0, 1.0, 0.5, 0.25]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"rows":2,"cols":3,"diag":[0.0,1.0,0.5,0.25]}"#);
        let back: ToeplitzPayoff<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ToeplitzPayoff<f64>>(r#"{"rows":2,"cols":3,"diag":[1]}"#).is_err());
    }

    fn exact(m: &ToeplitzPayoff<f64>) -> ToeplitzPayoff<BigRational> {
        m.map(|v| BigRational::from_float(*v).unwrap())
    }

    proptest! {
        #[test]
        fn toeplitz_entries_are_diagonal_constant(rows in 1usize..7, cols in 1usize..7, seed in prop::collection::vec(0.0f64..1.0, 13)) {
            let m = ToeplitzPayoff::from_fn(rows, cols, |d| seed[(d + 6) as usize]);
            for i in 0..rows.saturating_sub(1) {
                for j in 0..cols.saturating_sub(1) {
                    prop_assert_eq!(m.entry(i, j), m.entry(i + 1, j + 1));
                }
            }
        }

        #[test]
        fn opponent_is_total_minus_transpose(rows in 1usize..7, cols in 1usize..7, x in 0.0f64..0.1, seed in prop::collection::vec(0.0f64..1.0, 13)) {
            let m = ToeplitzPayoff::from_fn(rows, cols, |d| seed[(d + 6) as usize]).adjust_precision(&x);
            let total = 1.0 + (rows + cols - 2) as f64 * x;
            let o = m.opponent_matrix(&total);
            for i in 0..rows {
                for j in 0..cols {
                    prop_assert!((o.entry(j, i) + m.entry(i, j) - total).abs() <= 1e-12);
                }
            }
            prop_assert_eq!(o.opponent_matrix(&total).diagonal().len(), m.diagonal().len());
            let back = exact(&m).opponent_matrix(&BigRational::from_float(total).unwrap())
                .opponent_matrix(&BigRational::from_float(total).unwrap());
            prop_assert_eq!(back, exact(&m));
        }

        #[test]
        fn apply_matches_dense_rows(rows in 1usize..6, cols in 1usize..7, seed in prop::collection::vec(0.0f64..1.0, 12), s in prop::collection::vec(0.0f64..1.0, 7)) {
            let m = ToeplitzPayoff::from_fn(rows, cols, |d| seed[(d + 5) as usize]);
            let s = &s[..cols];
            let p = m.apply(s).unwrap();
            let dense = m.to_dense();
            for i in 0..rows {
                let naive: f64 = dense[i].iter().zip(s).map(|(a, b)| a * b).sum();
                prop_assert!((p[i] - naive).abs() <= 1e-12);
            }
        }
    }
}
