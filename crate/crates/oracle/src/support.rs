//! Exact equilibria of small zero-sum games by kernel enumeration.
//!
//! Every extreme optimal strategy comes from a square nonsingular submatrix
//! `K = M[I][J]` of the (positively shifted) game with
//! `p_J = v·K⁻¹·1`, `q_I = v·K⁻ᵀ·1` and `v = 1 / 1ᵀK⁻¹1`. All kernels are
//! enumerated; each is screened in floating point and confirmed exactly.

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::rational::{is_nonnegative, solve_exact, RationalMatrix, Q};

pub const MAX_DIM: usize = 9;

/// Screening slack; anything within it is re-checked exactly.
const SCREEN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    TooLarge { rows: usize, cols: usize },
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::TooLarge { rows, cols } => write!(f, "{rows}x{cols} exceeds {MAX_DIM}x{MAX_DIM}"),
        }
    }
}

impl std::error::Error for OracleError {}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub value: Q,
    /// Distinct extreme optimal strategies of the column (maximizing) player.
    pub maximizer: Vec<Vec<Q>>,
    /// Distinct extreme optimal strategies of the row (minimizing) player.
    pub minimizer: Vec<Vec<Q>>,
}

impl ExactSolution {
    pub fn value_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.value).unwrap_or(f64::NAN)
    }
}

struct Kernel<'a> {
    rows: &'a [usize],
    cols: &'a [usize],
}

/// Solves `K y = 1` (or `Kᵀ z = 1`) by Gaussian
/// elimination. `None` means "ill-conditioned, go exact".
fn float_solve(a: &[Vec<f64>], transpose: bool) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| if transpose { a[j][i] } else { a[i][j] }).collect();
            row.push(1.0);
            row
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let p = (col..n).max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))?;
        if m[p][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, p);
        let (top, bottom) = m.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in bottom {
            let f = row[col] / pivot[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *v -= f * p;
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

/// `true` unless the float screen proves the kernel infeasible.
fn screen(m: &[Vec<f64>], k: &Kernel) -> bool {
    let sub: Vec<Vec<f64>> = k.rows.iter().map(|&i| k.cols.iter().map(|&j| m[i][j]).collect()).collect();
    let (Some(y), Some(z)) = (float_solve(&sub, false), float_solve(&sub, true)) else {
        return true;
    };
    let sy: f64 = y.iter().sum();
    let sz: f64 = z.iter().sum();
    if sy <= 0.0 || sz <= 0.0 {
        return false;
    }
    let v = 1.0 / sy;
    let p: Vec<f64> = y.iter().map(|t| t * v).collect();
    let q: Vec<f64> = z.iter().map(|t| t / sz).collect();
    if p.iter().chain(&q).any(|&t| t < -SCREEN_TOL) {
        return false;
    }
    let slack = SCREEN_TOL * (1.0 + v.abs());
    let row_ok = m.iter().all(|row| k.cols.iter().zip(&p).map(|(&j, pj)| row[j] * pj).sum::<f64>() >= v - slack);
    let col_ok = (0..m[0].len()).all(|j| k.rows.iter().zip(&q).map(|(&i, qi)| m[i][j] * qi).sum::<f64>() <= v + slack);
    row_ok && col_ok
}

fn exact_kernel(m: &RationalMatrix, k: &Kernel) -> Option<(Q, Vec<Q>, Vec<Q>)> {
    let sub: Vec<Vec<Q>> = k
        .rows
        .iter()
        .map(|&i| k.cols.iter().map(|&j| m.entries[i][j].clone()).collect())
        .collect();
    let ones = vec![Q::one(); sub.len()];
    let y = solve_exact(&sub, &ones)?;
    let subt: Vec<Vec<Q>> = (0..sub.len()).map(|c| sub.iter().map(|r| r[c].clone()).collect()).collect();
    let z = solve_exact(&subt, &ones)?;
    let s: Q = y.iter().sum();
    if !s.is_positive() {
        return None;
    }
    let v = Q::one() / &s;
    let mut p = vec![Q::zero(); m.cols()];
    for (&j, yj) in k.cols.iter().zip(&y) {
        p[j] = yj * &v;
    }
    let mut q = vec![Q::zero(); m.rows()];
    for (&i, zi) in k.rows.iter().zip(&z) {
        q[i] = zi * &v;
    }
    if !is_nonnegative(&p) || !is_nonnegative(&q) {
        return None;
    }
    let rows_ok = m.apply(&p).iter().all(|t| *t >= v);
    let cols_ok = m.apply_transpose(&q).iter().all(|t| *t <= v);
    (rows_ok && cols_ok).then_some((v, p, q))
}

/// Value and all extreme optimal strategies of the game `m`, where the
/// column player maximizes.
pub fn support_enumeration(m: &RationalMatrix) -> Result<ExactSolution, OracleError> {
    if m.rows() > MAX_DIM || m.cols() > MAX_DIM {
        return Err(OracleError::TooLarge {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    // Positive entries make the value positive, so 1ᵀK⁻¹1 never vanishes.
    let shift = Q::one() - m.min_entry();
    let shifted = m.shifted(&shift);
    let approx = shifted.to_f64();

    let mut value: Option<Q> = None;
    let mut maximizer: Vec<Vec<Q>> = Vec::new();
    let mut minimizer: Vec<Vec<Q>> = Vec::new();
    for size in 1..=m.rows().min(m.cols()) {
        for rows in (0..m.rows()).combinations(size) {
            for cols in (0..m.cols()).combinations(size) {
                let k = Kernel { rows: &rows, cols: &cols };
                if !screen(&approx, &k) {
                    continue;
                }
                let Some((v, p, q)) = exact_kernel(&shifted, &k) else {
                    continue;
                };
                match &value {
                    None => value = Some(v),
                    Some(w) => assert_eq!(*w, v, "optimal kernels disagree on the value"),
                }
                if !maximizer.contains(&p) {
                    maximizer.push(p);
                }
                if !minimizer.contains(&q) {
                    minimizer.push(q);
                }
            }
        }
    }
    let value = value.expect("every finite matrix game has an optimal kernel");
    Ok(ExactSolution {
        value: value - shift,
        maximizer,
        minimizer,
    })
}
