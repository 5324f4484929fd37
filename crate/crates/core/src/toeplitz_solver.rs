//! Square Toeplitz systems: Levinson recursion with a dense fallback.

use thiserror::Error;

use crate::payoff_matrix::ToeplitzPayoff;
use crate::scalar::{max_abs, Scalar};

pub const PIVOT_REL_TOL: f64 = 1e-12;
pub const RESIDUAL_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("leading minor {0} is numerically singular")]
    Breakdown(usize),
    #[error("matrix is singular")]
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Levinson,
    DenseFallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport<T> {
    pub solution: Vec<T>,
    pub method: SolveMethod,
    /// Smallest pivot magnitude met on the way.
    pub min_pivot: T,
}

fn check_square<T: Scalar>(t: &ToeplitzPayoff<T>, rhs: &[T]) -> Result<usize, SolveError> {
    if !t.is_square() {
        return Err(SolveError::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    if rhs.len() != t.rows() {
        return Err(SolveError::DimensionMismatch {
            expected: t.rows(),
            got: rhs.len(),
        });
    }
    Ok(t.rows())
}

/// `‖t·x − rhs‖∞`.
pub fn residual<T: Scalar>(t: &ToeplitzPayoff<T>, x: &[T], rhs: &[T]) -> T {
    let tx = t.apply(x).expect("conforming dimensions");
    tx.into_iter()
        .zip(rhs)
        .fold(T::zero(), |acc, (a, b)| {
            let r = (a - b.clone()).abs();
            if r > acc {
                r
            } else {
                acc
            }
        })
}

/// Levinson recursion only; `Breakdown` when a leading minor is singular.
pub fn levinson_raw<T: Scalar>(t: &ToeplitzPayoff<T>, rhs: &[T]) -> Result<SolveReport<T>, SolveError> {
    check_square(t, rhs)?;
    let scale = t.scale();
    let tol = T::tolerance(&scale, PIVOT_REL_TOL);
    // Entry T[i][j] depends on k = i - j.
    let tk = |k: isize| t.at_diff(-k).clone();

    let t0 = tk(0);
    if t0.abs() <= tol {
        return Err(SolveError::Breakdown(1));
    }
    let mut pivot = t0.clone();
    let mut min_pivot = t0.abs();
    let mut f = vec![T::one() / t0.clone()];
    let mut b = f.clone();
    let mut x = vec![rhs[0].clone() / t0];

    for (m, r) in rhs.iter().enumerate().skip(1) {
        let mut ef = T::zero();
        let mut eb = T::zero();
        let mut ex = T::zero();
        for (i, ((fi, bi), xi)) in f.iter().zip(&b).zip(&x).enumerate() {
            ef = ef + tk((m - i) as isize) * fi.clone();
            eb = eb + tk(-(i as isize) - 1) * bi.clone();
            ex = ex + tk((m - i) as isize) * xi.clone();
        }
        let d = T::one() - ef.clone() * eb.clone();
        pivot = pivot * d.clone();
        if pivot.abs() <= tol {
            return Err(SolveError::Breakdown(m + 1));
        }
        if pivot.abs() < min_pivot {
            min_pivot = pivot.abs();
        }
        let mut nf = Vec::with_capacity(m + 1);
        let mut nb = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let fi = if i < m { f[i].clone() } else { T::zero() };
            let bi = if i > 0 { b[i - 1].clone() } else { T::zero() };
            nf.push((fi.clone() - ef.clone() * bi.clone()) / d.clone());
            nb.push((bi - eb.clone() * fi) / d.clone());
        }
        f = nf;
        b = nb;
        let c = r.clone() - ex;
        x.push(T::zero());
        for (xi, bi) in x.iter_mut().zip(&b) {
            *xi = xi.clone() + c.clone() * bi.clone();
        }
    }
    Ok(SolveReport {
        solution: x,
        method: SolveMethod::Levinson,
        min_pivot,
    })
}

/// Solves `t·x = rhs` in O(n²), falling back to dense elimination on
/// breakdown or when the Levinson residual is too large.
pub fn levinson_solve<T: Scalar>(t: &ToeplitzPayoff<T>, rhs: &[T]) -> Result<SolveReport<T>, SolveError> {
    match levinson_raw(t, rhs) {
        Ok(report) => {
            let bound = T::tolerance(&(T::one() + max_abs(rhs)), RESIDUAL_REL_TOL);
            if residual(t, &report.solution, rhs) <= bound {
                Ok(report)
            } else {
                dense_solve(t, rhs)
            }
        }
        Err(SolveError::Breakdown(_)) => dense_solve(t, rhs),
        Err(e) => Err(e),
    }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve<T: Scalar>(t: &ToeplitzPayoff<T>, rhs: &[T]) -> Result<SolveReport<T>, SolveError> {
    let n = check_square(t, rhs)?;
    let tol = T::tolerance(&t.scale(), PIVOT_REL_TOL);
    let mut a = t.to_dense();
    let mut y = rhs.to_vec();
    let mut min_pivot: Option<T> = None;

    for col in 0..n {
        let (p, _) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        let pv = a[p][col].clone();
        if pv.abs() <= tol {
            return Err(SolveError::Singular);
        }
        if min_pivot.as_ref().is_none_or(|m| pv.abs() < *m) {
            min_pivot = Some(pv.abs());
        }
        a.swap(col, p);
        y.swap(col, p);
        for r in col + 1..n {
            let factor = a[r][col].clone() / pv.clone();
            if factor.is_zero() {
                continue;
            }
            let (top, bottom) = a.split_at_mut(r);
            for (v, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *v = v.clone() - factor.clone() * p.clone();
            }
            y[r] = y[r].clone() - factor * y[col].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = y[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(SolveReport {
        solution: x,
        method: SolveMethod::DenseFallback,
        min_pivot: min_pivot.unwrap_or_else(T::zero),
    })
}
