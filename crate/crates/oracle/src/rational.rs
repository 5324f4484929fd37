use bidsolve_core::ExactPayoff;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

/// Dense matrix of exact rationals. Rows belong to the minimizing player.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    pub entries: Vec<Vec<Q>>,
}

impl RationalMatrix {
    pub fn new(entries: Vec<Vec<Q>>) -> Self {
        assert!(!entries.is_empty() && !entries[0].is_empty(), "empty matrix");
        assert!(entries.iter().all(|r| r.len() == entries[0].len()), "ragged matrix");
        RationalMatrix { entries }
    }

    pub fn from_toeplitz(m: &ExactPayoff) -> Self {
        Self::new(m.to_dense())
    }

    pub fn from_f64(rows: &[Vec<f64>]) -> Self {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| Q::from_float(v).expect("finite")).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn min_entry(&self) -> Q {
        self.entries.iter().flatten().min().cloned().expect("nonempty")
    }

    pub fn shifted(&self, c: &Q) -> Self {
        RationalMatrix {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|v| v + c).collect())
                .collect(),
        }
    }

    /// `M·p`.
    pub fn apply(&self, p: &[Q]) -> Vec<Q> {
        self.entries
            .iter()
            .map(|r| r.iter().zip(p).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `qᵀ·M`.
    pub fn apply_transpose(&self, q: &[Q]) -> Vec<Q> {
        (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| &self.entries[i][j] * &q[i]).sum())
            .collect()
    }
}

/// Gauss-Jordan over the rationals; `None` when singular.
pub fn solve_exact(a: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = Q::one() / &m[col][col];
        for v in &mut m[col][col..] {
            *v = &*v * &inv;
        }
        let pivot = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *v -= &f * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn is_nonnegative(v: &[Q]) -> bool {
    v.iter().all(|x| !x.is_negative())
}
