//! Floating-point matrix-game value by kernel enumeration.

use itertools::Itertools;

/// Feasibility slack, relative to the largest entry.
const TOL: f64 = 1e-10;

fn solve(a: &[Vec<f64>], transpose: bool) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| if transpose { a[j][i] } else { a[i][j] }).collect();
            row.push(1.0);
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))?;
        if m[p][col].abs() < 1e-300 {
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
        let acc = m[r][n] - (r + 1..n).map(|c| m[r][c] * x[c]).sum::<f64>();
        x[r] = acc / m[r][r];
    }
    Some(x)
}

/// Value of the game `m` (rows minimize, columns maximize) and one optimal
/// column strategy.
pub fn game_value(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let (rows, cols) = (m.len(), m[0].len());
    let lo = m.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;
    let s: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
    let scale = s.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = TOL * scale;
    for size in 1..=rows.min(cols) {
        for ri in (0..rows).combinations(size) {
            for ci in (0..cols).combinations(size) {
                let sub: Vec<Vec<f64>> = ri.iter().map(|&i| ci.iter().map(|&j| s[i][j]).collect()).collect();
                let (Some(y), Some(z)) = (solve(&sub, false), solve(&sub, true)) else {
                    continue;
                };
                let sy: f64 = y.iter().sum();
                let sz: f64 = z.iter().sum();
                if sy <= 0.0 || sz <= 0.0 || !sy.is_finite() || !sz.is_finite() {
                    continue;
                }
                let v = 1.0 / sy;
                if y.iter().chain(&z).any(|&t| t * v < -tol) {
                    continue;
                }
                let mut p = vec![0.0; cols];
                for (&j, yj) in ci.iter().zip(&y) {
                    p[j] = (yj * v).max(0.0);
                }
                let mut q = vec![0.0; rows];
                for (&i, zi) in ri.iter().zip(&z) {
                    q[i] = (zi / sz).max(0.0);
                }
                let rows_ok = s.iter().all(|r| r.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() >= v - tol);
                let cols_ok = (0..cols).all(|j| (0..rows).map(|i| s[i][j] * q[i]).sum::<f64>() <= v + tol);
                if rows_ok && cols_ok {
                    return (v - shift, p);
                }
            }
        }
    }
    panic!("no optimal kernel found within tolerance");
}
