//! Length by linear scan over every candidate, dense elimination only.

use bidsolve_core::toeplitz_solver::dense_solve;
use bidsolve_core::Payoff;

pub const NONNEG_REL_TOL: f64 = 1e-9;

pub fn dense_nonneg_test(m: &Payoff, k: usize) -> bool {
    let Ok(mk) = m.restrict(k) else {
        return false;
    };
    let tau = NONNEG_REL_TOL * m.scale();
    match dense_solve(&mk, &vec![1.0; k]) {
        Ok(r) => r.solution.iter().all(|&y| y >= -tau),
        Err(_) => false,
    }
}

/// Largest `k` in `1..=min(rows, cols)` passing the test.
pub fn scan_length(m: &Payoff) -> usize {
    (1..=m.min_dim()).filter(|&k| dense_nonneg_test(m, k)).max().unwrap_or(1)
}
