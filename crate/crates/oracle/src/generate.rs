//! Random precise advantage-player matrices.

use bidsolve_core::{ExactPayoff, Payoff, ToeplitzPayoff};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::rational::Q;

#[derive(Clone, Debug)]
pub struct PreciseInstance {
    /// Chips of the advantage player (the column player).
    pub own: usize,
    pub opp: usize,
    pub x: Q,
    pub exact: ExactPayoff,
    pub float: Payoff,
}

fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Chips drawn from `3..=8` each. The unadjusted diagonal takes values on a
/// 1/16 grid, nonincreasing in `d` on `d ≥ 0` and on `d < 0`; adding
/// `x·(own − d)` with `x ∈ {1/100, 1/1000}` makes it strictly decreasing.
pub fn random_precise<R: Rng + ?Sized>(rng: &mut R) -> PreciseInstance {
    let (a, b) = (rng.random_range(3..=8usize), rng.random_range(3..=8usize));
    let (own, opp) = (a.max(b), a.min(b));
    let x = if rng.random_bool(0.5) { q(1, 100) } else { q(1, 1000) };
    let mut pos: Vec<i64> = (0..=own).map(|_| rng.random_range(0..=16)).collect();
    pos.sort_unstable_by(|p, q| q.cmp(p));
    // neg[k] is d = -(k+1); values grow as d falls.
    let mut neg: Vec<i64> = (0..opp).map(|_| rng.random_range(0..=16)).collect();
    neg.sort_unstable();
    let exact = ToeplitzPayoff::from_fn(opp + 1, own + 1, |d| {
        let base = if d >= 0 { pos[d as usize] } else { neg[(-d - 1) as usize] };
        q(base, 16) + &x * q(own as i64 - d as i64, 1)
    });
    let float = exact.map(|v| v.to_f64().expect("finite"));
    PreciseInstance { own, opp, x, exact, float }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonals_strictly_decrease_per_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let inst = random_precise(&mut rng);
            let diag = inst.exact.diagonal();
            let (neg, pos) = diag.split_at(inst.opp);
            assert!(neg.windows(2).all(|w| w[0] > w[1]));
            assert!(pos.windows(2).all(|w| w[0] > w[1]));
            assert!(inst.exact.rows() <= inst.exact.cols());
        }
    }
}
