//! Distance from a strategy to the segment spanned by `r` and `r` shifted
//! one bid up.

/// Largest per-entry deviation of `q` from the closest point
/// `t·r + (1−t)·shift(r)`, `t ∈ [0, 1]`. Vectors are compared at `q`'s
/// length.
pub fn segment_distance(q: &[f64], r: &[f64]) -> f64 {
    let n = q.len();
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let r0: Vec<f64> = (0..n).map(|i| at(r, i)).collect();
    let r1: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { at(r, i - 1) }).collect();
    // Least squares for t in q ≈ r1 + t·(r0 − r1).
    let dir: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| a - b).collect();
    let den: f64 = dir.iter().map(|d| d * d).sum();
    let t = if den == 0.0 {
        0.0
    } else {
        let num: f64 = (0..n).map(|i| (q[i] - r1[i]) * dir[i]).sum();
        (num / den).clamp(0.0, 1.0)
    };
    (0..n)
        .map(|i| (q[i] - (r1[i] + t * dir[i])).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let r = [0.6, 0.4, 0.0, 0.0];
        assert_eq!(segment_distance(&r, &r), 0.0);
        assert!(segment_distance(&[0.0, 0.6, 0.4, 0.0], &r) < 1e-15);
        assert!(segment_distance(&[0.3, 0.5, 0.2, 0.0], &r) < 1e-15);
        assert!(segment_distance(&[0.0, 0.0, 0.6, 0.4], &r) > 0.1);
    }
}
