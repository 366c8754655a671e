//! Index-parallel execution helpers.
//!
//! `map_indices` fans a pure per-index computation out over a rayon pool when
//! the `parallel` feature is enabled and falls back to a plain sequential map
//! otherwise. Results are collected in index order, so both paths produce
//! identical output for a pure closure.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` sequentially.
#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indices_seq(n, f)
}

/// Sequential reference path, always available. `map_indices` must agree with
/// this for any pure closure.
pub fn map_indices_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Neumaier compensated sum. Keeps objective accumulation well below the
/// 1e-10 monotonicity tolerance even for thousands of terms, and is
/// deterministic regardless of thread count since it always runs sequentially.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_matches_sequential() {
        let f = |i: usize| (i as f64).sin() * (i as f64);
        let par: Vec<f64> = map_indices(1000, f);
        let seq: Vec<f64> = map_indices_seq(1000, f);
        assert_eq!(par, seq);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        // 1 + 1e-16 * 10000 loses the small terms under naive summation.
        let values: Vec<f64> = std::iter::once(1.0)
            .chain(std::iter::repeat_n(1e-16, 10_000))
            .collect();
        let sum = compensated_sum(&values);
        assert!((sum - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
