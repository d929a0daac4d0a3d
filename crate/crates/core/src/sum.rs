//! Deterministic pairwise summation.
//!
//! Every trigonometric sum in the crate goes through [`pairwise_sum`] so that
//! results do not depend on thread count or iteration chunking.

const BLOCK: usize = 8;

/// Pairwise (cascade) summation. Error grows like O(log n · ε) instead of O(n · ε).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sum of the values produced by `term(0..n)`, accumulated pairwise.
pub fn pairwise_sum_by<F>(n: usize, mut term: F) -> f64
where
    F: FnMut(usize) -> f64,
{
    if n <= BLOCK {
        return (0..n).map(term).sum();
    }
    let values: Vec<f64> = (0..n).map(&mut term).collect();
    pairwise_sum(&values)
}
