//! Probability-simplex helpers shared by the scoring rules, the general
//! mechanism and the verification lab.

use crate::error::{Error, Result};

/// Reports must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Entries down to this negative value are clamped to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Checks that `v` is a probability vector of length `len`.
///
/// Tiny negative entries are clamped to zero; nothing is renormalized.
pub fn validate(field: &str, v: &[f64], len: usize) -> Result<Vec<f64>> {
    if v.len() != len {
        return Err(Error::DimensionMismatch {
            field: field.to_string(),
            expected: len,
            got: v.len(),
        });
    }
    let sum: f64 = v.iter().sum();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let finite = v.iter().all(|x| x.is_finite());
    if !finite || len == 0 || min < -NEGATIVE_TOLERANCE || (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NotOnSimplex {
            field: field.to_string(),
            sum,
            min,
        });
    }
    Ok(v.iter().map(|&x| x.max(0.0)).collect())
}

/// Checks that `p` is a probability in `[0, 1]`.
pub fn validate_probability(field: &str, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NotOnSimplex {
            field: field.to_string(),
            sum: p,
            min: p,
        });
    }
    Ok(p)
}

/// Uniform distribution over `n` states.
pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Vertex `e_k` of the `n`-state simplex.
pub fn vertex(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

/// `[1 - p, p]`: a binary quality as a two-state distribution where index 1
/// is the "event happened" state.
pub fn binary(p: f64) -> Vec<f64> {
    vec![1.0 - p, p]
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// All points of the `n`-state simplex whose coordinates are multiples of
/// `1 / divisions`, in lexicographic order of their integer numerators.
pub fn grid(n: usize, divisions: usize) -> Vec<Vec<f64>> {
    assert!(n > 0, "simplex needs at least one state");
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fill(&mut out, &mut counts, 0, divisions, divisions);
    out
}

fn fill(out: &mut Vec<Vec<f64>>, counts: &mut [usize], idx: usize, left: usize, total: usize) {
    let n = counts.len();
    if idx == n - 1 {
        counts[idx] = left;
        let d = total.max(1) as f64;
        out.push(counts.iter().map(|&c| c as f64 / d).collect());
        return;
    }
    for c in 0..=left {
        counts[idx] = c;
        fill(out, counts, idx + 1, left - c, total);
    }
}

/// Number of points `grid(n, divisions)` produces.
pub fn grid_len(n: usize, divisions: usize) -> usize {
    // C(divisions + n - 1, n - 1)
    let k = n - 1;
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (divisions + k - j) as u128 / (j + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

/// Largest division count whose simplex grid stays within `budget` points.
pub fn divisions_for_budget(n: usize, budget: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let mut d = 1;
    while grid_len(n, d + 1) <= budget && d < 1000 {
        d += 1;
    }
    d
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_sum() {
        let err = validate("p", &[0.4, 0.4], 2).unwrap_err();
        assert!(matches!(err, Error::NotOnSimplex { .. }));
    }

    #[test]
    fn clamps_tiny_negatives() {
        let v = validate("p", &[-1e-13, 1.0], 2).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
        assert!(validate("p", &[-1e-6, 1.0 + 1e-6], 2).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(validate("p", &[1.0], 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn grid_counts() {
        assert_eq!(grid(2, 10).len(), 11);
        assert_eq!(grid(3, 4).len(), grid_len(3, 4));
        assert_eq!(grid_len(3, 4), 15);
        assert_eq!(grid(1, 5), vec![vec![1.0]]);
        for p in grid(4, 3) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(grid_len(3, divisions_for_budget(3, 100)) <= 100);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(0.0, 1.0, 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert_eq!(g[50], 0.5);
    }
}
