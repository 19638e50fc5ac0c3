//! Exact enumeration over every subset of items.
//!
//! Matchings and packings are both independent sets of a conflict graph
//! (two items conflict when they share a point), so one table of
//! per-subset optima serves both. A second pass folds existence
//! probabilities into the table, giving `E[opt(S ∩ realization)]` for
//! every subset `S` at once.

use crate::error::{Error, Result};
use crate::model::Incidence;

/// Largest item count accepted for exact expectations.
pub const EXACT_ITEM_LIMIT: usize = 20;

/// Tolerance for comparing expectations that are sums of products.
pub const EXPECTATION_TOLERANCE: f64 = 1e-9;

/// Bit `j` of `masks[i]` is set when items `i` and `j` share a point.
pub fn conflict_masks<I: Incidence + ?Sized>(inc: &I) -> Result<Vec<u32>> {
    let m = inc.item_count();
    if m > EXACT_ITEM_LIMIT {
        return Err(Error::InstanceTooLarge {
            limit: EXACT_ITEM_LIMIT,
            actual: m,
        });
    }
    let mut by_point: Vec<u32> = vec![0; inc.point_count()];
    for i in 0..m {
        for &x in inc.members(i) {
            by_point[x as usize] |= 1 << i;
        }
    }
    Ok((0..m)
        .map(|i| {
            let all = inc.members(i).iter().fold(0u32, |acc, &x| acc | by_point[x as usize]);
            all & !(1 << i)
        })
        .collect())
}

/// Maximum number of pairwise non-conflicting items inside every mask.
pub fn subset_optima(conflicts: &[u32]) -> Vec<u8> {
    let m = conflicts.len();
    assert!(m <= EXACT_ITEM_LIMIT, "too many items for subset enumeration");
    let mut best = vec![0u8; 1 << m];
    for mask in 1usize..(1 << m) {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let take = 1 + best[rest & !(conflicts[i] as usize)];
        best[mask] = best[rest].max(take);
    }
    best
}

/// Turns per-subset values into `E[value(S ∩ X)]` where item `i` lies in the
/// random set `X` independently with probability `probs[i]`.
pub fn subset_expectations(values: &[u8], probs: &[f64]) -> Vec<f64> {
    let m = probs.len();
    assert_eq!(values.len(), 1 << m);
    let mut g: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    for (i, &p) in probs.iter().enumerate() {
        let bit = 1usize << i;
        for mask in 0..g.len() {
            if mask & bit != 0 {
                g[mask] = p * g[mask] + (1.0 - p) * g[mask ^ bit];
            }
        }
    }
    g
}

/// `E[opt(realization)]` by enumeration of all realizations.
pub fn exact_expectation<I: Incidence + ?Sized>(inc: &I, probs: &[f64]) -> Result<f64> {
    let conflicts = conflict_masks(inc)?;
    let table = subset_expectations(&subset_optima(&conflicts), probs);
    Ok(table[table.len() - 1])
}

/// Checks `E[opt(A)] <= E[opt(A1)] + E[opt(A \ A1)]` for the split given by
/// `part` (bit set means the item belongs to `A1`).
pub fn subadditive_at(expectations: &[f64], part: usize) -> bool {
    let full = expectations.len() - 1;
    let part = part & full;
    expectations[full] <= expectations[part] + expectations[full ^ part] + EXPECTATION_TOLERANCE
}

/// Number of two-way splits of the item set that violate subadditivity.
pub fn subadditivity_violations(expectations: &[f64]) -> usize {
    (0..expectations.len())
        .filter(|&part| !subadditive_at(expectations, part))
        .count()
}

/// All-split subadditivity check for the omniscient optimum of `inc`.
pub fn check_all_splits<I: Incidence + ?Sized>(inc: &I, probs: &[f64]) -> Result<usize> {
    let conflicts = conflict_masks(inc)?;
    let table = subset_expectations(&subset_optima(&conflicts), probs);
    Ok(subadditivity_violations(&table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn small_expectations() {
        let k3 = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!((exact_expectation(&k3, &[0.5; 3]).unwrap() - 0.875).abs() < 1e-12);
        let k22 = Graph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert!((exact_expectation(&k22, &[0.5; 4]).unwrap() - 1.375).abs() < 1e-12);
        let one = Graph::new(2, [(0, 1)]).unwrap();
        assert!((exact_expectation(&one, &[0.3]).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn optima_table() {
        let p4 = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = subset_optima(&conflict_masks(&p4).unwrap());
        assert_eq!(t, vec![0, 1, 1, 1, 1, 2, 1, 2]);
    }

    #[test]
    fn deterministic_subadditivity() {
        let k4 = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(check_all_splits(&k4, &[1.0; 6]).unwrap(), 0);
        assert_eq!(check_all_splits(&k4, &[0.5; 6]).unwrap(), 0);
    }

    #[test]
    fn limit_enforced() {
        let g = Graph::new(42, (0..21).map(|i| (2 * i, 2 * i + 1))).unwrap();
        assert!(matches!(
            conflict_masks(&g),
            Err(Error::InstanceTooLarge { limit: 20, actual: 21 })
        ));
    }
}
