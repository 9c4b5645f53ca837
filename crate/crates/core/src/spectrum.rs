//! Clustering of numerically degenerate eigenvalues.

/// Relative gap below which two eigenvalues are reported as equal.
pub const DEGENERACY_TOL: f64 = 1e-4;
const ABSOLUTE_FLOOR: f64 = 1e-8;

pub fn same_cluster(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs()) + ABSOLUTE_FLOOR
}

/// Splits a nondecreasing list into clusters of consecutive near-equal values.
/// Returns half-open index ranges.
pub fn clusters(sorted: &[f64], rel_tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || !same_cluster(sorted[i - 1], sorted[i], rel_tol) {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Courant index (1-based position of the first cluster member) of every entry.
pub fn courant_indices(sorted: &[f64], rel_tol: f64) -> Vec<usize> {
    let mut kappa = vec![0; sorted.len()];
    for range in clusters(sorted, rel_tol) {
        for i in range.clone() {
            kappa[i] = range.start + 1;
        }
    }
    kappa
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_follow_first_member() {
        let v = [0.0, 1.0, 2.0, 2.0 + 1e-6, 3.0];
        assert_eq!(courant_indices(&v, DEGENERACY_TOL), vec![1, 2, 3, 3, 5]);
    }

    #[test]
    fn empty_list() {
        assert!(clusters(&[], DEGENERACY_TOL).is_empty());
    }
}
