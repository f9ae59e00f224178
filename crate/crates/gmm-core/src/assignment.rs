//! Exact minimum-cost assignment on a dense square matrix.
//!
//! Shortest-augmenting-path algorithm with dual potentials, O(n^3). Costs
//! must be finite; ties resolve deterministically from the scan order.

/// Returns `(total, perm)` minimizing `sum_i cost[i][perm[i]]` over
/// permutations, where `cost` is a square row-major matrix.
pub(crate) fn min_cost_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    assert!(cost.iter().all(|row| row.len() == n), "matrix not square");
    if n == 0 {
        return (0.0, Vec::new());
    }
    // 1-based arrays; p[j] is the row matched to column j, column 0 virtual.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[i][perm[i]]).sum();
    (total, perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::Rng;

    fn brute_force(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
        let n = cost.len();
        let mut best = (f64::INFINITY, Vec::new());
        for perm in (0..n).permutations(n) {
            let total: f64 = (0..n).map(|i| cost[i][perm[i]]).sum();
            if total < best.0 {
                best = (total, perm);
            }
        }
        best
    }

    #[test]
    fn identity_on_diagonal_dominant() {
        let cost = vec![
            vec![0.0, 5.0, 5.0],
            vec![5.0, 0.0, 5.0],
            vec![5.0, 5.0, 0.0],
        ];
        let (total, perm) = min_cost_assignment(&cost);
        assert_eq!(total, 0.0);
        assert_eq!(perm, vec![0, 1, 2]);
    }

    #[test]
    fn handles_negative_costs() {
        let cost = vec![vec![1.0, -2.0], vec![-3.0, 4.0]];
        let (total, perm) = min_cost_assignment(&cost);
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(total, -5.0);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        for trial in 0..200u64 {
            let mut rng = crate::stream::substream(trial, "assignment-test", &[]);
            let n = 1 + (rng.random::<u64>() % 7) as usize;
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| 10.0 * rng.random::<f64>() - 3.0).collect())
                .collect();
            let (fast_total, fast_perm) = min_cost_assignment(&cost);
            let (slow_total, _) = brute_force(&cost);
            assert!(
                (fast_total - slow_total).abs() <= 1e-12 * (1.0 + slow_total.abs()),
                "trial {trial}: {fast_total} vs {slow_total}"
            );
            // The returned permutation must actually achieve the total.
            let achieved: f64 = (0..n).map(|i| cost[i][fast_perm[i]]).sum();
            assert_eq!(achieved, fast_total);
            let mut seen = vec![false; n];
            for &j in &fast_perm {
                assert!(!seen[j]);
                seen[j] = true;
            }
        }
    }
}
