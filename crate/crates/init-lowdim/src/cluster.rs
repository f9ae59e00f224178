//! Single-linkage grouping of accepted net points.
//!
//! Candidates are agglomerated until `k` clusters remain. Input order must
//! not matter, so points are first permuted into lexicographic coordinate
//! order; the linkage then sees a canonical sequence and its internal tie
//! breaks become reproducible. Returned clusters hold indices into the
//! caller's slice, each cluster sorted ascending, clusters ordered by
//! their lexicographically smallest member point.

use kodama::{linkage, Method};
use nalgebra::DVector;

use crate::error::InitError;

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.total_cmp(y);
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Groups `points` into exactly `k` clusters by single-linkage
/// agglomeration on Euclidean distances.
pub fn single_linkage_cluster(
    points: &[DVector<f64>],
    k: usize,
) -> Result<Vec<Vec<usize>>, InitError> {
    if k == 0 {
        return Err(InitError::BadConfig {
            reason: "cluster count must be positive".into(),
        });
    }
    let n = points.len();
    if n < k {
        return Err(InitError::TooFewCandidates {
            found: n,
            needed: k,
            candidates: Vec::new(),
        });
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&i, &j| lex_cmp(&points[i], &points[j]).then(i.cmp(&j)));

    let mut clusters: Vec<Vec<usize>>;
    if k == n {
        clusters = perm.iter().map(|&i| vec![i]).collect();
    } else {
        let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in (a + 1)..n {
                condensed.push((&points[perm[a]] - &points[perm[b]]).norm());
            }
        }
        let dendrogram = linkage(&mut condensed, n, Method::Single);

        let mut membership: Vec<Option<Vec<usize>>> =
            (0..n).map(|a| Some(vec![perm[a]])).collect();
        membership.resize_with(2 * n - k, || None);
        for (t, step) in dendrogram.steps().iter().take(n - k).enumerate() {
            let mut merged = membership[step.cluster1].take().expect("live cluster");
            merged.extend(membership[step.cluster2].take().expect("live cluster"));
            membership[n + t] = Some(merged);
        }
        clusters = membership.into_iter().flatten().collect();
    }

    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by(|a, b| {
        let ra = a.iter().copied().min_by(|&i, &j| lex_cmp(&points[i], &points[j])).unwrap();
        let rb = b.iter().copied().min_by(|&i, &j| lex_cmp(&points[i], &points[j])).unwrap();
        lex_cmp(&points[ra], &points[rb]).then(ra.cmp(&rb))
    });
    debug_assert_eq!(clusters.len(), k);
    Ok(clusters)
}

/// Largest within-cluster distance and smallest across-cluster distance.
/// A healthy clustering has the first strictly below the second.
pub(crate) fn cluster_spread(points: &[DVector<f64>], clusters: &[Vec<usize>]) -> (f64, f64) {
    let mut max_intra = 0.0f64;
    let mut min_inter = f64::INFINITY;
    for (ci, a) in clusters.iter().enumerate() {
        for (cj, b) in clusters.iter().enumerate().skip(ci) {
            for &i in a {
                for &j in b {
                    if ci == cj && i >= j {
                        continue;
                    }
                    let dist = (&points[i] - &points[j]).norm();
                    if ci == cj {
                        max_intra = max_intra.max(dist);
                    } else {
                        min_inter = min_inter.min(dist);
                    }
                }
            }
        }
    }
    (max_intra, min_inter)
}
