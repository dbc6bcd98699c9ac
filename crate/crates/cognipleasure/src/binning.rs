//! Discretization of the `[0, 5]` appraisal scale: fixed binners for the
//! two- and three-level accuracies, and exact 1-D k-means for data-driven
//! boundaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appraisal::Level;

#[derive(Debug, Error, PartialEq)]
pub enum BinningError {
    #[error("cannot cluster an empty dataset")]
    EmptyData,
    #[error("k = {k} exceeds the {distinct} distinct values in the data")]
    TooFewDistinctValues { distinct: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("data contains a non-finite value")]
    NonFiniteData,
}

/// Binary split at 3: values below are Low, 3 and above are High.
pub fn bin_binary(value: f64) -> Level {
    if value < 3.0 {
        Level::Low
    } else {
        Level::High
    }
}

/// Soft three-way split with an inclusive middle band [2.5, 3.5].
pub fn bin_soft(value: f64) -> Level {
    if value < 2.5 {
        Level::Low
    } else if value <= 3.5 {
        Level::Medium
    } else {
        Level::High
    }
}

/// Strict three-way split on the rounded value: up to 2 is Low, exactly 3 is
/// Medium, 4 and above is High. Rounding half-up closes the gaps between the
/// published anchor points, keeping the binner total.
pub fn bin_strict(value: f64) -> Level {
    let rounded = (value + 0.5).floor();
    if rounded <= 2.0 {
        Level::Low
    } else if rounded == 3.0 {
        Level::Medium
    } else {
        Level::High
    }
}

/// Three-way split at explicit boundaries, lower-inclusive on the upper side.
pub fn bin_boundaries(value: f64, b1: f64, b2: f64) -> Level {
    if value < b1 {
        Level::Low
    } else if value < b2 {
        Level::Medium
    } else {
        Level::High
    }
}

/// A binning function selectable at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "boundaries")]
pub enum Binner {
    Binary,
    Soft,
    Strict,
    Boundaries(f64, f64),
}

impl Binner {
    pub fn apply(&self, value: f64) -> Level {
        match self {
            Binner::Binary => bin_binary(value),
            Binner::Soft => bin_soft(value),
            Binner::Strict => bin_strict(value),
            Binner::Boundaries(b1, b2) => bin_boundaries(value, *b1, *b2),
        }
    }
}

/// Result of exact 1-D k-means: cluster centroids in ascending order, the
/// midpoint boundaries between them, the cluster sizes over the sorted data,
/// and the attained sum of squared errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub centroids: Vec<f64>,
    pub boundaries: Vec<f64>,
    pub sizes: Vec<usize>,
    pub sse: f64,
}

/// Relative tolerance for recognizing SSE ties. Partitions with equal SSE in
/// exact arithmetic can differ by a few ulps between summation orders, so
/// tie detection cannot use bitwise equality.
const TIE_EPS: f64 = 1e-9;

/// Exact optimal 1-D k-means.
///
/// In one dimension the optimum uses contiguous clusters of the sorted data,
/// so dynamic programming over split positions finds the global SSE minimum
/// directly — no seeding, no iteration, fully reproducible. When several
/// partitions attain the optimum (to within [`TIE_EPS`] relative), the split
/// vector is chosen lexicographically smallest: first cluster as small as
/// possible, then the second, and so on. Boundaries are the midpoints
/// between adjacent centroids (the 1-D Voronoi edges).
#[allow(clippy::needless_range_loop)] // index-form DP reads clearer here
pub fn kmeans1d(data: &[f64], k: usize) -> Result<Clustering, BinningError> {
    if k == 0 {
        return Err(BinningError::ZeroClusters);
    }
    if data.is_empty() {
        return Err(BinningError::EmptyData);
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(BinningError::NonFiniteData);
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let distinct = 1 + sorted.windows(2).filter(|w| w[0] < w[1]).count();
    if k > distinct {
        return Err(BinningError::TooFewDistinctValues { distinct, k });
    }
    let n = sorted.len();

    let mut prefix = vec![0.0f64; n + 1];
    let mut prefix_sq = vec![0.0f64; n + 1];
    for (i, &x) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
        prefix_sq[i + 1] = prefix_sq[i] + x * x;
    }
    // SSE of sorted[i..j); non-negative up to rounding.
    let cost = |i: usize, j: usize| -> f64 {
        let s = prefix[j] - prefix[i];
        let s2 = prefix_sq[j] - prefix_sq[i];
        (s2 - s * s / (j - i) as f64).max(0.0)
    };

    // suffix[m][i]: minimal SSE splitting sorted[i..n) into m clusters.
    let mut suffix = vec![vec![f64::INFINITY; n + 1]; k + 1];
    for i in 0..n {
        suffix[1][i] = cost(i, n);
    }
    for m in 2..=k {
        // need m-1 clusters after the first, so it ends by n-(m-1)
        for i in 0..=(n - m) {
            let mut best = f64::INFINITY;
            for t in (i + 1)..=(n - (m - 1)) {
                let candidate = cost(i, t) + suffix[m - 1][t];
                if candidate < best {
                    best = candidate;
                }
            }
            suffix[m][i] = best;
        }
    }

    // Reconstruct the lexicographically smallest optimal split: at each
    // stage take the earliest split whose total ties the stage optimum.
    let tol = TIE_EPS * (1.0 + suffix[k][0].abs());
    let mut splits = Vec::with_capacity(k + 1);
    splits.push(0);
    let mut start = 0usize;
    for m in (2..=k).rev() {
        let target = suffix[m][start];
        let mut chosen = None;
        for t in (start + 1)..=(n - (m - 1)) {
            if cost(start, t) + suffix[m - 1][t] <= target + tol {
                chosen = Some(t);
                break;
            }
        }
        let t = chosen.expect("dp reconstruction must find its own minimum");
        splits.push(t);
        start = t;
    }
    splits.push(n);

    let centroids: Vec<f64> = splits
        .windows(2)
        .map(|w| (prefix[w[1]] - prefix[w[0]]) / (w[1] - w[0]) as f64)
        .collect();
    let boundaries: Vec<f64> = centroids.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    let sizes: Vec<usize> = splits.windows(2).map(|w| w[1] - w[0]).collect();
    let sse = splits.windows(2).map(|w| cost(w[0], w[1])).sum();

    Ok(Clustering {
        centroids,
        boundaries,
        sizes,
        sse,
    })
}
