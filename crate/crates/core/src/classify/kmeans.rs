//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

const MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index (0-based) of every input row.
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squared distances.
    pub objective: f64,
    /// Objective after every assignment step of the winning restart.
    pub objective_trace: Vec<f64>,
    pub restart: usize,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest centroid, ties to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> usize {
        nearest(&self.centroids, x).0
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter().enumerate() {
        let d = sq_dist(mu, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_plus_plus(points: &[&[f64]], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // Rounding can leave `chosen` on a zero-weight point.
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&w| w > 0.0).unwrap();
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.push(points[pick].to_vec());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(points: &[&[f64]], mut centroids: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let (n, p, k) = (points.len(), points[0].len(), centroids.len());
    let mut assignments = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut objective = 0.0;
        let mut dists = Vec::with_capacity(n);
        for (i, x) in points.iter().enumerate() {
            let (c, d) = nearest(&centroids, x);
            changed |= assignments[i] != c;
            assignments[i] = c;
            objective += d;
            dists.push(d);
        }
        if let Some(&prev) = trace.last() {
            debug_assert!(objective <= prev * (1.0 + 1e-12) + 1e-12, "objective rose from {prev} to {objective}");
        }
        trace.push(objective);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; p]; k];
        let mut sizes = vec![0usize; k];
        for (x, &c) in points.iter().zip(&assignments) {
            sizes[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            } else {
                // Re-seed an empty cluster on the point farthest from its centroid.
                let far = (0..n).fold(0, |best, i| if dists[i] > dists[best] { i } else { best });
                centroids[c] = points[far].to_vec();
                dists[far] = 0.0;
            }
        }
    }
    (centroids, assignments, trace)
}

/// Best of `n_restarts` runs of Lloyd's algorithm by objective; restart `r`
/// draws from stream `r` of `seed`.
pub fn kmeans(data: &FeatureMatrix, k: usize, n_restarts: usize, seed: u64) -> Result<KMeansModel> {
    data.require_complete()?;
    let n = data.n_rows();
    if k == 0 || k > n {
        return Err(Error::Param(format!("k must be in 1..={n}, got {k}")));
    }
    let restarts = n_restarts.max(1);
    let points: Vec<&[f64]> = data.rows().collect();
    let runs: Vec<KMeansModel> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r as u64);
            let start = seed_plus_plus(&points, k, &mut rng);
            let (centroids, assignments, objective_trace) = lloyd(&points, start);
            KMeansModel {
                objective: *objective_trace.last().unwrap(),
                centroids,
                assignments,
                objective_trace,
                restart: r,
            }
        })
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|best, run| if run.objective < best.objective { run } else { best })
        .unwrap())
}
