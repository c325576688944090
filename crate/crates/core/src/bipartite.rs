//! Cross-sample thresholding of weighted bipartite networks, unipartite
//! projections, and bipartite structural features.
//!
//! Partitions are called left (transcription factors) and right (genes).
//! Inside a [`ThresholdedBipartite`] nodes are indexed jointly: left nodes
//! are `0..n_left`, right node `j` is `n_left + j`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::FeatureMatrix;
use crate::error::{Error, Result};
use crate::features::{avg_degree, avg_local_clustering, degree_assortativity, num_triangles, Extraction, FeatureVector};
use crate::graph::{BipartiteWeightedGraph, Graph};

pub const DEFAULT_Q: f64 = 95.0;

pub const BIO_FEATURES: [&str; 14] = [
    "AvgDeg", "Bclus", "nrcM", "nrcV", "cctM", "cctV", "Gavgdeg", "Gtri", "Gclus", "Gassor", "Tavgdeg", "Ttri", "Tclus",
    "Tassor",
];

/// Binary bipartite graph produced by thresholding one weighted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdedBipartite {
    pub source: String,
    pub q: f64,
    left_ids: Arc<[String]>,
    right_ids: Arc<[String]>,
    adjacency: Vec<Vec<usize>>,
}

impl ThresholdedBipartite {
    /// Builds from `(left, right)` index pairs; duplicates are ignored.
    pub fn from_edges(n_left: usize, n_right: usize, edges: &[(usize, usize)]) -> Self {
        let left_ids: Arc<[String]> = (0..n_left).map(|i| format!("L{i}")).collect();
        let right_ids: Arc<[String]> = (0..n_right).map(|j| format!("R{j}")).collect();
        let mut rows = vec![Vec::new(); n_left];
        for &(l, r) in edges {
            assert!(l < n_left && r < n_right, "edge ({l}, {r}) out of range");
            rows[l].push(r);
        }
        Self::from_rows(String::new(), f64::NAN, left_ids, right_ids, rows)
    }

    fn from_rows(
        source: String,
        q: f64,
        left_ids: Arc<[String]>,
        right_ids: Arc<[String]>,
        mut rows: Vec<Vec<usize>>,
    ) -> Self {
        let n_left = left_ids.len();
        let mut adjacency = vec![Vec::new(); n_left + right_ids.len()];
        for (l, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &r in row.iter() {
                adjacency[l].push(n_left + r);
                adjacency[n_left + r].push(l);
            }
        }
        Self {
            source,
            q,
            left_ids,
            right_ids,
            adjacency,
        }
    }

    pub fn n_left(&self) -> usize {
        self.left_ids.len()
    }

    pub fn n_right(&self) -> usize {
        self.right_ids.len()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency[..self.n_left()].iter().map(Vec::len).sum()
    }

    /// Sorted neighbors in joint indexing.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        self.adjacency[left].binary_search(&(self.n_left() + right)).is_ok()
    }

    /// The thresholded graph as a plain unipartite graph in joint indexing.
    pub fn to_graph(&self) -> Graph {
        let ids = self.left_ids.iter().chain(self.right_ids.iter()).cloned().collect();
        Graph::from_adjacency(ids, self.adjacency.clone(), None).0
    }
}

/// Keeps, for every (left, right) pair independently, only the samples
/// whose weight ranks within the top `(1 - q/100)` fraction across the
/// collection. Samples tied with the cutoff weight are all kept.
pub fn threshold_collection(samples: &[BipartiteWeightedGraph], q: f64) -> Result<Vec<ThresholdedBipartite>> {
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::Param(format!("q must lie in [0, 100], got {q}")));
    }
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    for s in samples {
        if s.left_ids() != first.left_ids() || s.right_ids() != first.right_ids() {
            return Err(Error::Shape(format!(
                "sample {:?} does not share the partitions of sample {:?}",
                s.id, first.id
            )));
        }
        if s.weights().iter().any(|w| w.is_nan()) {
            return Err(Error::Domain(format!("sample {:?} has NaN weights", s.id)));
        }
    }
    let n = samples.len();
    let keep = keep_count(q, n);
    let (n_left, n_right) = (first.n_left(), first.n_right());

    // rows[l][s] = right neighbors of left node l in sample s.
    let rows: Vec<Vec<Vec<usize>>> = (0..n_left)
        .into_par_iter()
        .map(|l| {
            let mut per_sample = vec![Vec::new(); n];
            let mut buf = vec![0.0; n];
            if keep == 0 {
                return per_sample;
            }
            for r in 0..n_right {
                for (b, s) in buf.iter_mut().zip(samples) {
                    *b = s.weight(l, r);
                }
                let cutoff = *buf.select_nth_unstable_by(keep - 1, |a, b| b.total_cmp(a)).1;
                for (s, sample) in samples.iter().enumerate() {
                    if sample.weight(l, r) >= cutoff {
                        per_sample[s].push(r);
                    }
                }
            }
            per_sample
        })
        .collect();

    let left_ids: Arc<[String]> = first.left_ids().into();
    let right_ids: Arc<[String]> = first.right_ids().into();
    let mut per_sample: Vec<Vec<Vec<usize>>> = vec![Vec::with_capacity(n_left); n];
    for row in rows {
        for (s, list) in row.into_iter().enumerate() {
            per_sample[s].push(list);
        }
    }
    Ok(per_sample
        .into_iter()
        .zip(samples)
        .map(|(rows, s)| ThresholdedBipartite::from_rows(s.id.clone(), q, left_ids.clone(), right_ids.clone(), rows))
        .collect())
}

/// Number of samples allowed to carry each edge, `ceil((1 - q/100) * n)`.
pub fn keep_count(q: f64, n: usize) -> usize {
    let exact = (100.0 - q) * n as f64 / 100.0;
    ((exact - 1e-9).ceil().max(0.0) as usize).min(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Transcription factor - transcription factor network.
    Left,
    /// Gene - gene network.
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub side: Side,
    pub graph: Graph,
}

/// Unweighted projection: two nodes of `side` are adjacent iff they share
/// at least one neighbor.
pub fn project(tb: &ThresholdedBipartite, side: Side) -> Projection {
    let (range, offset, ids) = match side {
        Side::Left => (0..tb.n_left(), 0, &tb.left_ids),
        Side::Right => (tb.n_left()..tb.node_count(), tb.n_left(), &tb.right_ids),
    };
    let n = range.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut seen = vec![usize::MAX; n];
    for v in range {
        let a = v - offset;
        for &w in tb.neighbors(v) {
            for &u in tb.neighbors(w) {
                let b = u - offset;
                if b != a && seen[b] != a {
                    seen[b] = a;
                    adjacency[a].push(b);
                }
            }
        }
    }
    let graph = Graph::from_adjacency(ids.to_vec(), adjacency, None).0;
    Projection { side, graph }
}

/// Average over all nodes of the pairwise (Jaccard) bipartite clustering
/// coefficient. Nodes without second neighbors contribute 0.
pub fn bipartite_clustering(tb: &ThresholdedBipartite) -> f64 {
    let n = tb.node_count();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0usize; n], Vec::new()),
            |(shared, touched), v| node_bipartite_clustering(tb, v, shared, touched),
        )
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    total / n as f64
}

fn node_bipartite_clustering(tb: &ThresholdedBipartite, v: usize, shared: &mut [usize], touched: &mut Vec<usize>) -> f64 {
    touched.clear();
    for &w in tb.neighbors(v) {
        for &u in tb.neighbors(w) {
            if u == v {
                continue;
            }
            if shared[u] == 0 {
                touched.push(u);
            }
            shared[u] += 1;
        }
    }
    if touched.is_empty() {
        return 0.0;
    }
    let dv = tb.degree(v);
    let mut sum = 0.0;
    for &u in touched.iter() {
        let inter = shared[u];
        sum += inter as f64 / (tb.degree(u) + dv - inter) as f64;
        shared[u] = 0;
    }
    sum / touched.len() as f64
}

/// Mean and population variance, with a flag for an empty sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanVar {
    pub mean: f64,
    pub variance: f64,
    pub degenerate: bool,
}

impl MeanVar {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: 0.0,
                variance: 0.0,
                degenerate: true,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            variance,
            degenerate: false,
        }
    }
}

/// Redundancy of every node with degree >= 2, in node order: the share of
/// its neighbor pairs that also share some other common neighbor.
pub fn node_redundancies(tb: &ThresholdedBipartite) -> Vec<f64> {
    let n = tb.node_count();
    (0..n)
        .into_par_iter()
        .filter(|&v| tb.degree(v) >= 2)
        .map_init(
            || (vec![0u64; n], 0u64),
            |(stamp, generation), v| {
                let nbrs = tb.neighbors(v);
                let d = nbrs.len();
                let mut linked = 0usize;
                for (i, &u) in nbrs.iter().enumerate() {
                    *generation += 1;
                    // Mark every node reachable from u through a neighbor other than v.
                    for &x in tb.neighbors(u).iter().filter(|&&x| x != v) {
                        for &w in tb.neighbors(x) {
                            stamp[w] = *generation;
                        }
                    }
                    linked += nbrs[i + 1..].iter().filter(|&&w| stamp[w] == *generation).count();
                }
                linked as f64 / (d * (d - 1) / 2) as f64
            },
        )
        .collect()
}

pub fn node_redundancy_stats(tb: &ThresholdedBipartite) -> MeanVar {
    MeanVar::of(&node_redundancies(tb))
}

/// Component-normalized closeness `(reachable - 1) / sum of distances`,
/// 0 for isolated nodes.
pub fn closeness(g_adj: &[Vec<usize>]) -> Vec<f64> {
    let n = g_adj.len();
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![usize::MAX; n], Vec::with_capacity(n)),
            |(dist, queue), source| {
                queue.clear();
                dist[source] = 0;
                queue.push(source);
                let mut head = 0;
                let mut total = 0usize;
                while head < queue.len() {
                    let v = queue[head];
                    head += 1;
                    for &w in &g_adj[v] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            total += dist[w];
                            queue.push(w);
                        }
                    }
                }
                let reached = queue.len();
                for &v in queue.iter() {
                    dist[v] = usize::MAX;
                }
                if total == 0 {
                    0.0
                } else {
                    (reached - 1) as f64 / total as f64
                }
            },
        )
        .collect()
}

pub fn closeness_stats(tb: &ThresholdedBipartite) -> MeanVar {
    let values = closeness(&tb.adjacency);
    if values.is_empty() {
        return MeanVar::of(&[0.0]);
    }
    MeanVar::of(&values)
}

/// The 14 bipartite and projection features, in [`BIO_FEATURES`] order.
pub fn bio_feature_vector(tb: &ThresholdedBipartite) -> FeatureVector {
    let mut v = FeatureVector::new(tb.source.clone());
    let degrees: Vec<usize> = (0..tb.node_count()).map(|x| tb.degree(x)).collect();
    let active = degrees.iter().filter(|&&d| d > 0).count();
    v.push(
        "AvgDeg",
        if active == 0 { 0.0 } else { 2.0 * tb.edge_count() as f64 / active as f64 },
    );
    v.push("Bclus", bipartite_clustering(tb));
    let nrc = node_redundancy_stats(tb);
    if nrc.degenerate {
        v.flags.push("nrc:degenerate".into());
    }
    v.push("nrcM", nrc.mean);
    v.push("nrcV", nrc.variance);
    let cct = closeness_stats(tb);
    v.push("cctM", cct.mean);
    v.push("cctV", cct.variance);
    for (prefix, side) in [("G", Side::Right), ("T", Side::Left)] {
        let p = project(tb, side).graph;
        v.push(&format!("{prefix}avgdeg"), avg_degree(&p));
        v.push(&format!("{prefix}tri"), num_triangles(&p));
        v.push(&format!("{prefix}clus"), avg_local_clustering(&p));
        v.push_assortativity(&format!("{prefix}assor"), degree_assortativity(&p));
    }
    v
}

/// Bio features for every thresholded sample, in input order.
pub fn extract_bipartite(
    samples: &[ThresholdedBipartite],
    labels: Option<Vec<u32>>,
    n_classes: usize,
) -> Result<Extraction> {
    let vectors: Vec<FeatureVector> = samples.par_iter().map(bio_feature_vector).collect();
    let flags = vectors.iter().map(|v| v.flags.clone()).collect();
    let matrix = if vectors.is_empty() {
        FeatureMatrix::new(BIO_FEATURES.iter().map(|s| s.to_string()).collect(), Vec::new(), Vec::new(), labels)?
    } else {
        FeatureMatrix::from_vectors(&vectors, labels)?
    };
    Ok(Extraction {
        matrix: matrix.with_n_classes(n_classes),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k22() -> ThresholdedBipartite {
        ThresholdedBipartite::from_edges(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)])
    }

    fn samples_with(weights: &[f64]) -> Vec<BipartiteWeightedGraph> {
        weights
            .iter()
            .enumerate()
            .map(|(s, &w)| BipartiteWeightedGraph::from_rows(format!("s{s}"), &[vec![w]]).unwrap())
            .collect()
    }

    #[test]
    fn keep_counts() {
        assert_eq!(keep_count(75.0, 4), 1);
        assert_eq!(keep_count(95.0, 1217), 61);
        assert_eq!(keep_count(95.0, 20), 1);
        assert_eq!(keep_count(0.0, 7), 7);
        assert_eq!(keep_count(100.0, 7), 0);
    }

    #[test]
    fn threshold_rank_rule() {
        let t = threshold_collection(&samples_with(&[1.0, 2.0, 3.0, 4.0]), 75.0).unwrap();
        let kept: Vec<bool> = t.iter().map(|tb| tb.has_edge(0, 0)).collect();
        assert_eq!(kept, vec![false, false, false, true]);
        let all = threshold_collection(&samples_with(&[0.0, -2.0, 3.0]), 0.0).unwrap();
        assert!(all.iter().all(|tb| tb.has_edge(0, 0)));
        let none = threshold_collection(&samples_with(&[1.0, 2.0]), 100.0).unwrap();
        assert!(none.iter().all(|tb| tb.edge_count() == 0));
    }

    #[test]
    fn threshold_ties_keep_everyone_at_cutoff() {
        let t = threshold_collection(&samples_with(&[5.0, 5.0, 1.0, 5.0]), 75.0).unwrap();
        let kept: Vec<bool> = t.iter().map(|tb| tb.has_edge(0, 0)).collect();
        assert_eq!(kept, vec![true, true, false, true]);
    }

    #[test]
    fn threshold_errors() {
        let a = BipartiteWeightedGraph::from_rows("a", &[vec![1.0]]).unwrap();
        let b = BipartiteWeightedGraph::from_rows("b", &[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(threshold_collection(&[a.clone(), b], 50.0), Err(Error::Shape(_))));
        assert!(matches!(threshold_collection(&[a], 101.0), Err(Error::Param(_))));
    }

    #[test]
    fn projections() {
        let p = project(&k22(), Side::Left).graph;
        assert_eq!((p.node_count(), p.edge_count()), (2, 1));
        // Two disjoint stars centred on left nodes: right leaves form cliques.
        let stars = ThresholdedBipartite::from_edges(2, 5, &[(0, 0), (0, 1), (0, 2), (1, 3), (1, 4)]);
        let right = project(&stars, Side::Right).graph;
        assert_eq!(right.edge_count(), 3 + 1);
        assert!(right.has_edge(0, 2) && right.has_edge(3, 4) && !right.has_edge(2, 3));
        let empty = ThresholdedBipartite::from_edges(3, 3, &[]);
        assert_eq!(project(&empty, Side::Right).graph.edge_count(), 0);
    }

    #[test]
    fn clustering_cases() {
        assert_eq!(bipartite_clustering(&k22()), 1.0);
        assert_eq!(bipartite_clustering(&ThresholdedBipartite::from_edges(1, 1, &[(0, 0)])), 0.0);
        // u - w - v with w on the right.
        let path = ThresholdedBipartite::from_edges(2, 1, &[(0, 0), (1, 0)]);
        assert_relative_eq!(bipartite_clustering(&path), 2.0 / 3.0);
    }

    #[test]
    fn redundancy_cases() {
        let s = node_redundancy_stats(&k22());
        assert_eq!((s.mean, s.variance, s.degenerate), (1.0, 0.0, false));
        let star = ThresholdedBipartite::from_edges(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)]);
        assert_eq!(node_redundancy_stats(&star).mean, 0.0);
        let single = node_redundancy_stats(&ThresholdedBipartite::from_edges(1, 1, &[(0, 0)]));
        assert!(single.degenerate);
        // K2,2 plus pendant right node 2 on left node 0: left 0 has pairs
        // {r0,r1} (linked via left 1), {r0,r2}, {r1,r2} (not linked) -> 1/3.
        let k22p = ThresholdedBipartite::from_edges(2, 3, &[(0, 0), (0, 1), (1, 0), (1, 1), (0, 2)]);
        let r = node_redundancies(&k22p);
        assert_eq!(r.len(), 4);
        assert_relative_eq!(r[0], 1.0 / 3.0);
        assert!(node_redundancy_stats(&k22p).mean < 1.0);
    }

    #[test]
    fn closeness_cases() {
        let edge = closeness_stats(&ThresholdedBipartite::from_edges(1, 1, &[(0, 0)]));
        assert_eq!((edge.mean, edge.variance), (1.0, 0.0));
        let path = ThresholdedBipartite::from_edges(2, 1, &[(0, 0), (1, 0)]);
        let c = closeness(&path.adjacency);
        assert_relative_eq!(c[0], 2.0 / 3.0);
        assert_relative_eq!(c[1], 2.0 / 3.0);
        assert_eq!(c[2], 1.0);
        let empty = closeness_stats(&ThresholdedBipartite::from_edges(0, 0, &[]));
        assert_eq!((empty.mean, empty.variance), (0.0, 0.0));
    }

    #[test]
    fn bio_vector() {
        let v = bio_feature_vector(&k22());
        assert_eq!(v.names, BIO_FEATURES);
        assert_eq!(v.get("Gavgdeg"), Some(1.0));
        assert_eq!(v.get("Tavgdeg"), Some(1.0));
        assert_eq!(v.get("Gtri"), Some(0.0));
        assert_eq!(v.get("Ttri"), Some(0.0));
        assert_eq!(v.get("AvgDeg"), Some(2.0));

        let empty = bio_feature_vector(&ThresholdedBipartite::from_edges(2, 3, &[]));
        assert!(empty.values.iter().all(|&x| x == 0.0));
        assert!(empty.flags.iter().any(|f| f == "Gassor:degenerate"));
        assert!(empty.flags.iter().any(|f| f == "nrc:degenerate"));
    }
}
