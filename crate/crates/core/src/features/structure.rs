//! Structural statistics of a simple undirected graph.
//!
//! Node-count based quantities ignore degree-0 nodes: a node that never
//! appears on an edge is not part of the observed network.

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

/// Number of nodes with degree at least one.
pub fn num_nodes(g: &Graph) -> f64 {
    g.degrees().filter(|&d| d > 0).count() as f64
}

pub fn num_edges(g: &Graph) -> f64 {
    g.edge_count() as f64
}

/// `2|E| / num_nodes`, or 0 for an edgeless graph.
pub fn avg_degree(g: &Graph) -> f64 {
    let n = num_nodes(g);
    if n == 0.0 {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / n
    }
}

/// Number of triangles through each node.
///
/// Edges are oriented from lower to higher (degree, index) rank so each
/// triangle is discovered exactly once from its lowest-ranked corner.
pub fn triangles_per_node(g: &Graph) -> Vec<u64> {
    let n = g.node_count();
    let rank = |v: usize| (g.degree(v), v);
    let forward: Vec<Vec<usize>> = (0..n)
        .map(|u| g.neighbors(u).iter().copied().filter(|&v| rank(v) > rank(u)).collect())
        .collect();
    let mut counts = vec![0u64; n];
    let mut mark = vec![usize::MAX; n];
    for u in 0..n {
        for &v in &forward[u] {
            mark[v] = u;
        }
        for &v in &forward[u] {
            for &w in &forward[v] {
                if mark[w] == u {
                    counts[u] += 1;
                    counts[v] += 1;
                    counts[w] += 1;
                }
            }
        }
    }
    counts
}

pub fn num_triangles(g: &Graph) -> f64 {
    (triangles_per_node(g).iter().sum::<u64>() / 3) as f64
}

/// Number of paths of length two, `sum_v C(deg v, 2)`.
pub fn num_wedges(g: &Graph) -> u64 {
    g.degrees().map(|d| (d as u64) * (d as u64).saturating_sub(1) / 2).sum()
}

/// Transitivity: `3 * triangles / wedges`, 0 when there are no wedges.
pub fn global_clustering(g: &Graph) -> f64 {
    let wedges = num_wedges(g);
    if wedges == 0 {
        return 0.0;
    }
    let triangles = triangles_per_node(g).iter().sum::<u64>() / 3;
    3.0 * triangles as f64 / wedges as f64
}

/// Local clustering of every node; nodes of degree < 2 get 0.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    triangles_per_node(g)
        .into_iter()
        .enumerate()
        .map(|(v, t)| {
            let d = g.degree(v) as f64;
            if d < 2.0 {
                0.0
            } else {
                t as f64 / (d * (d - 1.0) / 2.0)
            }
        })
        .collect()
}

/// Mean local clustering over nodes of degree >= 1, counting degree-1 nodes
/// as 0. Empty graphs give 0.
pub fn avg_local_clustering(g: &Graph) -> f64 {
    let local = local_clustering(g);
    let (sum, count) = local
        .iter()
        .zip(g.degrees())
        .filter(|&(_, d)| d > 0)
        .fold((0.0, 0usize), |(s, c), (&x, _)| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Newman's degree assortativity with an explicit degeneracy flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assortativity {
    pub value: f64,
    /// Set when endpoint degrees have zero variance (or there are no edges)
    /// and the coefficient is undefined; `value` is then 0.
    pub degenerate: bool,
}

/// Pearson correlation of endpoint degrees, each edge counted in both
/// orientations.
pub fn degree_assortativity(g: &Graph) -> Assortativity {
    let m = g.edge_count();
    let degenerate = Assortativity {
        value: 0.0,
        degenerate: true,
    };
    if m == 0 {
        return degenerate;
    }
    let oriented = 2.0 * m as f64;
    let mean = g
        .edges()
        .map(|(u, v)| (g.degree(u) + g.degree(v)) as f64)
        .sum::<f64>()
        / oriented;
    let (mut var, mut cov) = (0.0, 0.0);
    for (u, v) in g.edges() {
        let a = g.degree(u) as f64 - mean;
        let b = g.degree(v) as f64 - mean;
        var += a * a + b * b;
        cov += 2.0 * a * b;
    }
    if var <= 1e-12 * oriented * mean * mean {
        return degenerate;
    }
    Assortativity {
        value: (cov / var).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)])
    }

    fn paw() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)])
    }

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_edges(n, &edges)
    }

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges)
    }

    #[test]
    fn node_counts_skip_isolated() {
        assert_eq!(num_nodes(&triangle()), 3.0);
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(num_nodes(&g), 3.0);
        assert_eq!(avg_degree(&g), 2.0);
        assert_eq!(num_nodes(&Graph::from_edges(0, &[])), 0.0);
        assert_eq!(avg_degree(&Graph::from_edges(2, &[])), 0.0);
    }

    #[test]
    fn small_counts() {
        let t = triangle();
        assert_eq!((num_edges(&t), num_triangles(&t), avg_degree(&t)), (3.0, 1.0, 2.0));
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!((num_edges(&c4), num_triangles(&c4), avg_degree(&c4)), (4.0, 0.0, 2.0));
        // C(5,3) triples, all closed.
        assert_eq!(num_triangles(&complete(5)), 10.0);
    }

    #[test]
    fn transitivity() {
        assert_eq!(global_clustering(&triangle()), 1.0);
        assert_eq!(global_clustering(&star(3)), 0.0);
        assert_relative_eq!(global_clustering(&paw()), 0.6);
        assert_eq!(global_clustering(&Graph::from_edges(2, &[(0, 1)])), 0.0);
    }

    #[test]
    fn local() {
        assert_eq!(avg_local_clustering(&triangle()), 1.0);
        assert_eq!(avg_local_clustering(&Graph::from_edges(3, &[(0, 1), (1, 2)])), 0.0);
        assert_relative_eq!(avg_local_clustering(&paw()), 7.0 / 12.0);
        assert_eq!(avg_local_clustering(&Graph::from_edges(0, &[])), 0.0);
        // An isolated node does not dilute the mean.
        let mut edges = vec![(0, 1), (1, 2), (2, 0)];
        edges.push((0, 1));
        assert_eq!(avg_local_clustering(&Graph::from_edges(4, &edges)), 1.0);
        assert_eq!(avg_local_clustering(&complete(6)), 1.0);
        assert_eq!(global_clustering(&complete(6)), 1.0);
    }

    #[test]
    fn assortativity_cases() {
        let s = degree_assortativity(&star(4));
        assert!(!s.degenerate);
        assert_relative_eq!(s.value, -1.0, epsilon = 1e-12);

        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(degree_assortativity(&c4), Assortativity { value: 0.0, degenerate: true });
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]);
        assert!(degree_assortativity(&two).degenerate);
        assert!(degree_assortativity(&Graph::from_edges(3, &[])).degenerate);
        assert!(degree_assortativity(&complete(5)).degenerate);
    }
}
