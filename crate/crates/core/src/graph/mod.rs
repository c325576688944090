//! Graph representations shared by every downstream module.
//!
//! Node identifiers are opaque strings; internally each graph is densely
//! re-indexed `0..n` and stores sorted adjacency lists.

mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_bipartite_collection, load_bipartite_matrix, load_edge_collection, load_edge_list, load_tu_benchmark,
    parse_attributes, parse_bipartite_matrix, parse_edge_list, write_attributes, write_edge_collection,
    write_edge_list, ATTRIBUTES_FILE, LABELS_FILE,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
    #[default]
    Unknown,
}

/// Per-node demographic attributes. `None` means unknown.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAttr {
    pub sex: Sex,
    pub age: Option<u32>,
    pub zip: Option<String>,
}

/// Counts of input records dropped while building a simple graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadDiagnostics {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Undirected simple graph with optional node attributes.
///
/// Immutable once built. Adjacency lists are sorted and free of self-loops
/// and duplicates, so `(u, v)` is present iff `(v, u)` is.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    ids: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    attributes: Option<Vec<NodeAttr>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on nodes `0..n` named by their index.
    ///
    /// Self-loops and duplicate edges are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let ids = (0..n).map(|i| i.to_string()).collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self::from_adjacency(ids, adjacency, None).0
    }

    /// Normalizes raw adjacency lists (which may contain self-loops and
    /// repeated entries) into a simple graph.
    ///
    /// Every undirected edge must have been pushed from both endpoints.
    pub fn from_adjacency(
        ids: Vec<String>,
        mut adjacency: Vec<Vec<usize>>,
        attributes: Option<Vec<NodeAttr>>,
    ) -> (Self, LoadDiagnostics) {
        debug_assert_eq!(ids.len(), adjacency.len());
        if let Some(attrs) = &attributes {
            assert_eq!(attrs.len(), ids.len(), "one attribute record per node");
        }
        let mut self_loop_entries = 0;
        let mut raw = 0;
        let mut kept = 0;
        for (v, list) in adjacency.iter_mut().enumerate() {
            let before = list.len();
            list.retain(|&u| u != v);
            self_loop_entries += before - list.len();
            raw += list.len();
            list.sort_unstable();
            list.dedup();
            kept += list.len();
        }
        let diagnostics = LoadDiagnostics {
            // A self-loop pushed from "both endpoints" lands twice in the same list.
            self_loops: self_loop_entries / 2,
            duplicate_edges: (raw - kept) / 2,
        };
        let graph = Graph {
            ids,
            edge_count: kept / 2,
            adjacency,
            attributes,
        };
        (graph, diagnostics)
    }

    /// Number of stored nodes, including isolated ones.
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.iter().map(Vec::len)
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    /// Map from node id to dense index.
    pub fn index(&self) -> HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }

    pub fn attributes(&self) -> Option<&[NodeAttr]> {
        self.attributes.as_deref()
    }

    pub fn attr(&self, v: usize) -> Option<&NodeAttr> {
        self.attributes.as_ref().map(|a| &a[v])
    }

    pub fn with_attributes(mut self, attributes: Vec<NodeAttr>) -> Self {
        assert_eq!(attributes.len(), self.ids.len(), "one attribute record per node");
        self.attributes = Some(attributes);
        self
    }
}

/// Incremental builder keyed by opaque node ids.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    index: HashMap<String, usize>,
    ids: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    attributes: Vec<Option<NodeAttr>>,
    any_attributes: bool,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the dense index of `id`, inserting it if new.
    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.index.insert(id.to_owned(), i);
        self.ids.push(id.to_owned());
        self.adjacency.push(Vec::new());
        self.attributes.push(None);
        i
    }

    pub fn add_edge(&mut self, u: &str, v: &str) {
        let u = self.add_node(u);
        let v = self.add_node(v);
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
    }

    /// Attaches attributes, creating a degree-0 node if `id` is new.
    pub fn set_attr(&mut self, id: &str, attr: NodeAttr) {
        let i = self.add_node(id);
        self.attributes[i] = Some(attr);
        self.any_attributes = true;
    }

    pub fn build(self) -> (Graph, LoadDiagnostics) {
        let attributes = self
            .any_attributes
            .then(|| self.attributes.into_iter().map(Option::unwrap_or_default).collect());
        Graph::from_adjacency(self.ids, self.adjacency, attributes)
    }
}

/// Weighted bipartite graph stored as a dense `|left| x |right|` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteWeightedGraph {
    pub id: String,
    left_ids: Vec<String>,
    right_ids: Vec<String>,
    weights: Vec<f64>,
}

impl BipartiteWeightedGraph {
    /// `weights` is row-major over `left_ids`.
    pub fn new(
        id: impl Into<String>,
        left_ids: Vec<String>,
        right_ids: Vec<String>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != left_ids.len() * right_ids.len() {
            return Err(Error::Shape(format!(
                "{} weights for a {}x{} bipartite matrix",
                weights.len(),
                left_ids.len(),
                right_ids.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            left_ids,
            right_ids,
            weights,
        })
    }

    pub fn from_rows(id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_right = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_right) {
            return Err(Error::Shape("ragged weight rows".into()));
        }
        let left = (0..rows.len()).map(|i| format!("L{i}")).collect();
        let right = (0..n_right).map(|j| format!("R{j}")).collect();
        Self::new(id, left, right, rows.concat())
    }

    pub fn n_left(&self) -> usize {
        self.left_ids.len()
    }

    pub fn n_right(&self) -> usize {
        self.right_ids.len()
    }

    pub fn left_ids(&self) -> &[String] {
        &self.left_ids
    }

    pub fn right_ids(&self) -> &[String] {
        &self.right_ids
    }

    pub fn weight(&self, left: usize, right: usize) -> f64 {
        self.weights[left * self.right_ids.len() + right]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// An ordered collection of networks with optional class labels `1..=c`.
#[derive(Clone, Debug)]
pub struct GraphCollection<G> {
    pub graphs: Vec<G>,
    pub ids: Vec<String>,
    labels: Option<Vec<u32>>,
    /// Original label of each class, `class_names[k - 1]` for class `k`.
    class_names: Vec<String>,
}

impl<G> GraphCollection<G> {
    pub fn unlabeled(graphs: Vec<G>, ids: Vec<String>) -> Result<Self> {
        if graphs.len() != ids.len() {
            return Err(Error::Shape(format!(
                "{} graphs but {} ids",
                graphs.len(),
                ids.len()
            )));
        }
        Ok(Self {
            graphs,
            ids,
            labels: None,
            class_names: Vec::new(),
        })
    }

    /// Labels must lie in `1..=class_names.len()` and every class must be used.
    pub fn labeled(
        graphs: Vec<G>,
        ids: Vec<String>,
        labels: Vec<u32>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let mut c = Self::unlabeled(graphs, ids)?;
        if labels.len() != c.graphs.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} graphs",
                labels.len(),
                c.graphs.len()
            )));
        }
        let n_classes = class_names.len() as u32;
        if let Some(bad) = labels.iter().find(|&&y| y == 0 || y > n_classes) {
            return Err(Error::Format(format!("label {bad} outside 1..={n_classes}")));
        }
        c.labels = Some(labels);
        c.class_names = class_names;
        Ok(c)
    }

    /// Remaps arbitrary labels to `1..=c` in sorted order of the originals.
    /// Labels that all parse as integers are sorted numerically.
    pub fn with_raw_labels(graphs: Vec<G>, ids: Vec<String>, raw: &[String]) -> Result<Self> {
        let (labels, class_names) = normalize_labels(raw);
        Self::labeled(graphs, ids, labels, class_names)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Maps raw labels onto `1..=c`, returning the labels and the sorted originals.
///
/// When every label parses as an integer the originals are ordered
/// numerically (so "-1" < "1" < "10"); otherwise lexicographically.
pub fn normalize_labels(raw: &[String]) -> (Vec<u32>, Vec<String>) {
    let numeric: Option<Vec<i64>> = raw.iter().map(|s| s.trim().parse().ok()).collect();
    match numeric {
        Some(values) => rank_labels(&values, i64::to_string),
        None => {
            let trimmed: Vec<&str> = raw.iter().map(|s| s.trim()).collect();
            rank_labels(&trimmed, |s| s.to_string())
        }
    }
}

fn rank_labels<T: Ord + Clone>(values: &[T], name: impl Fn(&T) -> String) -> (Vec<u32>, Vec<String>) {
    let mut keys = values.to_vec();
    keys.sort();
    keys.dedup();
    let labels = values
        .iter()
        .map(|v| keys.binary_search(v).unwrap() as u32 + 1)
        .collect();
    (labels, keys.iter().map(name).collect())
}
