//! Snowball and attribute-group subsamples of a network.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::Rng;

pub const MIN_SIZE: usize = 50;
pub const MAX_SEED_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsampleKind {
    Snowball { radius: usize },
    AttributeGroup { zip: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsample {
    pub kind: SubsampleKind,
    /// Node indices into the source graph, ascending.
    pub nodes: Vec<usize>,
    pub seed_node: Option<usize>,
}

impl Subsample {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node ids in the source graph.
    pub fn ids<'g>(&self, g: &'g Graph) -> Vec<&'g str> {
        self.nodes.iter().map(|&v| g.id(v)).collect()
    }
}

/// All nodes within `radius` hops of `seed`, ascending.
pub fn ball(g: &Graph, seed: usize, radius: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[seed] = 0;
    let mut queue = VecDeque::from([seed]);
    let mut out = vec![seed];
    while let Some(v) = queue.pop_front() {
        if dist[v] == radius {
            continue;
        }
        for &u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                out.push(u);
                queue.push_back(u);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Ball of `radius` around a seed drawn uniformly from the nodes of degree
/// at least 1, redrawn until it has `min_size` nodes.
pub fn snowball(g: &Graph, radius: usize, min_size: usize, rng: &mut Rng) -> Result<Subsample> {
    if radius == 0 {
        return Err(Error::Param("snowball radius must be at least 1".into()));
    }
    let candidates: Vec<usize> = (0..g.node_count()).filter(|&v| g.degree(v) > 0).collect();
    if candidates.is_empty() {
        return Err(Error::Param("snowball sampling needs a graph with at least one edge".into()));
    }
    for _ in 0..MAX_SEED_ATTEMPTS {
        let seed = candidates[rng.random_range(0..candidates.len())];
        let nodes = ball(g, seed, radius);
        if nodes.len() >= min_size {
            return Ok(Subsample {
                kind: SubsampleKind::Snowball { radius },
                nodes,
                seed_node: Some(seed),
            });
        }
    }
    Err(Error::NoQualifyingSeed {
        attempts: MAX_SEED_ATTEMPTS,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZipSubsample {
    Accepted(Subsample),
    Rejected { zip: String, size: usize },
}

/// All nodes whose zip is `zip`; rejected below `min_size`.
pub fn attribute_subsample(g: &Graph, zip: &str, min_size: usize) -> ZipSubsample {
    let nodes: Vec<usize> = (0..g.node_count())
        .filter(|&v| g.attr(v).and_then(|a| a.zip.as_deref()) == Some(zip))
        .collect();
    if nodes.len() < min_size {
        return ZipSubsample::Rejected {
            zip: zip.to_owned(),
            size: nodes.len(),
        };
    }
    ZipSubsample::Accepted(Subsample {
        kind: SubsampleKind::AttributeGroup { zip: zip.to_owned() },
        nodes,
        seed_node: None,
    })
}

/// Distinct known zip values, sorted.
pub fn zip_values(g: &Graph) -> Vec<String> {
    let set: BTreeSet<&str> = (0..g.node_count())
        .filter_map(|v| g.attr(v).and_then(|a| a.zip.as_deref()))
        .collect();
    set.into_iter().map(str::to_owned).collect()
}

/// Subgraph on `nodes` with every edge internal to it. Nodes keep their ids,
/// attributes and relative order; isolated ones are kept.
pub fn induce_nodes(g: &Graph, nodes: &[usize]) -> Result<Graph> {
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        if v >= g.node_count() {
            return Err(Error::ForeignNode(format!("node index {v} (graph has {})", g.node_count())));
        }
        local[v] = i;
    }
    let ids = nodes.iter().map(|&v| g.id(v).to_owned()).collect();
    let adjacency = nodes
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&u| local[u] != usize::MAX).map(|&u| local[u]).collect())
        .collect();
    let attrs = g.attributes().map(|a| nodes.iter().map(|&v| a[v].clone()).collect());
    Ok(Graph::from_adjacency(ids, adjacency, attrs).0)
}

pub fn induce(g: &Graph, s: &Subsample) -> Result<Graph> {
    induce_nodes(g, &s.nodes)
}

/// Subgraph of `g` on the nodes whose ids are in `ids`; ids missing from
/// `g` (e.g. inactive on that day) are skipped.
pub fn induce_ids(g: &Graph, ids: &[&str]) -> Graph {
    let index = g.index();
    let mut nodes: Vec<usize> = ids.iter().filter_map(|id| index.get(id).copied()).collect();
    nodes.sort_unstable();
    nodes.dedup();
    induce_nodes(g, &nodes).expect("indices come from g")
}
