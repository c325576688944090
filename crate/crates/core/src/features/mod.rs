//! Hand-selected network features.
//!
//! Three named feature sets are supported:
//!
//! | set          | columns |
//! |--------------|---------|
//! | `benchmark6` | NumNodes, NumEdges, AvgDeg, DegAssort, NumTri, ClustCoef |
//! | `cdr`        | NumNodes, NumEdges, NumTri, ClustCoef, DegAssort, AvgDeg, FracF, FracMF, AvgAgeDif, FracSameZip, DegPC1-4, ClusPC1-4 |
//! | `bio`        | see [`crate::bipartite::BIO_FEATURES`] |

mod attributes;
mod distribution;
mod structure;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::FeatureMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphCollection};

pub use attributes::{attribute_features, AttributeFeatures};
pub use distribution::{
    age_pair_counts, distribution_pca_features, heatmap_intensity, node_values, DistributionSummary, NodeQuantity,
    ScoreColumns, SharedBins, DEFAULT_BINS,
};
pub use structure::{
    avg_degree, avg_local_clustering, degree_assortativity, global_clustering, local_clustering, num_edges,
    num_nodes, num_triangles, num_wedges, triangles_per_node, Assortativity,
};

pub const BENCHMARK6: [&str; 6] = ["NumNodes", "NumEdges", "AvgDeg", "DegAssort", "NumTri", "ClustCoef"];

pub const CDR_BASE: [&str; 10] = [
    "NumNodes",
    "NumEdges",
    "NumTri",
    "ClustCoef",
    "DegAssort",
    "AvgDeg",
    "FracF",
    "FracMF",
    "AvgAgeDif",
    "FracSameZip",
];

/// Named feature values of one network. Missing values are NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub graph_id: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Degeneracy notes such as `DegAssort:degenerate`.
    pub flags: Vec<String>,
}

impl FeatureVector {
    pub fn new(graph_id: impl Into<String>) -> Self {
        Self {
            graph_id: graph_id.into(),
            names: Vec::new(),
            values: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, value: f64) {
        debug_assert!(!self.names.iter().any(|n| n == name), "duplicate feature {name}");
        self.names.push(name.to_owned());
        self.values.push(value);
    }

    pub fn push_optional(&mut self, name: &str, value: Option<f64>) {
        if value.is_none() {
            self.flags.push(format!("{name}:missing"));
        }
        self.push(name, value.unwrap_or(f64::NAN));
    }

    pub fn push_assortativity(&mut self, name: &str, a: Assortativity) {
        if a.degenerate {
            self.flags.push(format!("{name}:degenerate"));
        }
        self.push(name, a.value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Benchmark6,
    Cdr,
    Bio,
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benchmark6" => Ok(FeatureSet::Benchmark6),
            "cdr" => Ok(FeatureSet::Cdr),
            "bio" => Ok(FeatureSet::Bio),
            other => Err(Error::Config(format!("unknown feature set {other:?}"))),
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Benchmark6 => "benchmark6",
            FeatureSet::Cdr => "cdr",
            FeatureSet::Bio => "bio",
        })
    }
}

pub fn benchmark6_vector(graph_id: &str, g: &Graph) -> FeatureVector {
    let mut v = FeatureVector::new(graph_id);
    v.push("NumNodes", num_nodes(g));
    v.push("NumEdges", num_edges(g));
    v.push("AvgDeg", avg_degree(g));
    v.push_assortativity("DegAssort", degree_assortativity(g));
    v.push("NumTri", num_triangles(g));
    v.push("ClustCoef", global_clustering(g));
    v
}

/// The per-network part of the `cdr` set (everything except the
/// collection-level distribution PCs).
pub fn cdr_base_vector(graph_id: &str, g: &Graph) -> FeatureVector {
    let mut v = FeatureVector::new(graph_id);
    v.push("NumNodes", num_nodes(g));
    v.push("NumEdges", num_edges(g));
    v.push("NumTri", num_triangles(g));
    v.push("ClustCoef", global_clustering(g));
    v.push_assortativity("DegAssort", degree_assortativity(g));
    v.push("AvgDeg", avg_degree(g));
    let a = attribute_features(g);
    v.push_optional("FracF", a.frac_female);
    v.push_optional("FracMF", a.frac_male_female);
    v.push_optional("AvgAgeDif", a.avg_age_diff);
    v.push_optional("FracSameZip", a.frac_same_zip);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionOptions {
    pub n_components: usize,
    pub n_bins: usize,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        Self {
            n_components: 4,
            n_bins: DEFAULT_BINS,
        }
    }
}

/// A feature matrix plus the per-row degeneracy notes raised while
/// computing it.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub matrix: FeatureMatrix,
    pub flags: Vec<Vec<String>>,
}

fn assemble(vectors: Vec<FeatureVector>, labels: Option<Vec<u32>>, n_classes: usize) -> Result<Extraction> {
    let flags = vectors.iter().map(|v| v.flags.clone()).collect();
    let matrix = FeatureMatrix::from_vectors(&vectors, labels)?.with_n_classes(n_classes);
    Ok(Extraction { matrix, flags })
}

/// Computes a unipartite feature set for every graph, in input order.
pub fn extract_unipartite(
    collection: &GraphCollection<Graph>,
    set: FeatureSet,
    options: DistributionOptions,
) -> Result<Extraction> {
    let labels = collection.labels().map(<[u32]>::to_vec);
    let n_classes = collection.n_classes();
    let per_graph = |f: fn(&str, &Graph) -> FeatureVector| -> Vec<FeatureVector> {
        collection
            .graphs
            .par_iter()
            .zip(collection.ids.par_iter())
            .map(|(g, id)| f(id, g))
            .collect()
    };
    match set {
        FeatureSet::Benchmark6 => assemble(per_graph(benchmark6_vector), labels, n_classes),
        FeatureSet::Cdr => {
            let base = assemble(per_graph(cdr_base_vector), labels, n_classes)?;
            let mut matrix = base.matrix;
            for quantity in [NodeQuantity::Degree, NodeQuantity::LocalClustering] {
                let scores =
                    distribution_pca_features(&collection.graphs, quantity, options.n_components, options.n_bins)?;
                matrix = matrix.append_columns(scores.names, scores.columns)?;
            }
            Ok(Extraction {
                matrix,
                flags: base.flags,
            })
        }
        FeatureSet::Bio => Err(Error::Config("the bio feature set needs bipartite inputs".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_set_has_six_columns() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let c = GraphCollection::unlabeled(vec![g.clone(), g], vec!["a".into(), "b".into()]).unwrap();
        let e = extract_unipartite(&c, FeatureSet::Benchmark6, DistributionOptions::default()).unwrap();
        assert_eq!(e.matrix.names(), BENCHMARK6);
        assert_eq!(e.matrix.row(0), &[4.0, 4.0, 2.0, e.matrix.get(0, 3), 1.0, 0.6]);
    }

    #[test]
    fn cdr_without_attributes_is_missing() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let c = GraphCollection::unlabeled(vec![g.clone(), g], vec!["a".into(), "b".into()]).unwrap();
        let e = extract_unipartite(&c, FeatureSet::Cdr, DistributionOptions::default()).unwrap();
        assert_eq!(e.matrix.n_cols(), 18);
        assert_eq!(e.matrix.names()[10], "DegPC1");
        assert_eq!(e.matrix.names()[17], "ClusPC4");
        assert!(e.matrix.get(0, 6).is_nan());
        assert!(e.flags[0].contains(&"FracSameZip:missing".to_string()));
    }

    #[test]
    fn feature_set_names() {
        for s in ["benchmark6", "cdr", "bio"] {
            assert_eq!(s.parse::<FeatureSet>().unwrap().to_string(), s);
        }
        assert!("nope".parse::<FeatureSet>().is_err());
    }
}
