//! Per-node distributions summarized as shared-bin histograms, and their
//! principal-component scores across a collection.

use serde::{Deserialize, Serialize};

use super::structure::local_clustering;
use crate::classify::{pca_fit, FeatureMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_BINS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeQuantity {
    Degree,
    LocalClustering,
}

impl NodeQuantity {
    /// Feature-name prefix for the principal-component columns.
    pub fn prefix(self) -> &'static str {
        match self {
            NodeQuantity::Degree => "DegPC",
            NodeQuantity::LocalClustering => "ClusPC",
        }
    }
}

/// Values of `quantity` over the nodes of degree >= 1.
pub fn node_values(g: &Graph, quantity: NodeQuantity) -> Vec<f64> {
    match quantity {
        NodeQuantity::Degree => g.degrees().filter(|&d| d > 0).map(|d| d as f64).collect(),
        NodeQuantity::LocalClustering => local_clustering(g)
            .into_iter()
            .zip(g.degrees())
            .filter(|&(_, d)| d > 0)
            .map(|(c, _)| c)
            .collect(),
    }
}

/// Normalized histogram over explicit bin edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub bin_edges: Vec<f64>,
    pub bin_probabilities: Vec<f64>,
}

/// Equal-width bins spanning `[min, max]`; the last bin is closed.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedBins {
    edges: Vec<f64>,
}

impl SharedBins {
    pub fn new(min: f64, max: f64, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Param(format!("n_bins must be at least 2, got {n_bins}")));
        }
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::Param(format!("invalid bin range [{min}, {max}]")));
        }
        // A degenerate range still needs positive width.
        let width = if max > min { (max - min) / n_bins as f64 } else { 1.0 };
        let mut edges: Vec<f64> = (0..=n_bins).map(|k| min + k as f64 * width).collect();
        if max > min {
            edges[n_bins] = max;
        }
        Ok(Self { edges })
    }

    /// Pooled min-max range over all values.
    pub fn pooled<'a>(samples: impl IntoIterator<Item = &'a [f64]>, n_bins: usize) -> Result<Self> {
        let (min, max) = samples
            .into_iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if min > max {
            Self::new(0.0, 0.0, n_bins)
        } else {
            Self::new(min, max, n_bins)
        }
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    fn bin(&self, x: f64) -> usize {
        let n = self.n_bins();
        let (lo, hi) = (self.edges[0], self.edges[n]);
        let width = if hi > lo { (hi - lo) / n as f64 } else { 1.0 };
        (((x - lo) / width).floor().max(0.0) as usize).min(n - 1)
    }

    /// Histogram of `values` normalized to probabilities. An empty sample
    /// has no mass and yields all zeros.
    pub fn summarize(&self, values: &[f64]) -> DistributionSummary {
        let mut counts = vec![0usize; self.n_bins()];
        for &x in values {
            counts[self.bin(x)] += 1;
        }
        let total = values.len().max(1) as f64;
        DistributionSummary {
            bin_edges: self.edges.clone(),
            bin_probabilities: counts.into_iter().map(|c| c as f64 / total).collect(),
        }
    }
}

/// Named PCA-score columns, column-major (one `Vec` per component).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreColumns {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

/// Histograms every graph's `quantity` distribution on shared bins and
/// returns the first `n_components` principal-component scores per graph.
pub fn distribution_pca_features(
    graphs: &[Graph],
    quantity: NodeQuantity,
    n_components: usize,
    n_bins: usize,
) -> Result<ScoreColumns> {
    if graphs.is_empty() {
        return Err(Error::Param("distribution features need a nonempty collection".into()));
    }
    if n_bins < 2 {
        return Err(Error::Param(format!("n_bins must be at least 2, got {n_bins}")));
    }
    if n_components > n_bins {
        return Err(Error::Param(format!("n_components ({n_components}) exceeds n_bins ({n_bins})")));
    }
    let values: Vec<Vec<f64>> = graphs.iter().map(|g| node_values(g, quantity)).collect();
    let bins = SharedBins::pooled(values.iter().map(Vec::as_slice), n_bins)?;
    let histograms: Vec<Vec<f64>> = values.iter().map(|v| bins.summarize(v).bin_probabilities).collect();
    let matrix = FeatureMatrix::from_rows(histograms)?;
    let model = pca_fit(&matrix, n_components)?;
    let scores: Vec<Vec<f64>> = matrix.rows().map(|r| model.transform(r)).collect();
    Ok(ScoreColumns {
        names: (1..=n_components).map(|k| format!("{}{k}", quantity.prefix())).collect(),
        columns: (0..n_components).map(|k| scores.iter().map(|s| s[k]).collect()).collect(),
    })
}

/// Cell intensities `(x_ij / max x)^4`; an all-zero matrix maps to zeros.
pub fn heatmap_intensity(counts: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if counts.iter().flatten().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Domain("edge counts must be finite and nonnegative".into()));
    }
    let max = counts.iter().flatten().copied().fold(0.0, f64::max);
    Ok(counts
        .iter()
        .map(|row| row.iter().map(|&x| if max > 0.0 { (x / max).powi(4) } else { 0.0 }).collect())
        .collect())
}

/// Symmetric age-by-age edge counts for ages `0..=max_age`; edges with an
/// unknown or larger age are skipped.
pub fn age_pair_counts(g: &Graph, max_age: u32) -> Vec<Vec<f64>> {
    let size = max_age as usize + 1;
    let mut counts = vec![vec![0.0; size]; size];
    let Some(attrs) = g.attributes() else {
        return counts;
    };
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (attrs[u].age, attrs[v].age) {
            if a <= max_age && b <= max_age {
                counts[a as usize][b as usize] += 1.0;
                if a != b {
                    counts[b as usize][a as usize] += 1.0;
                }
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn histogram_sums_to_one() {
        let bins = SharedBins::new(0.0, 10.0, 5).unwrap();
        let s = bins.summarize(&[0.0, 1.9, 2.0, 10.0, 9.99, 5.0]);
        assert_eq!(s.bin_edges.len(), 6);
        assert_relative_eq!(s.bin_probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(s.bin_probabilities[0], 2.0 / 6.0);
        assert_eq!(s.bin_probabilities[4], 2.0 / 6.0);
    }

    #[test]
    fn degenerate_range_puts_mass_in_first_bin() {
        let bins = SharedBins::pooled([&[3.0, 3.0][..]], 4).unwrap();
        assert_eq!(bins.summarize(&[3.0]).bin_probabilities, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn identical_graphs_score_zero() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 1)]);
        let cols = distribution_pca_features(&vec![g; 3], NodeQuantity::Degree, 2, 8).unwrap();
        assert_eq!(cols.names, vec!["DegPC1", "DegPC2"]);
        assert!(cols.columns.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn two_graphs_are_symmetric_on_pc1() {
        let a = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let b = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let cols = distribution_pca_features(&[a, b], NodeQuantity::Degree, 4, 10).unwrap();
        assert_eq!(cols.columns.len(), 4);
        let pc1 = &cols.columns[0];
        assert_relative_eq!(pc1[0], -pc1[1], epsilon = 1e-12);
        assert!(pc1[0].abs() > 0.1);
    }

    #[test]
    fn parameter_checks() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        assert!(distribution_pca_features(std::slice::from_ref(&g), NodeQuantity::Degree, 1, 1).is_err());
        assert!(distribution_pca_features(&[], NodeQuantity::Degree, 1, 4).is_err());
    }

    #[test]
    fn heatmap() {
        let h = heatmap_intensity(&[vec![4.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(h[0][0], 1.0);
        assert_eq!(h[0][1], 0.0625);
        assert_eq!(h[1][0], 0.0);
        assert_eq!(heatmap_intensity(&vec![vec![0.0; 2]; 2]).unwrap(), vec![vec![0.0; 2]; 2]);
        assert!(heatmap_intensity(&[vec![-1.0]]).is_err());
    }
}
