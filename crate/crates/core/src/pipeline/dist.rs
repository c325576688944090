use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Graph, GraphCollection};
use crate::rng;
use crate::stats::{fit_lognormal, lognormal_ks, lognormal_pdf, LognormalFit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeFit {
    pub graph_id: String,
    pub fit: LognormalFit,
}

fn active_degrees(g: &Graph) -> Vec<f64> {
    g.degrees().filter(|&d| d > 0).map(|d| d as f64).collect()
}

/// Lognormal fit of each network's degrees (degree-0 nodes excluded), with
/// a KS test against a parametric draw from stream `i` of `seed`.
pub fn fit_degree_distributions(c: &GraphCollection<Graph>, seed: u64) -> Result<Vec<DegreeFit>> {
    c.graphs
        .par_iter()
        .zip(c.ids.par_iter())
        .enumerate()
        .map(|(i, (g, id))| {
            let degrees = active_degrees(g);
            let mut fit = fit_lognormal(&degrees)?;
            fit.ks = Some(lognormal_ks(&fit, &degrees, rng::derive_seed(seed, i as u64))?);
            Ok(DegreeFit {
                graph_id: id.clone(),
                fit,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub graph_id: String,
    pub degree: usize,
    pub empirical: f64,
    pub fitted: f64,
}

/// Empirical degree frequencies next to the fitted density, for degrees
/// `1..=max`.
pub fn degree_histogram(graph_id: &str, g: &Graph, fit: &LognormalFit) -> Vec<HistogramRow> {
    let degrees: Vec<usize> = g.degrees().filter(|&d| d > 0).collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for &d in &degrees {
        counts[d] += 1;
    }
    (1..=max)
        .map(|k| HistogramRow {
            graph_id: graph_id.to_owned(),
            degree: k,
            empirical: counts[k] as f64 / degrees.len() as f64,
            fitted: lognormal_pdf(k as f64, fit.mu, fit.sigma),
        })
        .collect()
}
