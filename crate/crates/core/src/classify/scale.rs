use serde::{Deserialize, Serialize};

use super::FeatureMatrix;

/// Per-feature z-scoring with statistics from a training set. Constant
/// features keep unit scale so they map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &FeatureMatrix) -> Self {
        let n = data.n_rows().max(1) as f64;
        let p = data.n_cols();
        let means: Vec<f64> = (0..p).map(|j| data.rows().map(|r| r[j]).sum::<f64>() / n).collect();
        let scales = (0..p)
            .map(|j| {
                let var = data.rows().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, scales }
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn transform(&self, data: &FeatureMatrix) -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = data.rows().map(|r| self.transform_row(r)).collect();
        let scaled = FeatureMatrix::new(data.names().to_vec(), data.ids().to_vec(), rows, None)
            .expect("same shape as the input");
        match data.labels() {
            Some(l) => scaled.with_labels(l.to_vec()).expect("labels already validated"),
            None => scaled,
        }
        .with_n_classes(data.n_classes())
    }
}
