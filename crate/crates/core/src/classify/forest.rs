//! Random forests of CART trees with Gini importance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{bootstrap, grow_tree_on, Tree};
use super::{FeatureMatrix, Prediction};
use crate::error::{Error, Result};
use crate::rng;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const FULL_TREES: usize = 10_000;
pub const DEFAULT_TREES: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means [`default_mtry`].
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: DEFAULT_TREES,
            mtry: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// `round(sqrt(p))`, clamped to `1..=p`: 2 for the six benchmark
/// features, 4 for the 14- and 18-feature sets.
pub fn default_mtry(p: usize) -> usize {
    ((p as f64).sqrt().round() as usize).clamp(1, p.max(1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub n_classes: usize,
    pub mtry: usize,
    pub seed: u64,
    pub bootstrap: bool,
    /// Mean decrease in Gini impurity per feature, in percent (sums to 100).
    pub importances: Vec<f64>,
    pub trees: Vec<Tree>,
}

/// Trains `n_trees` trees, tree `b` on its own seeded stream so the result
/// is independent of the thread count.
pub fn train_forest(data: &FeatureMatrix, params: &ForestParams) -> Result<ForestModel> {
    data.require_complete()?;
    data.require_labels()?;
    let (n, p) = (data.n_rows(), data.n_cols());
    if params.n_trees == 0 {
        return Err(Error::Param("a forest needs at least one tree".into()));
    }
    if p == 0 {
        return Err(Error::Param("a forest needs at least one feature".into()));
    }
    params
        .n_trees
        .checked_mul(n)
        .filter(|&total| total <= isize::MAX as usize / 16)
        .ok_or_else(|| Error::Param(format!("{} trees x {n} rows is too large", params.n_trees)))?;
    let mtry = params.mtry.unwrap_or_else(|| default_mtry(p));
    if !(1..=p).contains(&mtry) {
        return Err(Error::Param(format!("mtry must be in 1..={p}, got {mtry}")));
    }

    let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(params.seed, b as u64);
            let rows = if params.bootstrap {
                bootstrap(n, &mut rng)
            } else {
                (0..n).collect()
            };
            grow_tree_on(data, rows, mtry, &mut rng)
        })
        .collect();

    let mut importances = vec![0.0; p];
    for (_, imp) in &grown {
        for (acc, x) in importances.iter_mut().zip(imp) {
            *acc += x;
        }
    }
    normalize_percent(&mut importances);

    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: data.names().to_vec(),
        n_classes: data.n_classes(),
        mtry,
        seed: params.seed,
        bootstrap: params.bootstrap,
        importances,
        trees: grown.into_iter().map(|(t, _)| t).collect(),
    })
}

/// Scales to sum to 100; an all-zero vector (no split anywhere) is spread evenly.
fn normalize_percent(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter_mut().for_each(|x| *x *= 100.0 / total);
    } else if !values.is_empty() {
        let even = 100.0 / values.len() as f64;
        values.iter_mut().for_each(|x| *x = even);
    }
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Vote fractions per class and the majority class (ties to the lowest).
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.n_features() {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.len()
            )));
        }
        let mut votes = vec![0u32; self.n_classes];
        for tree in &self.trees {
            votes[tree.vote(x) as usize - 1] += 1;
        }
        Ok(Prediction::from_votes(&votes))
    }

    pub fn predict_matrix(&self, data: &FeatureMatrix) -> Result<Vec<Prediction>> {
        (0..data.n_rows()).into_par_iter().map(|i| self.predict(data.row(i))).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }
}

pub fn predict_forest(model: &ForestModel, x: &[f64]) -> Result<Prediction> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::tree::grow_tree;

    fn toy() -> FeatureMatrix {
        FeatureMatrix::from_labeled_rows(
            vec![
                vec![0.0, 5.0, 1.0],
                vec![1.0, 3.0, 0.0],
                vec![2.0, 9.0, 1.0],
                vec![7.0, 1.0, 0.0],
                vec![8.0, 4.0, 1.0],
                vec![3.0, 3.5, 0.0],
            ],
            vec![1, 2, 1, 2, 1, 2],
        )
        .unwrap()
    }

    #[test]
    fn mtry_defaults() {
        assert_eq!(default_mtry(14), 4);
        assert_eq!(default_mtry(18), 4);
        assert_eq!(default_mtry(6), 2);
        assert_eq!(default_mtry(1), 1);
    }

    #[test]
    fn single_unbootstrapped_tree_equals_grow_tree() {
        let m = toy();
        let params = ForestParams {
            n_trees: 1,
            mtry: Some(3),
            bootstrap: false,
            seed: 5,
        };
        let forest = train_forest(&m, &params).unwrap();
        assert_eq!(forest.trees[0], grow_tree(&m, 3, &mut rng::seeded(0)));
        for (i, r) in m.rows().enumerate() {
            assert_eq!(forest.predict(r).unwrap().class, m.labels().unwrap()[i]);
        }
    }

    #[test]
    fn importances_sum_to_hundred() {
        let forest = train_forest(&toy(), &ForestParams { n_trees: 50, ..Default::default() }).unwrap();
        let total: f64 = forest.importances.iter().sum();
        assert!((total - 100.0).abs() < 1e-6);
        assert!(forest.importances.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn single_feature_gets_everything() {
        let m = FeatureMatrix::from_labeled_rows(vec![vec![1.0], vec![2.0], vec![3.0]], vec![1, 1, 2]).unwrap();
        let forest = train_forest(&m, &ForestParams { n_trees: 10, ..Default::default() }).unwrap();
        assert_eq!(forest.importances, vec![100.0]);
    }

    #[test]
    fn split_vote_ties_go_to_lowest_class() {
        let mut forest = train_forest(&toy(), &ForestParams { n_trees: 2, ..Default::default() }).unwrap();
        forest.trees = vec![
            Tree { nodes: vec![crate::classify::TreeNode::Leaf { counts: vec![1, 0] }] },
            Tree { nodes: vec![crate::classify::TreeNode::Leaf { counts: vec![0, 1] }] },
        ];
        let p = forest.predict(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.probabilities, vec![0.5, 0.5]);
        assert_eq!(p.class, 1);
    }

    #[test]
    fn parameter_checks() {
        let m = toy();
        assert!(train_forest(&m, &ForestParams { n_trees: 0, ..Default::default() }).is_err());
        assert!(train_forest(&m, &ForestParams { mtry: Some(4), ..Default::default() }).is_err());
        assert!(train_forest(&m, &ForestParams { n_trees: usize::MAX, ..Default::default() }).is_err());
        let forest = train_forest(&m, &ForestParams { n_trees: 3, ..Default::default() }).unwrap();
        assert!(forest.predict(&[1.0]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let forest = train_forest(&toy(), &ForestParams { n_trees: 4, ..Default::default() }).unwrap();
        let back = ForestModel::from_json(&forest.to_json().unwrap()).unwrap();
        assert_eq!(back, forest);
        let bad = forest.to_json().unwrap().replace("\"format_version\":1", "\"format_version\":9");
        assert!(ForestModel::from_json(&bad).is_err());
    }
}
