//! Classifiers on feature matrices: CART trees, random forests, KNN,
//! k-means and PCA, plus cross-validation.

mod cv;
mod forest;
mod kmeans;
mod knn;
mod matrix;
mod pca;
mod scale;
mod tree;

use serde::{Deserialize, Serialize};

pub use cv::{
    confusion_matrix, cross_validate, evaluate_split, mean_sd, stratified_folds, train_classifier, ClassifierConfig,
    ClassifierKind, ClusterClassifier, CvResult, SplitResult, TrainedClassifier,
};
pub use forest::{
    default_mtry, predict_forest, train_forest, ForestModel, ForestParams, DEFAULT_TREES, MODEL_FORMAT_VERSION,
    FULL_TREES,
};
pub use kmeans::{kmeans, KMeansModel};
pub use knn::{knn_predict, KnnModel, DEFAULT_K};
pub use matrix::FeatureMatrix;
pub use pca::{pca_fit, pca_transform, PcaModel};
pub use scale::Standardizer;
pub use tree::{gini, gini_split, grow_tree, grow_tree_on, Split, Tree, TreeNode};

/// A predicted class (1-based) with per-class probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: u32,
    pub probabilities: Vec<f64>,
}

impl Prediction {
    /// Vote fractions; the class is the most-voted, ties to the lowest.
    pub fn from_votes(votes: &[u32]) -> Self {
        let total: u32 = votes.iter().sum();
        let probabilities = votes
            .iter()
            .map(|&v| if total > 0 { f64::from(v) / f64::from(total) } else { 1.0 / votes.len() as f64 })
            .collect();
        Self {
            class: tree::argmax_lowest(votes) as u32 + 1,
            probabilities,
        }
    }
}
