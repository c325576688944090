//! Classifier configuration, stratified cross-validation and split evaluation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{kmeans, train_forest, FeatureMatrix, ForestModel, ForestParams, KMeansModel, KnnModel, Prediction, Standardizer};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Rf,
    Knn,
    Kmeans,
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(Self::Rf),
            "knn" => Ok(Self::Knn),
            "kmeans" => Ok(Self::Kmeans),
            other => Err(Error::Config(format!("unknown classifier {other:?} (expected rf, knn or kmeans)"))),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rf => "rf",
            Self::Knn => "knn",
            Self::Kmeans => "kmeans",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub classifier: ClassifierKind,
    pub trees: usize,
    pub mtry: Option<usize>,
    /// Neighbors for KNN.
    pub k: usize,
    /// Clusters for k-means; `None` uses the number of classes.
    pub clusters: Option<usize>,
    pub restarts: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            classifier: ClassifierKind::Rf,
            trees: super::DEFAULT_TREES,
            mtry: None,
            k: super::DEFAULT_K,
            clusters: None,
            restarts: 10,
        }
    }
}

/// k-means used as a classifier: each cluster predicts the label mix of the
/// training points assigned to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterClassifier {
    pub scaler: Standardizer,
    pub model: KMeansModel,
    pub cluster_votes: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrainedClassifier {
    Forest(ForestModel),
    Knn(KnnModel),
    KMeans(ClusterClassifier),
}

impl TrainedClassifier {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Self::Forest(m) => m.predict(x),
            Self::Knn(m) => m.predict(x),
            Self::KMeans(m) => {
                if x.len() != m.scaler.means.len() {
                    return Err(Error::Shape(format!("expected {} features, got {}", m.scaler.means.len(), x.len())));
                }
                let c = m.model.nearest(&m.scaler.transform_row(x));
                Ok(Prediction::from_votes(&m.cluster_votes[c]))
            }
        }
    }

    pub fn forest(&self) -> Option<&ForestModel> {
        match self {
            Self::Forest(m) => Some(m),
            _ => None,
        }
    }
}

pub fn train_classifier(config: &ClassifierConfig, train: &FeatureMatrix, seed: u64) -> Result<TrainedClassifier> {
    match config.classifier {
        ClassifierKind::Rf => {
            let params = ForestParams {
                n_trees: config.trees,
                mtry: config.mtry,
                bootstrap: true,
                seed,
            };
            Ok(TrainedClassifier::Forest(train_forest(train, &params)?))
        }
        ClassifierKind::Knn => Ok(TrainedClassifier::Knn(KnnModel::fit(train, config.k)?)),
        ClassifierKind::Kmeans => {
            let labels = train.require_labels()?;
            let k = config.clusters.unwrap_or(train.n_classes()).min(train.n_rows());
            let scaler = Standardizer::fit(train);
            let model = kmeans(&scaler.transform(train), k, config.restarts, seed)?;
            let mut cluster_votes = vec![vec![0u32; train.n_classes()]; model.k()];
            for (&c, &y) in model.assignments.iter().zip(labels) {
                cluster_votes[c][y as usize - 1] += 1;
            }
            Ok(TrainedClassifier::KMeans(ClusterClassifier {
                scaler,
                model,
                cluster_votes,
            }))
        }
    }
}

/// Fold index per row. Each class is shuffled and dealt round-robin, the deal
/// continuing across classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[u32], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Param(format!("need at least 2 folds, got {folds}")));
    }
    if folds > labels.len() {
        return Err(Error::Protocol(format!("{folds} folds but only {} items; some folds would be empty", labels.len())));
    }
    let mut rng = rng::seeded(seed);
    let n_classes = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in 1..=n_classes as u32 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if !members.is_empty() && members.len() < folds {
            log::warn!("class {class} has {} members for {folds} folds; some folds lack it", members.len());
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub sd: f64,
    /// `sd / sqrt(folds)`.
    pub se: f64,
    pub fold_of: Vec<usize>,
    /// Out-of-fold prediction for every row.
    pub predictions: Vec<Prediction>,
}

/// Median fill computed on the training rows only.
fn impute_from(data: &FeatureMatrix, train_rows: &[usize]) -> FeatureMatrix {
    if data.has_missing() {
        data.impute(&data.column_medians(train_rows))
    } else {
        data.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub test_rows: Vec<usize>,
    pub predictions: Vec<Prediction>,
    pub accuracy: f64,
    pub model: TrainedClassifier,
}

/// Trains on `train_rows` and predicts `test_rows`.
pub fn evaluate_split(
    data: &FeatureMatrix,
    config: &ClassifierConfig,
    train_rows: &[usize],
    test_rows: &[usize],
    seed: u64,
) -> Result<SplitResult> {
    let labels = data.require_labels()?;
    if test_rows.is_empty() {
        return Err(Error::Protocol("no test items".into()));
    }
    if train_rows.is_empty() {
        return Err(Error::Protocol("no training items".into()));
    }
    let filled = impute_from(data, train_rows);
    let train = filled.select_rows(train_rows);
    let model = train_classifier(config, &train, seed)?;
    let predictions = test_rows
        .iter()
        .map(|&i| model.predict(filled.row(i)))
        .collect::<Result<Vec<_>>>()?;
    let correct = test_rows.iter().zip(&predictions).filter(|(&i, p)| p.class == labels[i]).count();
    Ok(SplitResult {
        test_rows: test_rows.to_vec(),
        accuracy: correct as f64 / test_rows.len() as f64,
        predictions,
        model,
    })
}

/// Stratified `folds`-fold cross-validation. Fold `f` trains with seed
/// stream `f` of `seed`; missing values are median-filled per fold.
pub fn cross_validate(data: &FeatureMatrix, config: &ClassifierConfig, folds: usize, seed: u64) -> Result<CvResult> {
    let labels = data.require_labels()?;
    let fold_of = stratified_folds(labels, folds, seed)?;
    let mut predictions: Vec<Option<Prediction>> = vec![None; data.n_rows()];
    let mut fold_accuracies = Vec::with_capacity(folds);
    for f in 0..folds {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..data.n_rows()).partition(|&i| fold_of[i] == f);
        let result = evaluate_split(data, config, &train, &test, rng::derive_seed(seed, f as u64))?;
        fold_accuracies.push(result.accuracy);
        for (i, p) in test.into_iter().zip(result.predictions) {
            predictions[i] = Some(p);
        }
    }
    let (mean, sd) = mean_sd(&fold_accuracies);
    Ok(CvResult {
        se: sd / (folds as f64).sqrt(),
        mean,
        sd,
        fold_accuracies,
        fold_of,
        predictions: predictions.into_iter().map(|p| p.expect("every row is in one fold")).collect(),
    })
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Counts indexed `[true class - 1][predicted class - 1]`.
pub fn confusion_matrix(truth: &[u32], predicted: &[u32], n_classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        m[t as usize - 1][p as usize - 1] += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kind: ClassifierKind) -> ClassifierConfig {
        ClassifierConfig {
            classifier: kind,
            trees: 25,
            k: 1,
            ..Default::default()
        }
    }

    #[test]
    fn folds_are_stratified_and_balanced() {
        let labels: Vec<u32> = (0..23).map(|i| if i < 15 { 1 } else { 2 }).collect();
        let folds = stratified_folds(&labels, 5, 3).unwrap();
        let mut sizes = [0; 5];
        for &f in &folds {
            sizes[f] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for f in 0..5 {
            let ones = (0..23).filter(|&i| folds[i] == f && labels[i] == 1).count();
            assert_eq!(ones, 3);
        }
        assert!(stratified_folds(&labels, 1, 0).is_err());
        assert!(stratified_folds(&labels[..3], 4, 0).is_err());
    }

    #[test]
    fn constant_feature_gives_majority_rate() {
        let rows = vec![vec![0.0]; 10];
        let labels = vec![1, 2, 1, 2, 1, 2, 1, 2, 1, 2];
        let m = FeatureMatrix::from_labeled_rows(rows, labels).unwrap();
        let cv = cross_validate(&m, &config(ClassifierKind::Rf), 5, 0).unwrap();
        assert_eq!(cv.mean, 0.5);
    }

    #[test]
    fn duplicated_points_one_nn_is_perfect() {
        let base = [[0.0, 0.0], [5.0, 1.0], [9.0, -3.0], [2.0, 8.0]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..5 {
            for (c, r) in base.iter().enumerate() {
                rows.push(r.to_vec());
                labels.push(c as u32 % 2 + 1);
            }
        }
        let m = FeatureMatrix::from_labeled_rows(rows, labels).unwrap();
        let cv = cross_validate(&m, &config(ClassifierKind::Knn), 5, 1).unwrap();
        assert_eq!(cv.mean, 1.0);
        assert_eq!(cv.sd, 0.0);
    }

    #[test]
    fn all_classifiers_separate_blobs_and_impute() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let off = if i % 2 == 0 { 0.0 } else { 100.0 };
            rows.push(vec![off + (i % 5) as f64, if i == 3 { f64::NAN } else { off }]);
            labels.push(i % 2 + 1);
        }
        let m = FeatureMatrix::from_labeled_rows(rows, labels).unwrap();
        for kind in [ClassifierKind::Rf, ClassifierKind::Knn, ClassifierKind::Kmeans] {
            let cv = cross_validate(&m, &config(kind), 4, 9).unwrap();
            assert!(cv.mean >= 0.95, "{kind}: {}", cv.mean);
            for p in &cv.predictions {
                assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn confusion_rows_sum_to_class_counts() {
        let m = confusion_matrix(&[1, 1, 2, 3], &[1, 2, 2, 1], 3);
        assert_eq!(m, vec![vec![1, 1, 0], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn classifier_names() {
        assert_eq!("knn".parse::<ClassifierKind>().unwrap(), ClassifierKind::Knn);
        assert!("svm".parse::<ClassifierKind>().unwrap_err().is_config());
    }
}
