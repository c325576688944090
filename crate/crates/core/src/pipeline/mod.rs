//! End-to-end runs: load a dataset, extract features, evaluate a classifier
//! and write a run directory.
//!
//! A run directory holds `config.json`, `features.csv`, `report.json`,
//! `predictions.csv` and, for forests, `importances.csv`.

mod dist;
mod study;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::bipartite::{extract_bipartite, threshold_collection, DEFAULT_Q};
use crate::classify::{
    confusion_matrix, cross_validate, evaluate_split, train_classifier, ClassifierConfig, ClassifierKind,
    FeatureMatrix, Prediction,
};
use crate::error::{Error, Result};
use crate::features::{extract_unipartite, DistributionOptions, Extraction, FeatureSet};
use crate::graph::{
    load_bipartite_collection, load_edge_collection, load_tu_benchmark, BipartiteWeightedGraph, Graph, GraphCollection,
};
use crate::rng;

pub use dist::{degree_histogram, fit_degree_distributions, DegreeFit, HistogramRow};
pub use study::{
    combine_days, read_study_csv, run_sampling_regression, run_sampling_study, write_study_csv, StudyConfig, StudyResult, StudyRow,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum DatasetSpec {
    /// Benchmark triple files `<name>_A.txt` etc. in `path`.
    Tu { path: PathBuf, name: String },
    /// Edge-list collection directory.
    Edges { path: PathBuf },
    /// Bipartite weight-matrix collection directory.
    Bipartite { path: PathBuf },
}

impl DatasetSpec {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Self::Bipartite { .. })
    }
}

pub enum Dataset {
    Unipartite(GraphCollection<Graph>),
    Bipartite(GraphCollection<BipartiteWeightedGraph>),
}

impl Dataset {
    pub fn ids(&self) -> &[String] {
        match self {
            Self::Unipartite(c) => &c.ids,
            Self::Bipartite(c) => &c.ids,
        }
    }

    pub fn class_names(&self) -> &[String] {
        match self {
            Self::Unipartite(c) => c.class_names(),
            Self::Bipartite(c) => c.class_names(),
        }
    }
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    match spec {
        DatasetSpec::Tu { path, name } => load_tu_benchmark(path, name).map(Dataset::Unipartite),
        DatasetSpec::Edges { path } => load_edge_collection(path).map(Dataset::Unipartite),
        DatasetSpec::Bipartite { path } => load_bipartite_collection(path).map(Dataset::Bipartite),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Protocol {
    Cv { folds: usize },
    /// Train on odd positions (1-based, in dataset order), test on even.
    Parity,
    Explicit { train: Vec<String>, test: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub feature_set: FeatureSet,
    pub classifier: ClassifierConfig,
    pub protocol: Protocol,
    /// Network ids left out of every stage (e.g. holidays).
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default = "default_q")]
    pub threshold_q: f64,
    #[serde(default)]
    pub distribution: DistributionOptions,
    /// Report features correlated above this `|rho|` as redundant.
    #[serde(default)]
    pub collinearity: Option<f64>,
    pub seed: u64,
}

fn default_q() -> f64 {
    DEFAULT_Q
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSpec, feature_set: FeatureSet) -> Self {
        Self {
            dataset,
            feature_set,
            classifier: ClassifierConfig::default(),
            protocol: Protocol::Cv { folds: 10 },
            exclude: Vec::new(),
            threshold_q: DEFAULT_Q,
            distribution: DistributionOptions::default(),
            collinearity: Some(0.9),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.feature_set, self.dataset.is_bipartite()) {
            (FeatureSet::Bio, false) => return Err(Error::Config("the bio feature set needs a bipartite dataset".into())),
            (FeatureSet::Benchmark6 | FeatureSet::Cdr, true) => {
                return Err(Error::Config(format!("the {} feature set needs a unipartite dataset", self.feature_set)))
            }
            _ => {}
        }
        if let Protocol::Cv { folds } = self.protocol {
            if folds < 2 {
                return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
            }
        }
        if self.classifier.trees == 0 || self.classifier.k == 0 {
            return Err(Error::Config("trees and k must be positive".into()));
        }
        Ok(())
    }
}

fn keep<G: Clone>(c: &GraphCollection<G>, exclude: &HashSet<&str>) -> Result<(GraphCollection<G>, Vec<usize>)> {
    let positions: Vec<usize> = (0..c.len()).filter(|&i| !exclude.contains(c.ids[i].as_str())).collect();
    let graphs = positions.iter().map(|&i| c.graphs[i].clone()).collect();
    let ids = positions.iter().map(|&i| c.ids[i].clone()).collect();
    let kept = match c.labels() {
        Some(l) => GraphCollection::labeled(graphs, ids, positions.iter().map(|&i| l[i]).collect(), c.class_names().to_vec())?,
        None => GraphCollection::unlabeled(graphs, ids)?,
    };
    Ok((kept, positions))
}

/// Features of the dataset after exclusions, with each row's 1-based
/// position in the original dataset.
pub struct Extracted {
    pub extraction: Extraction,
    pub positions: Vec<usize>,
    pub class_names: Vec<String>,
}

pub fn extract_dataset(config: &ExperimentConfig, dataset: &Dataset) -> Result<Extracted> {
    config.validate()?;
    let exclude: HashSet<&str> = config.exclude.iter().map(String::as_str).collect();
    for id in &exclude {
        if !dataset.ids().iter().any(|x| x == id) {
            warn!("excluded id {id:?} is not in the dataset");
        }
    }
    let (extraction, positions) = match dataset {
        Dataset::Unipartite(c) => {
            let (kept, positions) = keep(c, &exclude)?;
            if config.feature_set == FeatureSet::Cdr && kept.graphs.iter().all(|g| g.attributes().is_none()) {
                warn!("no node attributes; attribute features are missing");
            }
            (extract_unipartite(&kept, config.feature_set, config.distribution)?, positions)
        }
        Dataset::Bipartite(c) => {
            let (kept, positions) = keep(c, &exclude)?;
            let thresholded = threshold_collection(&kept.graphs, config.threshold_q)?;
            let mut e = extract_bipartite(&thresholded, kept.labels().map(<[u32]>::to_vec), kept.n_classes())?;
            e.matrix = FeatureMatrix::new(
                e.matrix.names().to_vec(),
                kept.ids.clone(),
                e.matrix.rows().map(<[f64]>::to_vec).collect(),
                kept.labels().map(<[u32]>::to_vec),
            )?
            .with_n_classes(kept.n_classes());
            (e, positions)
        }
    };
    Ok(Extracted {
        extraction,
        positions: positions.into_iter().map(|p| p + 1).collect(),
        class_names: dataset.class_names().to_vec(),
    })
}

pub fn run_extract(config: &ExperimentConfig) -> Result<Extracted> {
    extract_dataset(config, &load_dataset(&config.dataset)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemPrediction {
    pub id: String,
    /// `fold<k>` under cross-validation, `test` otherwise.
    pub split: String,
    pub label: u32,
    pub prediction: Prediction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub percent: f64,
    /// Earlier feature this one is collinear with, if any.
    pub redundant_with: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub class_names: Vec<String>,
    pub n_items: usize,
    pub accuracy: f64,
    pub accuracy_sd: f64,
    pub accuracy_se: f64,
    pub fold_accuracies: Vec<f64>,
    pub majority_rate: f64,
    /// `[true][predicted]` counts over all tested items.
    pub confusion: Vec<Vec<u64>>,
    pub items: Vec<ItemPrediction>,
    pub importances: Option<Vec<FeatureImportance>>,
    pub warnings: Vec<String>,
    pub elapsed_ms: u128,
}

fn majority_rate(labels: &[u32], n_classes: usize) -> f64 {
    let mut counts = vec![0usize; n_classes.max(1)];
    for &y in labels {
        counts[y as usize - 1] += 1;
    }
    *counts.iter().max().unwrap() as f64 / labels.len().max(1) as f64
}

/// Pearson correlation, 0 when either column is constant.
fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// For each column, the first earlier column correlated with it above
/// `threshold` in absolute value.
pub fn collinear_with(data: &FeatureMatrix, threshold: f64) -> Vec<Option<usize>> {
    let filled = data.impute(&data.column_medians(&(0..data.n_rows()).collect::<Vec<_>>()));
    let columns: Vec<Vec<f64>> = (0..filled.n_cols()).map(|j| filled.column(j)).collect();
    (0..columns.len())
        .map(|j| (0..j).find(|&i| correlation(&columns[i], &columns[j]).abs() > threshold))
        .collect()
}

fn importance_table(data: &FeatureMatrix, percent: &[f64], collinearity: Option<f64>) -> Vec<FeatureImportance> {
    let redundant = collinearity.map(|t| collinear_with(data, t));
    data.names()
        .iter()
        .enumerate()
        .map(|(j, name)| FeatureImportance {
            feature: name.clone(),
            percent: percent[j],
            redundant_with: redundant
                .as_ref()
                .and_then(|r| r[j])
                .map(|i| data.names()[i].clone()),
        })
        .collect()
}

fn protocol_split(config: &ExperimentConfig, ex: &Extracted) -> Result<(Vec<usize>, Vec<usize>)> {
    let ids = ex.extraction.matrix.ids();
    match &config.protocol {
        Protocol::Parity => Ok((0..ids.len()).partition(|&i| ex.positions[i] % 2 == 1)),
        Protocol::Explicit { train, test } => {
            let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
            let lookup = |list: &[String]| -> Result<Vec<usize>> {
                list.iter()
                    .map(|id| {
                        index
                            .get(id.as_str())
                            .copied()
                            .ok_or_else(|| Error::Config(format!("id {id:?} is not in the (non-excluded) dataset")))
                    })
                    .collect()
            };
            let (tr, te) = (lookup(train)?, lookup(test)?);
            if tr.iter().any(|i| te.contains(i)) {
                return Err(Error::Protocol("train and test lists overlap".into()));
            }
            Ok((tr, te))
        }
        Protocol::Cv { .. } => unreachable!("handled by cross-validation"),
    }
}

/// Evaluates the configured classifier on already extracted features.
pub fn evaluate(config: &ExperimentConfig, ex: &Extracted) -> Result<RunReport> {
    let start = Instant::now();
    let data = &ex.extraction.matrix;
    let labels = data
        .require_labels()
        .map_err(|_| Error::Config("evaluation needs a labeled dataset".into()))?;
    let n_classes = data.n_classes();
    let mut warnings = Vec::new();
    let distinct: HashSet<u32> = labels.iter().copied().collect();
    if distinct.len() < 2 {
        let w = "only one class present; accuracy is trivially 1".to_string();
        warn!("{w}");
        warnings.push(w);
    }
    let is_rf = config.classifier.classifier == ClassifierKind::Rf;

    let (items, fold_accuracies, accuracy, sd, se, importances) = match config.protocol {
        Protocol::Cv { folds } => {
            let cv = cross_validate(data, &config.classifier, folds, config.seed)?;
            let items: Vec<ItemPrediction> = (0..data.n_rows())
                .map(|i| ItemPrediction {
                    id: data.ids()[i].clone(),
                    split: format!("fold{}", cv.fold_of[i] + 1),
                    label: labels[i],
                    prediction: cv.predictions[i].clone(),
                })
                .collect();
            let importances = if is_rf {
                // Fold models each sum to 100; their mean does too.
                let mut mean = vec![0.0; data.n_cols()];
                for f in 0..folds {
                    let train: Vec<usize> = (0..data.n_rows()).filter(|&i| cv.fold_of[i] != f).collect();
                    let filled = data.impute(&data.column_medians(&train)).select_rows(&train);
                    let model = train_classifier(&config.classifier, &filled, rng::derive_seed(config.seed, f as u64))?;
                    for (m, x) in mean.iter_mut().zip(&model.forest().unwrap().importances) {
                        *m += x / folds as f64;
                    }
                }
                Some(importance_table(data, &mean, config.collinearity))
            } else {
                None
            };
            (items, cv.fold_accuracies, cv.mean, cv.sd, cv.se, importances)
        }
        _ => {
            let (train, test) = protocol_split(config, ex)?;
            let result = evaluate_split(data, &config.classifier, &train, &test, config.seed)?;
            let items = test
                .iter()
                .zip(&result.predictions)
                .map(|(&i, p)| ItemPrediction {
                    id: data.ids()[i].clone(),
                    split: "test".into(),
                    label: labels[i],
                    prediction: p.clone(),
                })
                .collect();
            let importances = result
                .model
                .forest()
                .map(|m| importance_table(data, &m.importances, config.collinearity));
            (items, vec![result.accuracy], result.accuracy, 0.0, 0.0, importances)
        }
    };
    let truth: Vec<u32> = items.iter().map(|it| it.label).collect();
    let predicted: Vec<u32> = items.iter().map(|it| it.prediction.class).collect();
    Ok(RunReport {
        class_names: ex.class_names.clone(),
        n_items: items.len(),
        accuracy,
        accuracy_sd: sd,
        accuracy_se: se,
        fold_accuracies,
        majority_rate: majority_rate(&truth, n_classes),
        confusion: confusion_matrix(&truth, &predicted, n_classes),
        items,
        importances,
        warnings,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Creates an empty run directory; refuses one that already holds files.
pub fn prepare_out_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() {
            return Err(Error::Config(format!("output directory {} is not empty", dir.display())));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: PathBuf, contents: &[u8]) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_features(dir: &Path, data: &FeatureMatrix) -> Result<()> {
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    write_file(dir.join("features.csv"), &buf)
}

pub fn write_predictions(dir: &Path, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "split".into(), "label".into(), "predicted".into()];
    header.extend(report.class_names.iter().map(|c| format!("p_{c}")));
    w.write_record(&header)?;
    for it in &report.items {
        let name = |k: u32| report.class_names[k as usize - 1].clone();
        let mut row = vec![it.id.clone(), it.split.clone(), name(it.label), name(it.prediction.class)];
        row.extend(it.prediction.probabilities.iter().map(|p| p.to_string()));
        w.write_record(&row)?;
    }
    write_file(dir.join("predictions.csv"), &w.into_inner().map_err(|e| Error::Format(e.to_string()))?)
}

pub fn write_importances(dir: &Path, table: &[FeatureImportance]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["feature", "importance_percent", "redundant_with"])?;
    for f in table {
        w.write_record([f.feature.as_str(), &f.percent.to_string(), f.redundant_with.as_deref().unwrap_or("")])?;
    }
    write_file(dir.join("importances.csv"), &w.into_inner().map_err(|e| Error::Format(e.to_string()))?)
}

pub fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Full evaluation run writing a run directory.
pub fn run_eval(config: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    config.validate()?;
    prepare_out_dir(out)?;
    write_json(out.join("config.json"), config)?;
    let ex = run_extract(config)?;
    write_features(out, &ex.extraction.matrix)?;
    let report = evaluate(config, &ex)?;
    write_json(out.join("report.json"), &report)?;
    write_predictions(out, &report)?;
    if let Some(table) = &report.importances {
        write_importances(out, table)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub n_trees: usize,
    pub mtry: usize,
    pub importances: Vec<FeatureImportance>,
}

/// Trains one forest on every labeled, non-excluded item.
pub fn importance_from(config: &ExperimentConfig, ex: &Extracted) -> Result<ImportanceReport> {
    if config.classifier.classifier != ClassifierKind::Rf {
        return Err(Error::Config("importances need the rf classifier".into()));
    }
    let data = &ex.extraction.matrix;
    data.require_labels()
        .map_err(|_| Error::Config("importances need a labeled dataset".into()))?;
    let all: Vec<usize> = (0..data.n_rows()).collect();
    let filled = data.impute(&data.column_medians(&all));
    let model = train_classifier(&config.classifier, &filled, config.seed)?;
    let forest = model.forest().unwrap();
    Ok(ImportanceReport {
        n_trees: forest.trees.len(),
        mtry: forest.mtry,
        importances: importance_table(data, &forest.importances, config.collinearity),
    })
}

pub fn run_importance(config: &ExperimentConfig, out: &Path) -> Result<ImportanceReport> {
    config.validate()?;
    prepare_out_dir(out)?;
    write_json(out.join("config.json"), config)?;
    let ex = run_extract(config)?;
    write_features(out, &ex.extraction.matrix)?;
    let report = importance_from(config, &ex)?;
    write_importances(out, &report.importances)?;
    write_json(out.join("report.json"), &report)?;
    Ok(report)
}

/// Reads one id per line (blank lines and `#` comments skipped).
pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}
