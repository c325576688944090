//! k-nearest-neighbor classification under Euclidean distance on
//! standardized features.

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, Prediction, Standardizer};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub scaler: Standardizer,
    train: FeatureMatrix,
}

impl KnnModel {
    pub fn fit(train: &FeatureMatrix, k: usize) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::Param("KNN needs a nonempty training set".into()));
        }
        train.require_complete()?;
        train.require_labels()?;
        if k == 0 || k > train.n_rows() {
            return Err(Error::Param(format!("k must be in 1..={}, got {k}", train.n_rows())));
        }
        let scaler = Standardizer::fit(train);
        Ok(Self {
            k,
            train: scaler.transform(train),
            scaler,
        })
    }

    /// Training indices of the `k` nearest neighbors, nearest first; equal
    /// distances are ordered by training index.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.train.n_cols() {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.train.n_cols(),
                x.len()
            )));
        }
        let z = self.scaler.transform_row(x);
        let mut dist: Vec<(f64, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, order);
            dist.truncate(self.k);
        }
        dist.sort_by(order);
        Ok(dist.into_iter().map(|(_, i)| i).collect())
    }

    /// Majority class among the neighbors (ties to the lowest class);
    /// probabilities are neighbor vote fractions.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let labels = self.train.labels().expect("checked at fit");
        let mut votes = vec![0u32; self.train.n_classes()];
        for i in self.neighbors(x)? {
            votes[labels[i] as usize - 1] += 1;
        }
        Ok(Prediction::from_votes(&votes))
    }
}

pub fn knn_predict(train: &FeatureMatrix, x: &[f64], k: usize) -> Result<u32> {
    Ok(KnnModel::fit(train, k)?.predict(x)?.class)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train() -> FeatureMatrix {
        FeatureMatrix::from_labeled_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![10.0, 0.0]], vec![1, 1, 2]).unwrap()
    }

    #[test]
    fn worked_example() {
        assert_eq!(knn_predict(&train(), &[0.4, 0.0], 3).unwrap(), 1);
        assert_eq!(knn_predict(&train(), &[9.0, 0.0], 1).unwrap(), 2);
    }

    #[test]
    fn exact_match_with_k1() {
        let t = train();
        for (i, r) in t.rows().enumerate() {
            assert_eq!(knn_predict(&t, r, 1).unwrap(), t.labels().unwrap()[i]);
        }
    }

    #[test]
    fn k_equals_n_is_global_majority() {
        assert_eq!(knn_predict(&train(), &[100.0, 0.0], 3).unwrap(), 1);
    }

    #[test]
    fn distance_ties_by_index_and_vote_ties_by_class() {
        let t = FeatureMatrix::from_labeled_rows(vec![vec![-1.0], vec![1.0], vec![5.0], vec![-5.0]], vec![2, 1, 1, 1]).unwrap();
        let model = KnnModel::fit(&t, 2).unwrap();
        assert_eq!(model.neighbors(&[0.0]).unwrap(), vec![0, 1]);
        assert_eq!(model.predict(&[0.0]).unwrap().class, 1);
    }

    #[test]
    fn errors() {
        let empty = FeatureMatrix::new(vec!["a".into()], vec![], vec![], Some(vec![])).unwrap();
        assert!(KnnModel::fit(&empty, 1).is_err());
        assert!(KnnModel::fit(&train(), 4).is_err());
        assert!(KnnModel::fit(&train(), 0).is_err());
        assert!(KnnModel::fit(&train(), 1).unwrap().predict(&[1.0]).is_err());
    }
}
