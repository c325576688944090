//! Principal component analysis by eigendecomposition of the sample
//! covariance matrix.

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// Unit-length component directions, strongest first.
    pub components: Vec<Vec<f64>>,
    /// Variance of the scores along each component (divisor `N - 1`).
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.means).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }

    /// Maps scores back to feature space.
    pub fn inverse_transform(&self, scores: &[f64]) -> Vec<f64> {
        let mut x = self.means.clone();
        for (c, s) in self.components.iter().zip(scores) {
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi += s * ci;
            }
        }
        x
    }
}

/// Fits the leading `n_components` principal directions of `data`.
///
/// Each component's sign is chosen so its largest-magnitude loading is
/// positive. Zero-variance data yields all-zero scores.
#[allow(clippy::needless_range_loop)]
pub fn pca_fit(data: &FeatureMatrix, n_components: usize) -> Result<PcaModel> {
    data.require_complete()?;
    let p = data.n_cols();
    if n_components == 0 || n_components > p {
        return Err(Error::Param(format!("n_components must be in 1..={p}, got {n_components}")));
    }
    let n = data.n_rows();
    let means: Vec<f64> = (0..p).map(|j| data.rows().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let divisor = n.saturating_sub(1).max(1) as f64;
    let mut cov = vec![vec![0.0; p]; p];
    for r in data.rows() {
        for a in 0..p {
            let da = r[a] - means[a];
            for b in a..p {
                cov[a][b] += da * (r[b] - means[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            cov[a][b] /= divisor;
            cov[b][a] = cov[a][b];
        }
    }

    let (values, vectors) = symmetric_eigen(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    for &k in order.iter().take(n_components) {
        let mut c: Vec<f64> = (0..p).map(|i| vectors[i][k]).collect();
        let pivot = c
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > c[best].abs() { i } else { best });
        if c[pivot] < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(c);
        explained_variance.push(values[k].max(0.0));
    }
    Ok(PcaModel {
        means,
        components,
        explained_variance,
    })
}

pub fn pca_transform(model: &PcaModel, x: &[f64]) -> Vec<f64> {
    model.transform(x)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues and a matrix whose columns are the matching
/// orthonormal eigenvectors.
#[allow(clippy::needless_range_loop)]
pub(crate) fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn matrix(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn axis_aligned_data() {
        let m = matrix(&[&[1.0, 5.0], &[2.0, 5.0], &[4.0, 5.0], &[9.0, 5.0]]);
        let model = pca_fit(&m, 2).unwrap();
        assert_relative_eq!(model.components[0][0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(model.components[0][1], 0.0, epsilon = 1e-12);
        let col = m.column(0);
        let mean = col.iter().sum::<f64>() / 4.0;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert_relative_eq!(model.explained_variance[0], var, epsilon = 1e-12);
        assert_relative_eq!(model.explained_variance[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn full_reconstruction() {
        let m = matrix(&[&[1.0, 2.0, 0.5], &[-1.0, 0.3, 2.0], &[4.0, -2.0, 1.0], &[0.0, 0.0, 7.0], &[2.5, 1.5, -3.0]]);
        let model = pca_fit(&m, 3).unwrap();
        for r in m.rows() {
            let back = model.inverse_transform(&model.transform(r));
            for (a, b) in back.iter().zip(r) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn zero_variance_scores_are_zero() {
        let m = matrix(&[&[3.0, 1.0], &[3.0, 1.0], &[3.0, 1.0]]);
        let model = pca_fit(&m, 2).unwrap();
        assert!(model.transform(&[3.0, 1.0]).iter().all(|&s| s == 0.0));
        assert!(model.explained_variance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sign_convention() {
        let m = matrix(&[&[0.0, 0.0], &[-1.0, -2.0], &[1.0, 2.0]]);
        let model = pca_fit(&m, 1).unwrap();
        assert!(model.components[0][1] > 0.0);
    }

    #[test]
    fn parameter_errors() {
        let m = matrix(&[&[0.0, 0.0]]);
        assert!(pca_fit(&m, 3).is_err());
        assert!(pca_fit(&m, 0).is_err());
    }
}
