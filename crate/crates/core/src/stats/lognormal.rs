use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::{ks_two_sample, KsResult};
use crate::error::{Error, Result};
use crate::rng;

pub const Z_95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub ci_mu: (f64, f64),
    pub ci_sigma: (f64, f64),
    /// Set when the sample is constant and `sigma` is 0.
    pub degenerate: bool,
    pub ks: Option<KsResult>,
}

/// Maximum-likelihood fit of `ln k ~ N(mu, sigma^2)` with asymptotic 95%
/// intervals `mu ± 1.96 sigma/sqrt(n)` and `sigma ± 1.96 sigma/sqrt(2n)`.
pub fn fit_lognormal(sample: &[f64]) -> Result<LognormalFit> {
    if sample.len() < 2 {
        return Err(Error::Param(format!("lognormal fit needs at least 2 values, got {}", sample.len())));
    }
    if let Some(bad) = sample.iter().find(|&&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::Domain(format!("lognormal fit needs positive finite values, got {bad}")));
    }
    let n = sample.len() as f64;
    let logs: Vec<f64> = sample.iter().map(|k| k.ln()).collect();
    let mu = logs.iter().sum::<f64>() / n;
    let mut sigma = (logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n).sqrt();
    let degenerate = sample.iter().all(|&k| k == sample[0]);
    if degenerate {
        sigma = 0.0;
    }
    let half_mu = Z_95 * sigma / n.sqrt();
    let half_sigma = Z_95 * sigma / (2.0 * n).sqrt();
    Ok(LognormalFit {
        n: sample.len(),
        mu,
        sigma,
        ci_mu: (mu - half_mu, mu + half_mu),
        ci_sigma: (sigma - half_sigma, sigma + half_sigma),
        degenerate,
        ks: None,
    })
}

/// Two-sample KS test of `sample` against an equally sized draw from the
/// fitted distribution. The draw is rounded to integers >= 1 when the sample
/// is integer-valued (degree data).
pub fn lognormal_ks(fit: &LognormalFit, sample: &[f64], seed: u64) -> Result<KsResult> {
    let dist = LogNormal::new(fit.mu, fit.sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let integer = sample.iter().all(|k| k.fract() == 0.0);
    let mut rng = rng::seeded(seed);
    let draw: Vec<f64> = (0..sample.len())
        .map(|_| {
            let v: f64 = dist.sample(&mut rng);
            if integer {
                v.round().max(1.0)
            } else {
                v
            }
        })
        .collect();
    ks_two_sample(sample, &draw)
}

pub fn lognormal_pdf(k: f64, mu: f64, sigma: f64) -> f64 {
    if k <= 0.0 || sigma <= 0.0 {
        return 0.0;
    }
    let z = (k.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (k * sigma * (2.0 * std::f64::consts::PI).sqrt())
}
