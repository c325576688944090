use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub pvalue: f64,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(l) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 l^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        1.0
    } else if lambda < 1.18 {
        q_small(lambda)
    } else {
        q_large(lambda)
    }
}

/// Complementary theta-function series, fast for small lambda.
fn q_small(lambda: f64) -> f64 {
    let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
    let mut sum = 0.0;
    for j in 0..50 {
        let k = (2 * j + 1) as f64;
        let t = y.powf(k * k);
        sum += t;
        if t < 1e-17 * sum {
            break;
        }
    }
    (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
}

fn q_large(lambda: f64) -> f64 {
    let x = (-2.0 * lambda * lambda).exp();
    let mut sum = 0.0;
    for j in 1..=100 {
        let t = x.powi(j * j);
        sum += if j % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn asymptotic_pvalue(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

fn sorted(sample: &[f64], name: &str) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::Param(format!("KS sample {name} is empty")));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain(format!("KS sample {name} contains NaN")));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `D = sup |F_a - F_b|` with an asymptotic p-value at effective size
/// `n_a n_b / (n_a + n_b)` (Stephens' small-sample correction applied).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (a, b) = (sorted(a, "a")?, sorted(b, "b")?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        pvalue: asymptotic_pvalue(d, na * nb / (na + nb)),
    })
}

/// One-sample test of `sample` against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let s = sorted(sample, "sample")?;
    let n = s.len() as f64;
    let d = s.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    Ok(KsResult {
        statistic: d,
        pvalue: asymptotic_pvalue(d, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 2.0, 2.0];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.pvalue, 1.0);
    }

    #[test]
    fn disjoint_supports() {
        let r = ks_two_sample(&[0.0, 1.0, 2.0], &[100.0, 101.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn hand_computed_statistic() {
        // ECDF gap is largest just after 2: 2/3 vs 0.
        let r = ks_two_sample(&[1.0, 2.0, 5.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(r.statistic, 2.0 / 3.0);
    }

    #[test]
    fn q_branches_agree_and_match_tabulated_values() {
        assert_relative_eq!(kolmogorov_q(1.36), 0.0494, epsilon = 5e-4);
        assert_relative_eq!(kolmogorov_q(1.63), 0.0098, epsilon = 5e-4);
        for l in [0.8, 1.0, 1.18, 1.5] {
            assert_relative_eq!(q_small(l), q_large(l), epsilon = 1e-12);
        }
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!(kolmogorov_q(10.0) < 1e-80);
    }

    #[test]
    fn one_sample_uniform() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let r = ks_one_sample(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(r.statistic, 0.005, epsilon = 1e-12);
        assert!(r.pvalue > 0.99);
    }

    #[test]
    fn empty_is_error() {
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }
}
