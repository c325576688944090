use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit_lad;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Network-size bin width for the permutation null.
pub const BIN_WIDTH: f64 = 20.0;
pub const MIN_PERMUTATIONS: usize = 100;

/// Shuffles `z` within bins `floor(x / width)`; bin membership is unchanged.
pub fn permute_binned<T: Clone>(z: &[T], x: &[f64], width: f64, rng: &mut Rng) -> Result<Vec<T>> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Param(format!("bin width must be positive, got {width}")));
    }
    if z.len() != x.len() {
        return Err(Error::Shape(format!("{} labels for {} bin values", z.len(), x.len())));
    }
    let mut bins: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &v) in x.iter().enumerate() {
        bins.entry((v / width).floor() as i64).or_default().push(i);
    }
    let mut out = z.to_vec();
    for members in bins.values() {
        let mut values: Vec<T> = members.iter().map(|&i| z[i].clone()).collect();
        values.shuffle(rng);
        for (&i, v) in members.iter().zip(values) {
            out[i] = v;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub observed: f64,
    pub n_perm: usize,
    /// Replicates with `|beta2| >= |observed|`.
    pub extreme: usize,
    pub pvalue: f64,
}

/// Two-sided test of `beta2 = 0`, permuting `z` within size bins of width 20.
/// Replicate `r` uses stream `r` of `seed`.
pub fn permutation_test_beta2(mr: &[f64], x: &[f64], z: &[u8], n_perm: usize, seed: u64) -> Result<PermutationTest> {
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::Param(format!("need at least {MIN_PERMUTATIONS} permutations, got {n_perm}")));
    }
    let observed = fit_lad(mr, x, z)?.beta2;
    let threshold = observed.abs() * (1.0 - 1e-12);
    let extreme = (0..n_perm)
        .into_par_iter()
        .map(|r| -> Result<usize> {
            let mut rng = rng::stream(seed, r as u64);
            let zp = permute_binned(z, x, BIN_WIDTH, &mut rng)?;
            Ok(usize::from(fit_lad(mr, x, &zp)?.beta2.abs() >= threshold))
        })
        .sum::<Result<usize>>()?;
    Ok(PermutationTest {
        observed,
        n_perm,
        extreme,
        pvalue: (1 + extreme) as f64 / (n_perm + 1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bin_is_a_permutation() {
        let z: Vec<u32> = (0..10).collect();
        let p = permute_binned(&z, &[1.0; 10], 20.0, &mut rng::seeded(1)).unwrap();
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, z);
        assert_ne!(p, z);
    }

    #[test]
    fn singleton_bins_are_fixed() {
        let z = [1u8, 0, 1, 1, 0];
        let x = [0.0, 20.0, 40.0, 60.0, 85.0];
        assert_eq!(permute_binned(&z, &x, 20.0, &mut rng::seeded(3)).unwrap(), z.to_vec());
    }

    #[test]
    fn bin_multisets_preserved() {
        let z: Vec<u8> = (0..50).map(|i| (i % 3 == 0) as u8).collect();
        let x: Vec<f64> = (0..50).map(|i| (i * 7 % 100) as f64).collect();
        let p = permute_binned(&z, &x, 20.0, &mut rng::seeded(2)).unwrap();
        for bin in 0..5 {
            let count = |v: &[u8]| (0..50).filter(|&i| (x[i] / 20.0).floor() as i32 == bin && v[i] == 1).count();
            assert_eq!(count(&z), count(&p));
        }
    }

    #[test]
    fn too_few_permutations() {
        let e = permutation_test_beta2(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0], &[0, 1, 0], 0, 1).unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn pvalue_bounds() {
        let x: Vec<f64> = (0..30).map(|i| 40.0 + i as f64).collect();
        let z: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
        let mr: Vec<f64> = (0..30).map(|i| 0.2 + 0.01 * ((i * 13) % 7) as f64).collect();
        let t = permutation_test_beta2(&mr, &x, &z, 100, 5).unwrap();
        assert!(t.pvalue >= 1.0 / 101.0 && t.pvalue <= 1.0);
    }
}
