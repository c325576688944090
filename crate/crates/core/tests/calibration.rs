mod support;

use netclass::rng;
use netclass::stats::{kolmogorov_q, ks_one_sample};
use rand::Rng as _;
use support::*;

#[test]
fn lognormal_intervals_cover_monday_parameters() {
    let (mu_in, sigma_in) = lognormal_coverage(100, 100_000, 1);
    assert!(mu_in >= 90, "mu covered {mu_in}/100");
    assert!(sigma_in >= 90, "sigma covered {sigma_in}/100");
}

#[test]
fn two_sample_ks_pvalues_are_uniform_under_the_null() {
    check_ks_uniform(2).unwrap();
}

#[test]
fn one_sample_ks_rejects_a_shifted_sample() {
    let mut r = rng::seeded(5);
    let sample: Vec<f64> = (0..500).map(|_| r.random::<f64>() * 0.8 + 0.2).collect();
    let test = ks_one_sample(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
    assert!(test.pvalue < 1e-6);
}

#[test]
fn kolmogorov_tail_is_decreasing() {
    let mut prev = 1.0;
    for i in 1..300 {
        let q = kolmogorov_q(i as f64 * 0.01);
        assert!(q <= prev + 1e-15 && (0.0..=1.0).contains(&q));
        prev = q;
    }
}
