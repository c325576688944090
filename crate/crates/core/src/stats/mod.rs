//! Degree-distribution fitting, Kolmogorov-Smirnov tests and the
//! least-absolute-deviations regression used in the subsampling study.

mod ks;
mod lad;
mod lognormal;
mod permutation;

pub use ks::{kolmogorov_q, ks_one_sample, ks_two_sample, KsResult};
pub use lad::{fit_lad, fit_lad_with, lad_objective, LadFit, LadSolver, DELTA, EXACT_MAX_ROWS};
pub use lognormal::{fit_lognormal, lognormal_ks, lognormal_pdf, LognormalFit, Z_95};
pub use permutation::{permutation_test_beta2, permute_binned, PermutationTest, BIN_WIDTH, MIN_PERMUTATIONS};
