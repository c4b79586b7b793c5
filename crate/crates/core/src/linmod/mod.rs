//! Closed-form constructions for the linear model.

mod bands;
mod data;
mod groupwise;

pub use bands::{
    default_grids, f_pivot_jcr, gaussian_pivot_band, intersection_jcr, normal_mean_omega_jcr, one_param_highdim_jcr,
    weighted_t_band, FPivotJcr, IntersectionJcr, Omega, WeightVector,
};
pub use data::{ols_fit, OlsFit, RegressionData};
pub use groupwise::{
    cyclic_shift_jcr, permutation_jcr, two_sample_reduction, CyclicShiftJcr, PermutationJcr, ResidualMap,
    DEFAULT_PERMUTATIONS,
};
