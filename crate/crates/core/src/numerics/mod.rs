//! Dense small-matrix algebra, finite differences and derivative-free maximizers.

mod matrix;
mod optimize;

pub use matrix::{cofactor, det, det_psd, inverse, log_det_psd, Matrix, Vector, MAX_DIM, RCOND_CUTOFF};
pub use optimize::{
    central_diff, find_local_maxima, golden_section_max, maximize_multivariate, maximize_multivariate_with,
    maximize_scalar, maximize_scalar_with, Interval, SimplexResult, DEFAULT_GOLDEN_TOL, DEFAULT_SEED_GRID,
    DEFAULT_SIMPLEX_MAX_ITER,
};
