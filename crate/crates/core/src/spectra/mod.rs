//! Finite-dimensional numerics for multiplication operators on the
//! middle-thirds Cantor measure.
//!
//! The measure is the invariant measure of `x/3` and `(x+2)/3` with weights
//! one half. In the basis of normalized depth-`d` cylinder indicators,
//! multiplication by an affine map is diagonal with the cylinder
//! conditional means on the diagonal.

mod cantor;
mod srt;

pub use cantor::{cantor_cf, cantor_moments, cylinder_means, lebesgue_cf, wiener_average};
pub use srt::{
    density_pipeline, identity, inflate, interleave_approx, interleave_distance, interleave_target,
    max_matrix_size, mult_op, smear, srt_dist, AffineMap, Resolvents, TruncatedOp, MAX_N_VAR,
};
