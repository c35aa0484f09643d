//! Dense truncated tensor algebra, path signatures, and the identities that
//! make them a group: Chen products, exp/log, the antipode, homogeneous
//! norms, p-variation metrics, iterated integrals of signature paths, and
//! the tree metric induced by heighted posets.
//!
//! Everything is desk-scale and exhaustively checkable: operations are pure
//! functions over immutable values, and each algebraic identity in the
//! library has a test that verifies it numerically (often against an
//! independent brute-force or quadrature oracle).

pub mod error;
pub mod hmap;
pub mod path;
pub mod pvar;
pub mod rtree;
pub mod sample;
pub mod tensor;
pub mod words;

pub use error::{Error, Result};
pub use hmap::{
    assemble_j_level, check_j_group_like, f_apply, h_map, iterated_integral_oracle, j_signature,
    outer_block, pack_w_level, profiles, w_level_norm, HLevel, WSpacePoint, WTensor,
};
pub use path::{
    signature, tensor_pushforward, Control, LinearMap, PiecewiseLinearPath, SignaturePath, TimeMap,
};
pub use pvar::{interpolation_bound, p_var_distance, p_variation, Grid, InterpolationBound};
pub use rtree::{
    CertifiedPoset, HeightInput, HeightedPoset, MetricScan, ValidationReport, Violation,
};
pub use tensor::{
    group_distance, rel_residual, GroupElement, LieElement, TruncatedTensor, DEFAULT_TOLERANCE,
};
pub use words::{
    coeff, group_like_report, is_group_like, lie_shuffle_report, ordered_shuffles, permute_block,
    shuffle, BlockProfile, Permutation, ShuffleReport, Word,
};
