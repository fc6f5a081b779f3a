//! Feature-stability evaluation: synthetic transforms, dense SIFT, ratio-test
//! matching and per-image metric rows.

pub mod evaluate;
pub mod matching;
pub mod sift;
pub mod transform;

pub use evaluate::{
    assemble_rows, count_matches, evaluate_baseline, evaluate_method, evaluate_method_keep,
    evaluate_pair,
    relative_change, Cell, EvalRow, FeatureParams, MethodLabel, RowStatus,
};
pub use matching::{match_descriptor_slices, match_descriptors, Match, MatchSet, DEFAULT_RATIO};
pub use sift::{dense_sift, dense_sift_masked, grid_dims, Descriptor, DescriptorSet, DESCRIPTOR_LEN};
pub use transform::{apply_transform, apply_transform_masked, Transform, Transformed};
