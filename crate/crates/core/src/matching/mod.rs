//! Descriptor matching and verification scoring.
//!
//! Descriptors come from an external extractor as CSV. The chain is:
//! optional RootSIFT, nearest-neighbour or ratio-test matching, optional
//! mutual-best filtering, optional RANSAC, a per-template score, and
//! max-fusion across templates. Genuine and impostor scores feed the EER.

pub mod descriptors;
pub mod eer;
pub mod matcher;
pub mod protocol;
pub mod ransac;
pub mod score;

pub use descriptors::{filter_keypoints, load_descriptors, parse_descriptors, root_sift, save_descriptors, Descriptor, DescriptorSet};
pub use eer::{compute_eer, CurvePoint, EerResult, ScoreSet};
pub use matcher::{bidirectional, match_ed, match_knn_rt, MatchPair};
pub use protocol::{eval_protocol, load_pairs, parse_pairs, run_comparisons, ChainConfig, Comparison, Label, MatcherKind, ProtocolOutcome};
pub use ransac::{ransac_filter, RansacConfig, Similarity};
pub use score::{similarity_score, template_score, ScoreMode};
