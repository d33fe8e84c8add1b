//! Offline selection of high-variance, decorrelated tests from a patch
//! corpus, and online per-keypoint stability masks.

mod candidates;
mod corpus;
mod mask;
mod select;
mod variance;

pub use candidates::enumerate_candidate_tests;
pub use corpus::{read_corpus, write_corpus, CorpusPatch, PatchCorpus, MANIFEST_NAME};
pub use mask::{learn_mask, LearnedMask, MaskConfig};
pub use select::{correlation, greedy_select, variance_order, Selection, SelectionPass};
pub use variance::{compute_variances, LearnOptions, TestStats};
