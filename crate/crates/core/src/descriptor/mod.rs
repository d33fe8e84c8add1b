//! Binary test sets, their projection through a camera model, and
//! extraction of (masked, distorted) BRIEF bit strings.

mod bits;
mod extract;
mod io;
mod project;
mod testset;

pub use bits::BinaryDescriptor;
pub use extract::{Described, ExtractOptions, Extraction, Extractor, Skipped, Variant};
pub use io::{
    decode_descriptors, encode_descriptors, format_test_set, parse_test_set, read_descriptors,
    read_test_set, write_descriptors, write_test_set,
};
pub use project::{apply_tests, project_tests, ProjectedTestSet};
pub use testset::{rotate_tests, TestPair, TestSet};

pub(crate) use project::project_offsets;
pub(crate) use testset::rotate;
