//! Parsing of git object data: loose objects, commit and tree payloads,
//! blob statistics, whole-repository scans, and the portable object
//! stream format.

mod loose;
mod repo;
mod stream;

pub use loose::{blob_stats, parse_commit, parse_loose_object, parse_tree, ObjectKind};
pub use repo::scan_repository;
pub use stream::{read_object_stream, write_object_stream};
