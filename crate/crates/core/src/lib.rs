//! Desk-scale git repository mining: an object catalog over loose objects
//! or a portable object stream, ten key-value base maps between entity
//! types, project/author metadata documents, fork-cluster detection,
//! author-identity merging, and a deterministic criteria-based sampler.

pub mod basemaps;
pub mod error;
pub mod forkcluster;
pub mod identity;
pub mod ingest;
pub mod langclass;
pub mod metadata;
pub mod object;
pub mod sampler;
pub mod shards;
pub mod testutil;

pub use error::{Error, Result};
