use std::path::PathBuf;

/// Errors produced by ingest, map construction, and query evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("zlib decompression failed: {0}")]
    Decompress(String),

    #[error("malformed object: {0}")]
    MalformedObject(String),

    #[error("unknown object kind {0:?}")]
    UnknownKind(String),

    #[error("declared size {declared} does not match payload length {actual}")]
    SizeMismatch { declared: usize, actual: usize },

    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("dangling reference: {kind} {id} referenced by {referrer}")]
    Dangling {
        kind: &'static str,
        id: String,
        referrer: String,
    },

    #[error("duplicate id {id} with conflicting content")]
    ConflictingDuplicate { id: String },

    #[error("commit graph contains a cycle involving {id}")]
    CommitCycle { id: String },

    #[error("invalid {what}: {value:?}")]
    InvalidValue { what: &'static str, value: String },

    #[error("repository {0} has no branch heads")]
    NoHeads(String),

    #[error("head {head} of {project} does not point at a commit")]
    HeadNotCommit { project: String, head: String },

    #[error(
        "repository {0} stores history in packfiles, which are unsupported; \
         export it to the object stream format instead (e.g. via git-cat-file)"
    )]
    PackfileOnly(String),

    #[error("unknown map name {0:?}")]
    UnknownMap(String),

    #[error("unknown project {0:?}")]
    UnknownProject(String),

    #[error("unknown author {0:?}")]
    UnknownAuthor(String),

    #[error("query error at column {col}: {msg}")]
    Query { col: usize, msg: String },

    #[error("field {field:?} is not applicable to {kind} documents")]
    FieldKindMismatch { field: String, kind: &'static str },

    #[error("stars file row {row}: {msg}")]
    StarsRow { row: usize, msg: String },

    #[error("{file}:{line}: malformed shard line")]
    ShardLine { file: PathBuf, line: usize },

    #[error("missing shard file {0}")]
    MissingShard(PathBuf),

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
