use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("modularity undefined: graph has no edges")]
    EmptyGraph,
    #[error("partition does not cover node `{0}`")]
    UncoveredNode(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("at least {required} vectors required, found {found}")]
    TooFewVectors { required: usize, found: usize },
    #[error("covariance product has eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),
    #[error("degenerate emotion mass: all confidences sum to zero")]
    DegenerateEmotionMass,
    #[error("invalid emotion vector: {0}")]
    InvalidEmotion(String),
    #[error("invalid score: {0}")]
    InvalidScore(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cohen's kappa undefined: expected agreement is 1")]
    KappaUndefined,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("community `{community}` has {found} documents, at least {required} required")]
    CommunityTooSmall {
        community: String,
        found: usize,
        required: usize,
    },
    #[error("at least two communities are required, found {0}")]
    TooFewCommunities(usize),
    #[error("no votes for item {0}")]
    NoVotes(String),
    #[error("missing required items: {}", .0.join(", "))]
    MissingItems(Vec<String>),
    #[error("vote `{vote}` is not an option of item {item}")]
    InvalidVote { item: String, vote: String },
    #[error("document `{id}` belongs to `{found}`, not `{expected}`")]
    ForeignDocument {
        id: String,
        expected: String,
        found: String,
    },
    #[error("document `{0}` has no perplexity score")]
    Unscored(String),
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
