use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("bad partition: {0}")]
    BadPartition(String),

    #[error("branch {piece} is not a contraction: |slope| = {slope} >= 1")]
    NonContracting { piece: usize, slope: String },

    #[error("branch {piece} maps its piece outside the domain: image [{lo}, {hi}]")]
    EscapesDomain { piece: usize, lo: String, hi: String },

    #[error("bad contraction rate: {0}")]
    BadLambda(String),

    #[error("start point {0} lies on the boundary set")]
    StartOnDelta(String),

    #[error("start point {0} lies outside the domain")]
    OutsideDomain(String),

    #[error("atom count {count} exceeds the cap {cap} at generation {generation}")]
    DepthBudgetExceeded {
        generation: usize,
        count: usize,
        cap: usize,
    },

    #[error("word of length {len} is too short: need at least {needed}")]
    WordTooShort { len: usize, needed: usize },

    #[error("witnessed order data is not a partial order: {0}")]
    OrderViolation(String),

    #[error("bound violated on a fully determined decomposition: {0}")]
    BoundViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
