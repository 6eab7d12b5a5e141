use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty mixture: both clouds are empty")]
    EmptyMixture,

    #[error("out of domain: point ({x}, {y}) lies outside the grid")]
    OutOfDomain { x: f64, y: f64 },

    #[error("degenerate kernel: disk radius must be positive (use the point-mass branch)")]
    DegenerateKernel,

    #[error("augmentation leaves domain: disk of radius {radius} around ({x}, {y}) exits the grid; enlarge the grid")]
    AugmentationLeavesDomain { x: f64, y: f64, radius: f64 },

    #[error("zero degree at node {0}")]
    ZeroDegree(usize),

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("k too large for graph: k + 1 = {k_plus_1} exceeds node count {nodes}")]
    KTooLarge { k_plus_1: usize, nodes: usize },

    #[error("vacuous bound: λ_{{k+1}} = {0} (must be positive)")]
    VacuousBound(f64),

    #[error("empty subgraph")]
    EmptySubgraph,

    #[error("atom set mismatch between distributions")]
    AtomMismatch,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("graph too large for dense representation: {nodes} nodes exceeds cap {cap}")]
    TooLarge { nodes: usize, cap: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
