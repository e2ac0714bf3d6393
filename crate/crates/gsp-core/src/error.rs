use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Error, Debug)]
pub enum GspError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid weight {weight} on edge ({src}, {dst}): weights must be finite and nonnegative")]
    InvalidWeight { src: usize, dst: usize, weight: f64 },

    #[error("self-loop on node {node} is not allowed (enable allow_self_loops to permit)")]
    SelfLoop { node: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node {node} has zero strength; {operator} is undefined without the isolated-node policy")]
    IsolatedNode { node: usize, operator: &'static str },

    #[error("random walk is not ergodic: {0}")]
    NonErgodic(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("near-defective operator: eigenvector matrix condition number {cond:.3e} exceeds {max:.1e}")]
    NearDefective { cond: f64, max: f64 },

    #[error("{context} did not converge within {iters} iterations")]
    NonConvergence { context: String, iters: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("eigenvalue {lambda} outside the response domain [{lo}, {hi}]")]
    DomainViolation { lambda: f64, lo: f64, hi: f64 },

    #[error("unstable design: denominator root at {re}{im:+}i lies inside the response domain")]
    UnstableDesign { re: f64, im: f64 },

    #[error("rank-deficient system: numerical rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("singular system in {0}")]
    Singular(String),

    #[error("ill-conditioned system in {context}: condition number {cond:.3e}")]
    IllConditioned { context: String, cond: f64 },

    #[error("graph is not bipartite: odd cycle {cycle:?}")]
    NotBipartite { cycle: Vec<usize> },

    #[error("recursion divergent: pole at {re}{im:+}i violates the spectral-radius condition")]
    DivergentRecursion { re: f64, im: f64 },

    #[error("frame is numerically non-invertible: lower bound {lower:.3e}")]
    FrameNotInvertible { lower: f64 },

    #[error("internal cross-check failed in {context}: residual {residual:.3e}")]
    CheckFailed { context: String, residual: f64 },

    #[error("problem size {n} exceeds the dense-eigendecomposition ceiling {max}")]
    TooLarge { n: usize, max: usize },

    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

pub type Result<T> = std::result::Result<T, GspError>;
