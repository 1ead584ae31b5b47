use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a star network needs at least 2 branches, got {0}")]
    TooFewBranches(usize),
    #[error("nonpositive speed c = {value} on branch {branch}")]
    NonPositiveSpeed { branch: usize, value: f64 },
    #[error("negative potential a = {value} on branch {branch}")]
    NegativePotential { branch: usize, value: f64 },
    #[error("non-finite parameter on branch {0}")]
    NonFinite(usize),
    #[error("branch index {branch} out of range for a network with {n} branches")]
    BranchOutOfRange { branch: usize, n: usize },
    #[error("invalid point: x = {0} (must be finite and >= 0)")]
    InvalidPoint(f64),
    #[error("lambda = {0} lies on a band edge")]
    BandEdge(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("grid mismatch")]
    GridMismatch,
    #[error("node samples disagree across branches (spread {0:e})")]
    InconsistentNode(f64),
    #[error("mixing coefficient s_{0} unavailable at its band edge")]
    MixingUnavailable(usize),
    #[error("Wronskian vanishes at lambda = {0}")]
    SingularWronskian(f64),
    #[error("invalid spectral cutoff {cutoff} (must exceed {top_edge})")]
    InvalidCutoff { cutoff: f64, top_edge: f64 },
    #[error("spectral cutoff unresolved: dx * Re xi(cutoff) = {0} >= 0.5")]
    CutoffUnresolved(f64),
    #[error("f too rough for requested tolerance")]
    TooRough,
    #[error("invalid band ({0}, {1})")]
    InvalidBand(f64, f64),
    #[error("CFL condition violated: {0}")]
    Cfl(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("rank deficient system: rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("matrix is singular or ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("no admissible anchor set after {0} attempts")]
    AnchorFailure(usize),
}
