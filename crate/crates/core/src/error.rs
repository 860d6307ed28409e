use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree {0} is not supported (expected 1..={max})", max = crate::sbp::MAX_DEGREE)]
    InvalidDegree(usize),

    #[error("degenerate element [{left}, {right}]")]
    DegenerateElement { left: f64, right: f64 },

    #[error("mesh needs at least 2 elements, got {0}")]
    TooFewElements(usize),

    #[error("element boundaries must be finite and strictly increasing")]
    NonMonotoneBoundaries,

    #[error("relaxation time must be positive, got {0}")]
    InvalidRelaxationTime(f64),

    #[error("empty domain ({min}, {max})")]
    EmptyDomain { min: f64, max: f64 },

    #[error("Dirichlet boundary data is missing for direction {0}")]
    MissingBoundaryData(usize),

    #[error("field shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("unknown setup id {0} (expected 1..=4)")]
    UnknownSetup(u32),

    #[error("CG did not converge within {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("iteration diverged (non-finite value at step {0})")]
    Diverged(usize),

    #[error("pseudo-time marching did not reach steady state after {steps} steps (residual {residual:e})")]
    NotSteady { steps: usize, residual: f64 },

    #[error("dense system is singular")]
    SingularMatrix,

    #[error("{0}")]
    InvalidConfig(String),

    #[error("level N={n} failed")]
    Level {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
