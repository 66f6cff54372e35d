use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {axis} is zero but carries a negative exponent")]
    ZeroToNegativePower { axis: usize },
    #[error("kernel undefined: |x_{axis}||y_{axis}| = {product} >= 1")]
    KernelUndefined { axis: usize, product: f64 },
    #[error("point is not strictly inside the unit polydisc")]
    OutsidePolydisc,
    #[error("grid resolution {found} too small (need at least {needed})")]
    UnderResolvedGrid { needed: usize, found: usize },
    #[error("weight coefficients are not Hermitian-symmetric")]
    NotHermitianSymmetric,
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("Gram matrix is singular or indefinite")]
    Indefinite,
    #[error("Gram matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("polynomial has negative exponents")]
    NotAnalytic,
    #[error("polynomial is not certified zero-free: {0}")]
    NotCertified(String),
    #[error("node list does not match the kernel gram nodes")]
    NodeMismatch,
    #[error("nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("nonpositive sample {value} at index {index}")]
    NonPositiveSample { index: usize, value: f64 },
    #[error("iteration budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("certification inconclusive: {0}")]
    Inconclusive(String),
    #[error("boundary verification failed: sup |F| = {0} > 1")]
    BoundaryVerification(f64),
    #[error("kernel gram is rank deficient")]
    RankDeficient,
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroToNegativePower { .. } => "zero_to_negative_power",
            Error::KernelUndefined { .. } => "kernel_undefined",
            Error::OutsidePolydisc => "outside_polydisc",
            Error::UnderResolvedGrid { .. } => "under_resolved_grid",
            Error::NotHermitianSymmetric => "not_hermitian_symmetric",
            Error::NotHermitian(_) => "not_hermitian",
            Error::Indefinite => "indefinite",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::NotAnalytic => "not_analytic",
            Error::NotCertified(_) => "not_certified",
            Error::NodeMismatch => "node_mismatch",
            Error::DuplicateNodes(..) => "duplicate_nodes",
            Error::InvalidData(_) => "invalid_data",
            Error::NonPositiveSample { .. } => "nonpositive_sample",
            Error::BudgetExhausted(_) => "budget_exhausted",
            Error::Inconclusive(_) => "inconclusive",
            Error::BoundaryVerification(_) => "boundary_verification",
            Error::RankDeficient => "rank_deficient",
            Error::Degenerate(_) => "degenerate",
            Error::SolverFailure(_) => "solver_failure",
        }
    }
}
