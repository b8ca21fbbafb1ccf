use thiserror::Error;

/// Every failure the kernel can report. Variants map onto the error names used
/// by the CLI reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("segment runs along the region boundary over positive length")]
    DegenerateCrossing,
    #[error("segment tangent to slicing sphere (center distance {0})")]
    TangencyError(f64),
    #[error("domain is not convex")]
    NonConvexDomain,
    #[error("oracle input too large: {0} points")]
    TooLarge(usize),
    #[error("no feasible radius for center {center}")]
    Infeasible { center: usize },
    #[error("merged radius sum {total} exceeds budget {budget}")]
    BudgetExceeded { total: f64, budget: f64 },
    #[error("vertices do not share a cell")]
    NotInCommonCell,
    #[error("family is not {eps}-fine: flat distance {found} on cell {cell}")]
    NotFine { eps: f64, found: f64, cell: String },
    #[error("delta {delta} too large (limit {limit})")]
    DeltaTooLarge { delta: f64, limit: f64 },
    #[error("unsupported dimension: {0}")]
    DimUnsupported(String),
    #[error("boundary of filling does not match the endpoint cycles")]
    BoundaryMismatch,
    #[error("odd parity at vertex {0}")]
    OddParity(String),
    #[error("missing localization certificate for cell {0}")]
    CertMissing(String),
    #[error("no generic point after {0} samples")]
    ExhaustedSamples(usize),
    #[error("ray through point is tangent to the sphere")]
    TangentRay,
    #[error("push center degenerate in cell {0}")]
    DegenerateCenter(String),
    #[error("no avoiding hyperplane found")]
    NotFound,
    #[error("family is not contractible: {0}")]
    NotContractible(String),
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("{0}: {1}")]
    Task(String, Box<Error>),
}

impl Error {
    /// The underlying error, past any task context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Task(_, e) => e.root(),
            e => e,
        }
    }

    /// Whether the error comes from an invalid configuration or input rather
    /// than a failed check.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::BadSpec(_) | Error::DimUnsupported(_) | Error::DeltaTooLarge { .. } | Error::NotFine { .. } | Error::NonConvexDomain | Error::TooLarge(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
