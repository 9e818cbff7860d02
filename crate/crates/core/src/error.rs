use thiserror::Error;

/// Errors surfaced by geometry construction, solvers, and integration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid body pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("{0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("configuration lies on the collision locus")]
    OnCollisionLocus,

    #[error("normal vector has length {norm:.17}; expected unit length to within {tol:.1e}")]
    NotUnitNormal { norm: f64, tol: f64 },

    #[error("cone has empty interior (hull margin {margin:.3e})")]
    DegenerateCone { margin: f64 },

    #[error("point lies outside the cone (worst constraint value {violation:.3e})")]
    OutsideCone { violation: f64 },

    #[error("hyperplanes {0} and {1} coincide")]
    CoincidentHyperplanes(usize, usize),

    #[error("lift rule produced coincident hyperplanes for subspaces {0} and {1}")]
    DegenerateLift(usize, usize),

    #[error("{count} hyperplanes exceed the chamber enumeration cap of {max}")]
    TooManyHyperplanes { count: usize, max: usize },

    #[error("solver did not converge: {message} (residual {residual:.3e})")]
    Solver { message: String, residual: f64 },

    #[error("path touches the collision locus; integrand is singular there")]
    SingularPath,

    #[error("root bracketing failed: {0}")]
    RootFind(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for input/validation problems,
    /// 3 for solver or root-finding failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver { .. } | Error::RootFind(_) => 3,
            _ => 2,
        }
    }
}
