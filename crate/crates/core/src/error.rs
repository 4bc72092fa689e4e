use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants follow the failure modes of the individual operations; the CLI
/// maps [`Error::NonConvergence`] to exit code 3, [`Error::UnknownSystem`] to
/// exit code 1 and everything else to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("matrix sequence is not degenerating (largest norm {largest_norm:.3e})")]
    NotDegenerating { largest_norm: f64 },
    #[error("distortion undefined: {0}")]
    DistortionUndefined(String),
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("involution is neither free nor has isolated fixed fibers")]
    NotFreeAndNotIsolated,
    #[error("algebra carries no almost complex structure")]
    MissingComplexStructure,
    #[error("Jacobi identity fails on (e{0}, e{1}, e{2})")]
    JacobiViolation(usize, usize, usize),
    #[error("matrix does not preserve the lattice: {0}")]
    NotLatticePreserving(String),
    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("twist maps the base lattice outside the fiber lattice: {0}")]
    IncompatibleTwist(String),
    #[error("sections have a common zero: {0}")]
    CommonZero(String),
    #[error("{operation} is not supported for {kind}")]
    UnsupportedKind { operation: &'static str, kind: String },
    #[error("points are not related as required: {0}")]
    Relation(String),
    #[error("no convergence after {iterations} iterations (last increment {last:.3e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error("catalog error: {0}")]
    Catalog(String),
}

pub type Result<T> = std::result::Result<T, Error>;
