use thiserror::Error;

/// Errors raised by the pencil, DAE, solver and analysis layers.
///
/// Numerical quantities are carried as `f64` so the type stays independent of
/// the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("pencil is numerically singular at lambda = {re:e}{im:+e}i (rcond {rcond:e})")]
    SingularPencilPoint { re: f64, im: f64, rcond: f64 },
    #[error("pencil is not regular at t = {t}")]
    NotRegular { t: f64 },
    #[error("index fit is ambiguous at t = {t}: slope {slope:.3}")]
    IndeterminateIndex { t: f64, slope: f64 },
    #[error("index {index} at t = {t} exceeds 1")]
    IndexTooHigh { t: f64, index: usize },
    #[error("no contour radius encloses the finite spectrum at t = {t}")]
    RadiusSelectionFailed { t: f64 },
    #[error("contour quadrature did not stabilize within {max_nodes} nodes at t = {t}")]
    QuadratureDiverged { t: f64, max_nodes: usize },
    #[error("quadrature projector has imaginary residue {imag:e} at t = {t}")]
    NonRealProjector { t: f64, imag: f64 },
    #[error("projector identities violated by {defect:e} at t = {t}")]
    DefectTooLarge { t: f64, defect: f64 },
    #[error("projector derivative requested but not computed at t = {t}")]
    MissingProjectorDerivative { t: f64 },
    #[error("Newton matrix is singular at t = {t} (rcond {rcond:e})")]
    SingularNewtonMatrix { t: f64, rcond: f64 },
    #[error("state is no longer finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("consistent initialization did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("trajectory did not complete")]
    IncompleteTrajectory,
    #[error("trajectory meshes are not nested")]
    MeshMismatch,
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Innermost error, with any step wrapper removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
