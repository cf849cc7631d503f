use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid masses: {0}")]
    InvalidMass(String),

    /// Two bodies coincide or sit at antipodal points.
    #[error("degenerate shape: bodies {i} and {j} have cos(sigma) = {cos}")]
    DegenerateShape { i: usize, j: usize, cos: f64 },

    #[error("inconsistent shape: {0}")]
    InconsistentShape(String),

    #[error("potential evaluated outside its domain at cos(sigma) = {0}")]
    Domain(f64),

    #[error("normalization factor vanishes: all bodies lie in the plane orthogonal to the axis")]
    ZeroNorm,

    #[error("invalid eigenpair: {0}")]
    InvalidEigenpair(String),

    #[error("discriminant D = {0:e} is degenerate")]
    DegenerateD(f64),

    #[error("not a relative equilibrium: {reason} (residual {residual:e})")]
    NotAnRE { reason: String, residual: f64 },

    #[error("excluded shape: {0}")]
    ExcludedShape(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("out of branch: {0}")]
    OutOfBranch(String),

    #[error("no Lagrange relative equilibrium exists for a repulsive potential")]
    RepulsiveNoLRE,

    #[error("integration blew up at t = {t}: bodies {i} and {j} reached cos(sigma) = {cos}")]
    BlowUp {
        t: f64,
        i: usize,
        j: usize,
        cos: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn not_an_re(reason: impl Into<String>, residual: f64) -> Self {
        Error::NotAnRE {
            reason: reason.into(),
            residual,
        }
    }
}
