use thiserror::Error;

use crate::shooting::ShootTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// An interior nodal value fell below the positivity floor where the
    /// singular term has to be evaluated.
    #[error("singular gradient: u[{node}] = {value:e} is below the positivity floor")]
    SingularGradient { node: usize, value: f64 },

    #[error("function vanishes identically")]
    ZeroFunction,

    #[error("invalid fibering scale t = {0} (must be > 0)")]
    InvalidScale(f64),

    #[error("profile is not in W: A = {grad_p:e} >= lambda*B = {lambda_mass:e}")]
    NotInW { grad_p: f64, lambda_mass: f64 },

    #[error("lambda = {lambda} is not above the discrete first eigenvalue {lambda1}")]
    OutsideWindow { lambda: f64, lambda1: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no sign change of rho(d) - R over the bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("linear problem (gamma = 0): the boundary-value problem is degenerate in d")]
    DegenerateLinear,

    #[error("integration stalled at r = {r:e}")]
    IntegrationStall { r: f64, trace: Box<ShootTrace> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::SingularGradient { .. } => "SingularGradient",
            Error::ZeroFunction => "ZeroFunction",
            Error::InvalidScale(_) => "InvalidScale",
            Error::NotInW { .. } => "NotInW",
            Error::OutsideWindow { .. } => "OutsideWindow",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NoBracket { .. } => "NoBracket",
            Error::DegenerateLinear => "DegenerateLinear",
            Error::IntegrationStall { .. } => "IntegrationStall",
            Error::Io(_) => "Io",
        }
    }
}
