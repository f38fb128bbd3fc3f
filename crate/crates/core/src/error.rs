use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Gamma pole at z = {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel obstruction: {0}")]
    KernelObstruction(String),

    #[error("invalid sigma {sigma} for n = {n}: within {guard:e} of a Gamma pole at n/2 + m")]
    InvalidSigma { n: u32, sigma: f64, guard: f64 },

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("inexact polynomial division: {0}")]
    InexactDivision(String),

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("coefficient bit length {bits} exceeds the configured cap {cap}")]
    BitCap { bits: u64, cap: u64 },

    #[error("failed to converge: {0}")]
    Convergence(String),

    #[error("divergence detected: {0}")]
    Divergence(String),

    #[error("point outside the chart: {0}")]
    ChartExit(String),

    #[error("invalid surface: {0}")]
    Surface(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of an iterative numerical procedure, as opposed to
    /// invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_) | Error::Divergence(_) | Error::ChartExit(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pole(_) => "pole",
            Error::Domain(_) => "domain",
            Error::KernelObstruction(_) => "kernel_obstruction",
            Error::InvalidSigma { .. } => "invalid_sigma",
            Error::SingularPoint(_) => "singular_point",
            Error::InexactDivision(_) => "inexact_division",
            Error::DegreeCap { .. } => "degree_cap",
            Error::BitCap { .. } => "bit_cap",
            Error::Convergence(_) => "convergence",
            Error::Divergence(_) => "divergence",
            Error::ChartExit(_) => "chart_exit",
            Error::Surface(_) => "surface",
            Error::Json(_) => "json",
        }
    }
}
