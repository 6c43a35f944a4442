use thiserror::Error;

/// Errors raised by the geometry, solver and driver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate metric: sqrt(a) = {sqrt_a:e} < {threshold:e} at x = ({x1}, {x2})")]
    DegenerateMetric {
        sqrt_a: f64,
        threshold: f64,
        x1: f64,
        x2: f64,
    },
    #[error("degenerate wrinkled metric: |a1 ^ a2| = {norm:e} at x = ({x1}, {x2}), eps = {eps}")]
    DegenerateWrinkledMetric { norm: f64, x1: f64, x2: f64, eps: f64 },
    #[error("derivative order {0} exceeds the supported maximum of 3")]
    OrderTooHigh(usize),
    #[error("Lame constants must be positive (lambda = {lambda}, mu = {mu})")]
    NonPositiveLame { lambda: f64, mu: f64 },
    #[error("cell truncation must be at least 1 (got {0})")]
    TruncationTooSmall(usize),
    #[error("{module}: matrix is not symmetric positive definite ({detail})")]
    NotSpd { module: &'static str, detail: String },
    #[error("quadrature under-resolved: {points_per_period:.2} points per wrinkle period, need >= {required}")]
    QuadratureUnderresolved { points_per_period: f64, required: usize },
    #[error("singular coupled system: {0}")]
    SingularSystem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Name of the module that raised the error, for the CLI diagnostic line.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DegenerateMetric { .. } | Error::NonPositiveLame { .. } => "surface_geometry",
            Error::DegenerateWrinkledMetric { .. } | Error::OrderTooHigh(_) => "wrinkle_geometry",
            Error::TruncationTooSmall(_) => "cell_solver",
            Error::NotSpd { module, .. } => module,
            Error::SingularSystem(_) | Error::QuadratureUnderresolved { .. } => "macro_solver",
            Error::InvalidConfig(_) => "cli",
            Error::InvalidArgument(_) => "core",
        }
    }
}
