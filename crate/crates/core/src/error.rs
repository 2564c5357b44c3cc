use thiserror::Error;

/// Errors surfaced by the geometry and solver kernels.
#[derive(Debug, Error)]
pub enum FinslerError {
    #[error("tangent vector must be nonzero for metric-tensor operations")]
    ZeroVector,

    #[error("point {0:?} lies outside the chart domain")]
    OutOfDomain(Vec<f64>),

    #[error("metric is not positive at x = {x:?}: {detail}")]
    MetricNotPositive { x: Vec<f64>, detail: String },

    #[error("fundamental tensor is not positive definite at (x, y) = ({x:?}, {y:?}); eigenvalues {eigenvalues:?}")]
    NotPositiveDefinite {
        x: Vec<f64>,
        y: Vec<f64>,
        eigenvalues: Vec<f64>,
    },

    #[error("Legendre solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    LegendreDiverged { iterations: usize, residual: f64 },

    #[error("finite-difference stencil leaves the open-box domain near x = {0:?}")]
    StencilOutOfDomain(Vec<f64>),

    #[error("matrix is singular or not SPD (Cholesky pivot {pivot} = {value:.3e})")]
    SingularMatrix { pivot: usize, value: f64 },

    #[error("geodesic left the open-box domain at t = {t:.6}")]
    GeodesicLeftDomain { t: f64 },

    #[error("distance shooting failed to converge: endpoint mismatch {mismatch:.3e} after {starts} starts")]
    ShootingFailed { mismatch: f64, starts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Legendre solve failed at grid node {node}: {source}")]
    NodeLegendre {
        node: usize,
        #[source]
        source: Box<FinslerError>,
    },

    #[error("gradient mask is empty (field has no nonzero-gradient nodes)")]
    EmptyMask,

    #[error("solver did not reach residual {target:.3e} in {steps} steps (best {best:.3e})")]
    SolverNotConverged { target: f64, steps: usize, best: f64 },

    #[error("time step underflowed during backtracking (dt = {dt:.3e})")]
    TimeStepUnderflow { dt: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FinslerError>;
