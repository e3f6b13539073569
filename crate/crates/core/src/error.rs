use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("position z = {z} lies outside the box [-{half}, {half}]")]
    Domain { z: f64, half: f64 },

    #[error("quadrature for {what} reached error {achieved:.3e}, tolerance {tolerance:.3e}")]
    Quadrature {
        what: String,
        achieved: f64,
        tolerance: f64,
    },

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("spectral gap closed: smallest |E| = {min_abs:.3e}, vacuum is ill-defined")]
    GapClosed { min_abs: f64 },

    #[error("mode set is incomplete: {have} modes, basis dimension {need}")]
    IncompleteModeSet { have: usize, need: usize },

    #[error("split distance {epsilon:.4e} is below the resolvable minimum {minimum:.4e}")]
    EpsilonTooSmall { epsilon: f64, minimum: f64 },

    #[error("integration window violated: {0}")]
    Window(String),

    #[error("unsupported regime: eta = {eta} must be strictly below m = {m}")]
    UnsupportedRegime { eta: f64, m: f64 },

    #[error("step size underflow at z = {z}")]
    StepUnderflow { z: f64 },

    #[error("time step {dt} exceeds the bound {max:.4e}")]
    TimeStep { dt: f64, max: f64 },

    #[error("linear solve did not converge (residual {residual:.3e})")]
    LinearSolve { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}
