use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("bare modes are degenerate (|omega_c - omega_a| = {separation:e} GHz); mixing angle is ill-defined")]
    DegenerateModes { separation: f64 },

    #[error("fock buffer of {buffer} states too small: truncated block moved by {deviation:e}")]
    FockBufferTooSmall { buffer: usize, deviation: f64 },

    #[error("Hilbert space of dimension {dim} exceeds the configured cap of {cap}; reduce D, d_a or d_c")]
    MemoryGuard { dim: usize, cap: usize },

    #[error("branch {j} is labeled only up to {len} photons; {needed} needed")]
    BranchTruncated { j: usize, len: usize, needed: usize },

    #[error("harmonic drive amplitude eta = {0} is outside the modelled regime (eta <= 50)")]
    DriveTooStrong(f64),

    #[error("integrator needs at least 64 steps per period, got {0}")]
    TooFewSteps(usize),

    #[error("pointer-state discs for states {0} and {1} overlap")]
    OverlappingThresholds(usize, usize),

    #[error("calibration input inconsistent: {0}")]
    Calibration(String),

    #[error("fit did not converge from any start (best cost {best_cost:e})")]
    FitFailed {
        best_cost: f64,
        best: Box<crate::fitting::FitResult>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parameter file error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
