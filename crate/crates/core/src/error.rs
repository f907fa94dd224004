use thiserror::Error;

/// Errors produced by model construction, numerical routines, and the
/// extraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The noise model admits no finite density (infinite classical noise).
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// A root solve could not bracket a sign change.
    #[error(
        "bracket failure: no sign change on [{lo}, {hi}] (f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e})"
    )]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A coarse scan found no interior maximum even after widening.
    #[error("scan failure: no interior maximum; scan trace:\n{trace}")]
    ScanFailure { trace: String },

    /// Adaptive quadrature hit its depth limit before reaching the requested
    /// tolerance. `achieved` is the error estimate of the returned value.
    #[error("quadrature did not converge: error estimate {achieved:.3e} > tolerance {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    /// Calibration found no variance excess over the classical noise floor.
    #[error("no quantum clearance: signal-on variance {signal_on:.6e} <= blocked variance {blocked:.6e}")]
    NoQuantumClearance { signal_on: f64, blocked: f64 },

    /// A statistic that needs sample variance was fed a constant sequence.
    #[error("constant input: sample variance is zero")]
    ConstantInput,

    /// The extractor seed does not have the exact required length.
    #[error("seed length mismatch: need {expected} bits, got {got}")]
    SeedLength { expected: usize, got: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
