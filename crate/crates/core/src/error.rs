use thiserror::Error;

/// Errors surfaced by the simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("photon number {photons} exceeds the Fock truncation n_max = {n_max}")]
    Truncation { photons: usize, n_max: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("cot ν is singular at ν = {nu} (sin ν too small)")]
    SingularAngle { nu: f64 },

    #[error("eigenvalue {requested} is not in the Zeno spectrum {available:?}")]
    EigenvalueNotPresent { requested: f64, available: Vec<f64> },

    #[error("integration failed at t = {t}: {what} drifted to {value:.3e} (limit {limit:.1e})")]
    IntegrationFailure { t: f64, what: &'static str, value: f64, limit: f64 },

    #[error("dt = {dt} does not divide the time span {span} evenly")]
    UnevenStep { dt: f64, span: f64 },

    #[error("input amplitudes are not normalized: Σ|α|² = {norm_sq}")]
    UnnormalizedInput { norm_sq: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "sign calibration failed: best gate fidelity {best:.6} < 0.99; \
         all candidates (target-leg signs, fidelity): {report}"
    )]
    CalibrationFailure { best: f64, report: String },
}

pub type Result<T> = std::result::Result<T, Error>;
