use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulator kernels.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used
/// for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("tridiagonal eigendecomposition did not converge (non-finite matrix entries?)")]
    EigenFailure,

    #[error("no resonant bath mode: sigma0 = {sigma0} is not strictly inside the band (-{band_edge}, {band_edge})")]
    OutsideBand { sigma0: f64, band_edge: f64 },

    #[error("pole equation did not converge: residual {residual:e}")]
    RootNotConverged { residual: f64 },

    #[error("|S00| = {value} at sample {index} exceeds 1; the upstream propagation is not unitary")]
    SurvivalExceedsUnity { value: f64, index: usize },

    #[error("Fock truncation n_max = {n_max} too small: norm deficit {deficit:e}")]
    FockTruncation { n_max: usize, deficit: f64 },

    #[error("closed-form photon statistics need a balanced cat (beta0 = -alpha0); use the density-matrix diagonal instead")]
    UnbalancedCat,

    #[error("photon number {n} is odd; the coherence estimator needs an even n")]
    OddPhotonNumber { n: usize },

    #[error("mixture probability {value:e} is too small to estimate G; pick a more likely photon number")]
    UnusablePhotonNumber { value: f64 },

    #[error("the isolated guide supports no bound mode; increase the peak index contrast")]
    NoBoundMode,

    #[error("transverse window too narrow: {reason}")]
    GridTooNarrow { reason: String },

    #[error("step too large: phase per step {phase:.4} rad exceeds pi/4; use dz <= {max_dz:e}")]
    StepTooLarge { phase: f64, max_dz: f64 },

    #[error("zero index gradient: Bloch oscillations have no finite period")]
    NoBlochPeriod,

    #[error("found {found} revival peaks, at least 2 are required")]
    TooFewPeaks { found: usize },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
