use std::path::PathBuf;

/// Errors surfaced by the SLAM pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A kinematic evaluation hit a (near-)singular steering configuration.
    #[error("singular kinematics: |1 - tan(omega)*H/L| = {denom:.3e} below 1e-6")]
    SingularKinematics { denom: f64 },

    /// A covariance parameterization is not positive semi-definite.
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    /// Measurement prediction for a point coincident with the sensor origin.
    #[error("degenerate geometry: point within {0:.3e} m of the sensor origin")]
    DegenerateGeometry(f64),

    /// A likelihood evaluation needs an invertible noise covariance.
    #[error("singular measurement covariance")]
    SingularCovariance,

    /// Map operations need at least one point.
    #[error("operation on an empty map")]
    EmptyMap,

    /// The map has no probability mass left to normalize.
    #[error("zero total probability mass")]
    ZeroMass,

    /// The measurement marginal underflowed: the filter has diverged.
    #[error("beam marginal underflow ({0:.3e}): filter divergence")]
    MarginalUnderflow(f64),

    /// Every particle's weight underflowed at the given step.
    #[error("all particles diverged at step {step}")]
    AllParticlesDiverged { step: usize },

    /// A simulated path left the world bounds.
    #[error("simulated path exits world bounds at step {step}: ({x:.2}, {y:.2})")]
    PathOutOfBounds { step: usize, x: f64, y: f64 },

    /// A log or CSV file failed to parse.
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// A configuration value failed validation. `field` is the dotted key.
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Two time series have no overlapping time range.
    #[error("no overlapping time range between estimate and reference")]
    NoTimeOverlap,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
