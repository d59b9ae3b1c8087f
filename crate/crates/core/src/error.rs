use thiserror::Error;

use crate::units::Dimension;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot convert {from:?} quantity to {to:?}")]
    IncompatibleDimension { from: Dimension, to: Dimension },

    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "grid too coarse: requested level at {level_energy:.6e} Eh above the potential minimum \
         exceeds half the kinetic cutoff {cutoff:.6e} Eh"
    )]
    GridTooCoarse { level_energy: f64, cutoff: f64 },

    #[error("requested {requested} states but the grid only holds {available}")]
    TooManyStates { requested: usize, available: usize },

    #[error("R = {r} a0 outside tabulated range [{min}, {max}]")]
    OutOfRange { r: f64, min: f64, max: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "spectral range exceeded: Hamiltonian needs [{needed_min:.6e}, {needed_max:.6e}] Eh \
         but the propagator scales to [{min:.6e}, {max:.6e}] Eh"
    )]
    SpectralRangeExceeded {
        needed_min: f64,
        needed_max: f64,
        min: f64,
        max: f64,
    },

    #[error("norm drifted to {norm:.12} at t = {time:.6e} au")]
    NormDrift { norm: f64, time: f64 },

    #[error("vibronic basis of {size} levels exceeds the dense oracle limit of {limit}")]
    BasisTooLarge { size: usize, limit: usize },

    #[error("density matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("insufficient snapshots: {0}")]
    InsufficientSnapshots(String),

    #[error("series is not uniformly sampled: {0}")]
    NonuniformSampling(String),

    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigKey { key: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn key(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigKey {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for failures caused by the configuration rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. }
                | Error::ConfigKey { .. }
                | Error::UnknownUnit(_)
                | Error::IncompatibleDimension { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidPotential(_)
                | Error::InvalidPulse(_)
        )
    }
}
