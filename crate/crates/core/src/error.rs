use std::path::PathBuf;

use crate::harness::JointId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("marginal plant: gamma2 is zero, DC gain undefined")]
    MarginalPlant,

    #[error("unstable compensator denominator: k3 = {k3} must be positive (4*xi*wn must exceed gamma1)")]
    UnstableCompensator { k3: f64 },

    #[error("wrong gain count: expected {expected}, got {got}")]
    GainCount { expected: usize, got: usize },

    #[error("non-positive duration {0}")]
    InvalidDuration(f64),

    #[error("timestamps must be strictly increasing (sample {index})")]
    NonMonotoneTimestamps { index: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("unreachable: |z| = {z} exceeds arm length {arm}")]
    Unreachable { z: f64, arm: f64 },

    #[error("singular (gimbal) configuration: x = y = 0")]
    Singular,

    #[error("insufficient excitation: regressor is rank deficient")]
    InsufficientExcitation,

    #[error("Tustin singularity: discrete pole at z = -1")]
    TustinSingularity,

    #[error("identified discrete model is not stable (spectral radius {0})")]
    UnstableModel(f64),

    #[error("undefined fit: reference sequence is constant")]
    UndefinedFit,

    #[error("joint {joint}: {source}")]
    Joint {
        joint: JointId,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_joint(self, joint: JointId) -> Self {
        Error::Joint {
            joint,
            source: Box::new(self),
        }
    }
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
