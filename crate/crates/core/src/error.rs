use std::fmt;

use thiserror::Error;

pub type Result<T, E = EmcmError> = std::result::Result<T, E>;

/// Identifies one pole face. Indices are zero-based internally and printed
/// one-based, matching the quadrant (1..4) and pair (1..8) numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoleId {
    RadialInner(usize),
    RadialOuter(usize),
    Pm(usize),
    AxialInner(usize),
    AxialOuter(usize),
}

impl fmt::Display for PoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoleId::RadialInner(j) => write!(f, "inner radial pole {}", j + 1),
            PoleId::RadialOuter(j) => write!(f, "outer radial pole {}", j + 1),
            PoleId::Pm(i) => write!(f, "PM pole {}", i + 1),
            PoleId::AxialInner(i) => write!(f, "inner axial pole {}", i + 1),
            PoleId::AxialOuter(i) => write!(f, "outer axial pole {}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmcmError {
    #[error("schema violation at `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error("rotor-stator contact at {pole}: gap {gap:.4e} m")]
    Contact { pole: PoleId, gap: f64 },

    #[error("non-positive air gap {gap:.4e} m")]
    NonPositiveGap { gap: f64 },

    #[error("amplifier limit on {coil}: {mmf:.1} AT exceeds {limit:.1} AT")]
    AmplifierLimit { coil: String, mmf: f64, limit: f64 },

    #[error("singular {size}x{size} system (condition estimate {condition:.3e})")]
    Singular { size: usize, condition: f64 },

    #[error("regression failed: {0}")]
    Regression(String),

    #[error("calibration did not converge after {iterations} iterations; residuals: {residuals}")]
    NotConverged { iterations: usize, residuals: String },

    #[error("inconsistent flux components: {0}")]
    Consistency(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<EmcmError>,
    },
}

impl EmcmError {
    pub fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        EmcmError::Schema { key: key.into(), message: message.into() }
    }

    pub(crate) fn at_sample(self, index: usize) -> Self {
        EmcmError::Sample { index, source: Box::new(self) }
    }

    /// The innermost error, looking through sample wrappers.
    pub fn root(&self) -> &EmcmError {
        match self {
            EmcmError::Sample { source, .. } => source.root(),
            other => other,
        }
    }
}
