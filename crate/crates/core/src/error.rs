use thiserror::Error;

use crate::channel::Scenario;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of subcarriers must be at least 1")]
    NoSubcarriers,
    #[error("carrier frequency must be positive, got {0} Hz")]
    InvalidCarrier(f64),
    #[error("bandwidth {bandwidth_hz} Hz must lie in [0, 2 * carrier) for carrier {carrier_hz} Hz")]
    InvalidBandwidth { carrier_hz: f64, bandwidth_hz: f64 },
    #[error("{0} must be at least 1")]
    EmptyDimension(&'static str),
    #[error("number of RIS-user paths must be at least 1")]
    NoPaths,
    #[error("a line-of-sight path set has exactly one RIS-user path, got {0}")]
    LosPathCount(usize),
    #[error("path delay must be finite and nonnegative, got {0} s")]
    InvalidDelay(f64),
    #[error("{operation} requires a line-of-sight RIS-user link, got {scenario}")]
    RequiresLos {
        operation: &'static str,
        scenario: Scenario,
    },
    #[error("subcarrier index {index} out of range for {count} subcarriers")]
    SubcarrierOutOfRange { index: usize, count: usize },
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("cannot build a covariance from zero channel vectors")]
    EmptyCovariance,
    #[error("power must be positive and finite, got {0}")]
    InvalidPower(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("{0} must not be empty")]
    EmptyList(&'static str),
    #[error("unknown figure id {0}; expected one of 2, 3, 4, 5, 6")]
    UnknownFigure(u32),
    #[error("invalid sweep value {value} for {variable}")]
    InvalidSweepValue { variable: &'static str, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
