use thiserror::Error;

/// Errors raised by the key-rate toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid intensities: {0}")]
    InvalidIntensity(String),

    /// The yield of the given photon-number component vanished, so its error
    /// rate is undefined.
    #[error("degenerate channel: the {0}-photon yield is zero")]
    DegenerateChannel(u32),

    /// A lower bound that an error estimate divides by came out as zero.
    #[error("degenerate bound: {0} is zero")]
    DegenerateBound(&'static str),

    #[error("value {0} is outside the probability domain [0, 1]")]
    Domain(f64),

    #[error("empty search interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("optimized key rate is not positive at zero distance")]
    NoPositiveRate,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
