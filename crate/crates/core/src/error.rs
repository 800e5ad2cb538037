use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("entry {index} is {value}, expected a finite nonnegative real")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("KL divergence undefined: x[{index}] = {value} > 0 while y[{index}] = 0")]
    SupportViolation { index: usize, value: f64 },

    #[error("loss entry {index} is {value}, expected a value in [0, 1]")]
    LossOutOfRange { index: usize, value: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("schedule {name} increases at round {round}: {previous} -> {current}")]
    ScheduleViolation {
        name: &'static str,
        round: usize,
        previous: f64,
        current: f64,
    },

    #[error("empty sequence: {0}")]
    EmptySequence(&'static str),

    #[error("window [{start}, {end}] is not inside [1, {horizon}]")]
    WindowOutOfRange {
        start: usize,
        end: usize,
        horizon: usize,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive real",
        })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite nonnegative real",
        })
    }
}
