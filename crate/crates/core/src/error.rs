use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("generalized t variance undefined for p = {p}, q = {q} (requires p*q > 2)")]
    VarianceUndefined { p: f64, q: f64 },

    #[error("moment of order {order} does not exist for the {base} base")]
    MomentNotFinite { order: u32, base: String },

    #[error("base distribution does not support {0}")]
    Capability(&'static str),

    #[error("numerical integration did not converge: estimate {estimate}, error estimate {abs_error}")]
    NonConvergence { estimate: f64, abs_error: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data ingestion failed: {0}")]
    Ingestion(String),

    #[error("log-posterior diverged at iteration {iteration}; state: {state}")]
    Divergent { iteration: usize, state: String },

    #[error("chain summary needs at least {needed} retained draws, found {found}")]
    InsufficientDraws { needed: usize, found: usize },
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
