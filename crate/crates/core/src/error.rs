use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index space overflow: dimension {dim}, side {side}")]
    IndexOverflow { dim: usize, side: usize },

    #[error("torus side {side} is not divisible by coarse block side {block}")]
    Divisibility { side: usize, block: usize },

    #[error("enumeration cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),

    #[error("cluster weight q = {0} is not an integer >= 2")]
    NonIntegerQ(f64),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("coupling from the past did not coalesce within horizon {horizon}")]
    NotCoalesced { horizon: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
