use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("scale {m} outside 1..={max}")]
    ScaleOutOfRange { m: usize, max: usize },

    #[error("no break-even success rate: expected benefit at p = 1 is {benefit}, below cost {cost}")]
    NoBreakEven { benefit: f64, cost: f64 },

    #[error("probability grid is empty")]
    EmptyGrid,

    #[error("enumeration of {size} outcomes exceeds the limit of {limit}")]
    EnumerationLimit { size: usize, limit: usize },

    #[error("tail contract with k = {k} below the loss limit {u_bar} needs an alpha schedule")]
    ScheduleRequired { k: f64, u_bar: f64 },

    #[error("invalid share matrix: {0}")]
    InvalidShares(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        domain(format!("{name} = {p} is not a probability"))
    }
}

pub(crate) fn check_open_unit(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        domain(format!("{name} = {p} must lie strictly inside (0, 1)"))
    }
}
