use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("table is not a Latin square: {0}")]
    NotLatin(String),
    #[error("table has no identity element")]
    NoIdentity,
    #[error("table is not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NotAssociative(usize, usize, usize),
    #[error("unknown group constructor `{0}`")]
    UnknownConstructor(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("{what} = {value} exceeds the configured limit {limit}")]
    LimitExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("{what} needs about {cost} steps, over the budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        cost: f64,
        budget: f64,
    },
    #[error("target function belongs to a different group")]
    WrongGroup,
    #[error("first partition does not refine the second")]
    NotRefinement,
    #[error("label set is not a subset of the support")]
    NotSubset,
    #[error("bad umbral parameters: {0}")]
    BadParams(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
