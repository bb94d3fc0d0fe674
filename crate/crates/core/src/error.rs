use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spread: bid {bid} exceeds ask {ask}")]
    InvalidSpread { bid: f64, ask: f64 },
    /// A gradient restriction whose result is not bounded below. Distinct from
    /// the bottom element: it means the model is mis-specified.
    #[error("gradient restriction is unbounded below")]
    UnboundedBelow,
    #[error("point {x} lies outside the effective domain")]
    OutOfDomain { x: f64 },
    #[error("payoff is never exercisable on some path; the price is degenerate")]
    Degenerate,
    #[error("initial portfolio ({cash}, {shares}) does not cover the claim")]
    InsufficientEndowment { cash: f64, shares: f64 },
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("the model admits arbitrage")]
    Arbitrage,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_spread<S: crate::Scalar>(bid: &S, ask: &S) -> Error {
    Error::InvalidSpread {
        bid: bid.to_f64(),
        ask: ask.to_f64(),
    }
}
