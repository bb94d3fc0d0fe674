//! Pricing, hedging and optimal stopping for American options under
//! proportional transaction costs on finite event trees.
//!
//! The seller's (ask) and buyer's (bid) prices are computed by backward
//! induction over piecewise linear value functions ([`pl`]). The seller side
//! also runs in the dual, which yields a mixed stopping time and an
//! approximate martingale certifying the price. [`oracle`] holds slow,
//! independent reference computations for small models.

pub mod buyer;
pub mod error;
pub mod pl;
pub mod market;
pub mod oracle;
pub mod scalar;
pub mod seller;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
