//! Adverse selection between researchers and implementers for binomial
//! policy outcomes.
//!
//! The crate is organised bottom-up:
//!
//! - [`binom`]: exact binomial probabilities, normal quantiles, the
//!   Clopper–Pearson and Wald lower bounds, and exact coverage by enumeration.
//! - [`economics`]: policy costs and benefits, break-even success rate and
//!   scale limits.
//! - [`researchers`]: truthful, fraudulent and selective publication models
//!   and the false-positive probability an implementer actually faces.
//! - [`implementer`]: decision rules with and without a performance guarantee.
//! - [`contracts`]: payoff algebra for full, tail and proportional guarantees.
//! - [`researcher`]: expected-utility evaluation, participation conditions,
//!   risk management and pooling on the researcher side.
//! - [`sim`]: seeded streams, Monte-Carlo estimates and exact enumeration.

pub mod binom;
pub mod config;
pub mod contracts;
pub mod economics;
pub mod error;
pub mod grid;
pub mod implementer;
pub mod law;
pub mod researcher;
pub mod researchers;
pub mod sim;

pub use error::{Error, Result};
