//! Customer-bundling auctions for digital goods.
//!
//! Customers with independent private valuations may be offered individual
//! prices together with a joint bundle price for the whole group. A group
//! accepts the bundle whenever some split of the bundle price leaves every
//! member no worse off than buying alone. This crate computes optimal single
//! prices, evaluates bundle offers exactly (pairs) or by seeded Monte Carlo
//! (any group size), and drives reproducible experiments from JSON configs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod group;
pub mod mechanism;
pub mod montecarlo;
pub mod pair;
pub mod quadrature;
pub mod search;
pub mod single;
pub mod valuation;

pub use error::{Error, Result};
pub use mechanism::{BundleOffer, ItemPrice, Outcome, ValuationProfile};
pub use valuation::{SmoothnessReport, ValuationDistribution};
