//! Implied-volatility smile calibration for inverse-quoted crypto options.
//!
//! Mid-price calibration of a volatility smile is biased in the wings: the
//! map from price to squared implied volatility is concave there, so averaging
//! noisy prices pulls the fitted variance down. This crate replaces the mid
//! with an *anchor price* whose squared-IV bias is third order in the tick
//! size, and handles missing or crossed bids by imputing a weighted set of
//! prices across the bid-ask interval under a Beta(a,1) law centered on the
//! anchor.
//!
//! Modules follow the pipeline:
//!
//! * [`pricing`] — Black-76 forward pricing, implied vol, analytic IV² derivatives
//! * [`market_data`] — quote ingestion, forward-unit normalization, OTM filter, bid repair
//! * [`anchor`] — anchor price and its applicability condition
//! * [`augmentation`] — Beta(a,1) price imputation inside the spread
//! * [`svi`] — Raw SVI total-variance parametrization and butterfly diagnostic
//! * [`calibration`] — Huber-loss BFGS fit and error metrics
//! * [`synthetic`] — noisy-quote scenario generator and experiment harness

pub mod anchor;
pub mod augmentation;
pub mod calibration;
pub mod error;
pub mod market_data;
pub mod math;
pub mod pricing;
pub mod svi;
pub mod synthetic;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::SmileError;
