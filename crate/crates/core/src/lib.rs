//! Credit-risk engine: prepares a consumer-loan table, trains and evaluates
//! probability-of-default classifiers, and turns predicted PDs into exposure,
//! loss-given-default, expected-loss and single-payment CDS spread figures.

pub mod cds;
pub mod dataset;
pub mod error;
pub mod exposure;
pub mod features;
pub mod forest;
pub mod logreg;
pub mod metrics;
pub mod model;
pub mod par;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
