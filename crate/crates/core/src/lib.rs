//! Soft-coupling of a multi-year annual capacity-expansion LP with an
//! hourly dispatch-and-investment LP.
//!
//! The annual model decides capacities over all years jointly; the hourly
//! model resolves one representative year at a time. The loop in
//! [`coupling`] exchanges markups, capacity factors, curtailment and a
//! peak residual-demand bound until generation shares agree.

pub mod annual;
pub mod coupling;
pub mod error;
pub mod hourly;
pub mod lp;
pub mod reporting;
pub mod scenario;
pub mod synthetic;
pub mod validation;

pub use error::{Error, Result};

/// Hours in a (non-leap) year.
pub const HOURS_PER_YEAR: f64 = 8760.0;
