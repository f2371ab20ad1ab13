//! Zero-profit checks, scarcity equivalence, convergence metrics and the
//! Q1/Q2 toy-problem harness.

mod convergence;
pub mod q1q2;
mod zpr;

pub use convergence::{
    convergence_metrics, iteration_convergence, rolling_mean, ConvergenceReport, IterationConvergence, PriceGap,
    ShareGap,
};
pub use zpr::{
    annual_zpr, hourly_zpr, markup_zero_sum, scarcity_equivalence, Model, ScarcityEntry, Scope, ZprEntry, ZprReport,
    ZPR_TOL,
};
