//! Stabilizing multipliers on quantities passed from the hourly to the annual model.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ratio parameter b: the larger of MV′/J′ and J′/MV′.
pub fn markup_ratio(mv: f64, j: f64) -> Result<f64> {
    if !(mv > 0.0 && j > 0.0) {
        return Err(Error::Input(format!(
            "markup prefactor needs positive prices (MV′ = {mv}, J′ = {j})"
        )));
    }
    Ok(if mv > j { mv / j } else { j / mv })
}

/// Returns (f^η, η) with f^η = 1 − b·ΔS and η = f^η·MV′ − J′.
pub fn markup_prefactor(mv: f64, j: f64, delta_s: f64) -> Result<(f64, f64)> {
    let b = markup_ratio(mv, j)?;
    let f = 1.0 - b * delta_s;
    Ok((f, f * mv - j))
}

/// Returns (f^φ, φ). Peakers (φ̲ < 0.5) lose capacity factor as their share
/// grows, baseload plants gain.
pub fn cf_prefactor(cf_prev: f64, delta_s: f64, slope: f64, floor: f64, cap: f64) -> (f64, f64) {
    let f = if cf_prev < 0.5 {
        1.0 - slope * delta_s
    } else {
        1.0 + slope * delta_s
    };
    (f, (cf_prev * f).clamp(floor, cap))
}

pub const MAX_CURTAILMENT: f64 = 0.95;

pub fn curtailment_prefactor(ratio: f64, delta_s: f64) -> f64 {
    (ratio * (1.0 + delta_s)).clamp(0.0, MAX_CURTAILMENT)
}

/// Right-hand side of the dispatchable peak constraint [MW].
pub fn peak_prefactor(ratio: f64, delta_s_wind: f64, b_peak: f64, annual_demand: f64) -> f64 {
    let f = (1.0 - b_peak * delta_s_wind).max(0.0);
    ratio * f * annual_demand
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefactorTech {
    pub name: String,
    pub b: Option<f64>,
    /// Share difference from the previous iteration (annual minus hourly).
    pub delta_s: f64,
    /// f^η evaluated at `delta_s`; in the annual solve it responds to the endogenous share.
    pub f_eta: Option<f64>,
    pub f_cf: Option<f64>,
    pub f_curtailment: Option<f64>,
    /// Demand-side markup CP − J for flexible consumers (reported only).
    pub demand_markup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefactorYear {
    pub year: i32,
    pub b_peak: f64,
    pub delta_s_wind: f64,
    pub f_peak: f64,
    pub techs: Vec<PrefactorTech>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrefactorState {
    pub years: Vec<PrefactorYear>,
}
