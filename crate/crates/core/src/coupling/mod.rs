//! The iterative loop between the annual and hourly models.

mod artifacts;
pub mod prefactor;
pub mod signal;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annual::{solve_annual, AnnualInputs, AnnualSolution};
use crate::hourly::{solve_hourly, HourlySolution, MarketStats};
use crate::scenario::Scenario;
use crate::{Error, Result};

pub use artifacts::{read_final_state, write_iteration, FinalState, IterationDigest};
pub use prefactor::{
    cf_prefactor, curtailment_prefactor, markup_prefactor, peak_prefactor, PrefactorState,
};
pub use signal::{
    annual_inputs, annual_signal, hourly_signal, AnnualToHourly, CouplingSignal, HourlyToAnnual,
};

/// Consecutive share-gap increases that trigger an oscillation warning.
pub const OSCILLATION_RUN: usize = 5;

/// Everything produced by one iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Effective inputs of this iteration's annual solve; `None` when uncoupled.
    pub annual_inputs: Option<AnnualInputs>,
    pub prefactors: PrefactorState,
    pub annual: AnnualSolution,
    pub to_hourly: AnnualToHourly,
    pub hourly: Vec<HourlySolution>,
    pub stats: Vec<MarketStats>,
    pub to_annual: HourlyToAnnual,
    pub share_gap: f64,
    /// (year, tech) attaining the share gap.
    pub worst: Option<(i32, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoupledResult {
    pub scenario: String,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
    pub history: Vec<IterationRecord>,
}

impl CoupledResult {
    pub fn last(&self) -> &IterationRecord {
        self.history.last().expect("at least one iteration")
    }
}

/// Largest absolute difference between annual usable-generation shares and
/// hourly generation shares over coupled years and generators.
pub fn share_gap(s: &Scenario, annual: &AnnualSolution, stats: &[MarketStats]) -> (f64, Option<(i32, String)>) {
    let mut gap = 0.0;
    let mut worst = None;
    for ms in stats {
        let Some(yi) = s.grid.index_of(ms.year) else { continue };
        for (k, name) in annual.techs.iter().enumerate() {
            let d = (annual.share(yi, k) - ms.generation_share(name)).abs();
            if d > gap || worst.is_none() {
                gap = d.max(gap);
                worst = Some((ms.year, name.clone()));
            }
        }
    }
    (gap, worst)
}

/// Solves every coupled year's hourly model in parallel; output order follows `to_hourly`.
pub fn solve_hourly_years(s: &Scenario, to_hourly: &AnnualToHourly) -> Result<Vec<(HourlySolution, MarketStats)>> {
    to_hourly.years.par_iter().map(|y| solve_hourly(s, y)).collect()
}

/// Runs the coupled iteration without writing artifacts.
pub fn run_coupled(s: &Scenario) -> Result<CoupledResult> {
    run(s, None)
}

/// Runs the coupled iteration, writing per-iteration artifacts under `out`.
pub fn run_coupled_to(s: &Scenario, out: &Path) -> Result<CoupledResult> {
    run(s, Some(out))
}

fn run(s: &Scenario, out: Option<&Path>) -> Result<CoupledResult> {
    s.validate()?;
    let term = s.termination;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut warnings = Vec::new();
    let mut rising = 0usize;
    let mut converged = false;
    for i in 1..=term.max_iters.max(1) {
        let wrap = |e: Error| Error::Iteration {
            iteration: i,
            source: Box::new(e),
        };
        let (inputs, prefactors) = match history.last() {
            None => (None, PrefactorState::default()),
            Some(prev) => {
                let (inp, st) =
                    annual_inputs(s, &prev.annual, &prev.to_annual, prev.annual_inputs.as_ref()).map_err(wrap)?;
                (Some(inp), st)
            }
        };
        let annual = solve_annual(s, inputs.as_ref()).map_err(wrap)?;
        let to_hourly = annual_signal(s, i, &annual).map_err(wrap)?;
        let solved = solve_hourly_years(s, &to_hourly).map_err(wrap)?;
        let (hourly, stats): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
        let to_annual = hourly_signal(i, &stats);
        let (gap, worst) = share_gap(s, &annual, &stats);
        if let Some(prev) = history.last() {
            rising = if gap > prev.share_gap { rising + 1 } else { 0 };
            if rising == OSCILLATION_RUN {
                let msg = format!("share gap increased {OSCILLATION_RUN} iterations in a row (iteration {i})");
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
        log::info!("iteration {i}: max share gap {gap:.4}");
        let record = IterationRecord {
            iteration: i,
            annual_inputs: inputs,
            prefactors,
            annual,
            to_hourly,
            hourly,
            stats,
            to_annual,
            share_gap: gap,
            worst,
        };
        if let Some(dir) = out {
            write_iteration(dir, &record).map_err(wrap)?;
        }
        history.push(record);
        if gap <= term.share_tol && i >= term.min_iters {
            converged = true;
            break;
        }
    }
    let result = CoupledResult {
        scenario: s.name.clone(),
        converged,
        iterations: history.len(),
        warnings,
        history,
    };
    if let Some(dir) = out {
        artifacts::write_final(dir, &result)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests;
