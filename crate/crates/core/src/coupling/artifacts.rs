//! On-disk artifacts of a coupled run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CoupledResult, CouplingSignal, IterationRecord};
use crate::annual::{write_annual_csv, AnnualSolution};
use crate::hourly::{write_hourly_csv, write_summary_csv, MarketStats};
use crate::validation::iteration_convergence;
use crate::{Error, Result};

/// Compact per-iteration record kept for the whole run (no hourly series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDigest {
    pub iteration: usize,
    pub annual: AnnualSolution,
    pub stats: Vec<MarketStats>,
    pub share_gap: f64,
    pub worst: Option<(i32, String)>,
}

impl From<&IterationRecord> for IterationDigest {
    fn from(r: &IterationRecord) -> Self {
        IterationDigest {
            iteration: r.iteration,
            annual: r.annual.clone(),
            stats: r.stats.clone(),
            share_gap: r.share_gap,
            worst: r.worst.clone(),
        }
    }
}

/// What `validate` and `report` read back from a run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalState {
    pub scenario: String,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
    pub history: Vec<IterationDigest>,
    pub last: IterationRecord,
}

pub const FINAL_STATE: &str = "final_state.json";

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct IterationSummary<'a> {
    iteration: usize,
    share_gap: f64,
    worst: &'a Option<(i32, String)>,
    annual_objective: f64,
    lambda: Vec<(i32, f64)>,
    mean_price_stripped: Vec<(i32, f64)>,
}

pub fn iteration_dir(out: &Path, iteration: usize) -> PathBuf {
    out.join(format!("iter_{iteration}"))
}

pub fn write_iteration(out: &Path, r: &IterationRecord) -> Result<()> {
    let dir = iteration_dir(out, r.iteration);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_annual_csv(&r.annual, &dir.join("annual.csv"))?;
    for (hs, ms) in r.hourly.iter().zip(&r.stats) {
        write_hourly_csv(hs, &dir.join(format!("hourly_{}.csv", hs.year)))?;
        write_summary_csv(hs, ms, &dir.join(format!("hourly_summary_{}.csv", hs.year)))?;
    }
    let signals = [
        CouplingSignal::AnnualToHourly(r.to_hourly.clone()),
        CouplingSignal::HourlyToAnnual(r.to_annual.clone()),
    ];
    write_json(&dir.join("signal.json"), &signals)?;
    write_json(&dir.join("convergence.json"), &iteration_convergence(&IterationDigest::from(r)))?;
    let summary = IterationSummary {
        iteration: r.iteration,
        share_gap: r.share_gap,
        worst: &r.worst,
        annual_objective: r.annual.objective,
        lambda: r.annual.years.iter().map(|y| (y.year, y.lambda)).collect(),
        mean_price_stripped: r.stats.iter().map(|m| (m.year, m.mean_price_stripped)).collect(),
    };
    write_json(&dir.join("summary.json"), &summary)
}

pub(super) fn write_final(out: &Path, res: &CoupledResult) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let state = FinalState {
        scenario: res.scenario.clone(),
        converged: res.converged,
        iterations: res.iterations,
        warnings: res.warnings.clone(),
        history: res.history.iter().map(IterationDigest::from).collect(),
        last: res.last().clone(),
    };
    write_json(&out.join(FINAL_STATE), &state)
}

pub fn read_final_state(run_dir: &Path) -> Result<FinalState> {
    let path = run_dir.join(FINAL_STATE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}
