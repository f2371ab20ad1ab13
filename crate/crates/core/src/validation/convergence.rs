use serde::{Deserialize, Serialize};

use super::zpr::{scarcity_equivalence, ScarcityEntry};
use crate::coupling::IterationDigest;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareGap {
    pub year: i32,
    pub tech: String,
    pub annual_share: f64,
    pub hourly_share: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceGap {
    pub year: i32,
    pub lambda: f64,
    /// Three-period centered average of λ.
    pub lambda_smoothed: f64,
    pub mean_price_stripped: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkupRow {
    pub year: i32,
    pub tech: String,
    pub hourly_markup_stripped: Option<f64>,
    pub annual_markup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConvergence {
    pub iteration: usize,
    pub price_gaps: Vec<PriceGap>,
    /// |mean_y(λ̄ − J′)| / mean_y λ̄ over coupled years.
    pub price_gap_average: f64,
    pub generation_gaps: Vec<ShareGap>,
    pub capacity_gaps: Vec<ShareGap>,
    pub max_generation_gap: f64,
    pub max_capacity_gap: f64,
    pub markups: Vec<MarkupRow>,
    pub scarcity: Vec<ScarcityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: Vec<IterationConvergence>,
}

impl ConvergenceReport {
    pub fn last(&self) -> &IterationConvergence {
        self.iterations.last().expect("non-empty report")
    }
}

/// Centered three-point average; the end points average their two available values.
pub fn rolling_mean(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(v.len());
            v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn shares(values: &[f64]) -> Vec<f64> {
    let tot: f64 = values.iter().sum();
    values.iter().map(|v| if tot > 0.0 { v / tot } else { 0.0 }).collect()
}

pub fn iteration_convergence(d: &IterationDigest) -> IterationConvergence {
    let annual = &d.annual;
    let lambdas: Vec<f64> = annual.years.iter().map(|y| y.lambda).collect();
    let smoothed = rolling_mean(&lambdas);
    let mut price_gaps = Vec::new();
    let mut generation_gaps = Vec::new();
    let mut capacity_gaps = Vec::new();
    let mut markups = Vec::new();
    let mut scarcity = Vec::new();
    for ms in &d.stats {
        let Some(yi) = annual.years.iter().position(|y| y.year == ms.year) else {
            continue;
        };
        price_gaps.push(PriceGap {
            year: ms.year,
            lambda: lambdas[yi],
            lambda_smoothed: smoothed[yi],
            mean_price_stripped: ms.mean_price_stripped,
            gap: smoothed[yi] - ms.mean_price_stripped,
        });
        let cells = annual.year_cells(yi);
        let ann_cap = shares(&cells.iter().map(|c| c.capacity).collect::<Vec<_>>());
        let hr_cap = shares(
            &annual
                .techs
                .iter()
                .map(|n| ms.tech(n).map_or(0.0, |t| t.capacity))
                .collect::<Vec<_>>(),
        );
        for (k, name) in annual.techs.iter().enumerate() {
            let a = annual.share(yi, k);
            let h = ms.generation_share(name);
            generation_gaps.push(ShareGap {
                year: ms.year,
                tech: name.clone(),
                annual_share: a,
                hourly_share: h,
                gap: (a - h).abs(),
            });
            capacity_gaps.push(ShareGap {
                year: ms.year,
                tech: name.clone(),
                annual_share: ann_cap[k],
                hourly_share: hr_cap[k],
                gap: (ann_cap[k] - hr_cap[k]).abs(),
            });
            markups.push(MarkupRow {
                year: ms.year,
                tech: name.clone(),
                hourly_markup_stripped: ms.tech(name).and_then(|t| t.markup_stripped),
                annual_markup: cells[k].markup,
            });
        }
        scarcity.extend(scarcity_equivalence(annual, ms));
    }
    let n = price_gaps.len().max(1) as f64;
    let mean_gap = price_gaps.iter().map(|p| p.gap).sum::<f64>() / n;
    let mean_lambda = price_gaps.iter().map(|p| p.lambda_smoothed).sum::<f64>() / n;
    let max = |v: &[ShareGap]| v.iter().map(|g| g.gap).fold(0.0, f64::max);
    IterationConvergence {
        iteration: d.iteration,
        price_gap_average: if mean_lambda != 0.0 { mean_gap.abs() / mean_lambda.abs() } else { 0.0 },
        max_generation_gap: max(&generation_gaps),
        max_capacity_gap: max(&capacity_gaps),
        price_gaps,
        generation_gaps,
        capacity_gaps,
        markups,
        scarcity,
    }
}

pub fn convergence_metrics(history: &[IterationDigest]) -> Result<ConvergenceReport> {
    if history.is_empty() {
        return Err(Error::Input("convergence metrics need at least one iteration".into()));
    }
    Ok(ConvergenceReport {
        iterations: history.iter().map(iteration_convergence).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolling_mean_of_three() {
        assert_eq!(rolling_mean(&[1.0, 2.0, 6.0, 3.0]), vec![1.5, 3.0, 11.0 / 3.0, 4.5]);
        assert_eq!(rolling_mean(&[4.0]), vec![4.0]);
    }
}
