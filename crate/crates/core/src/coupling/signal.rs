//! Payloads exchanged between the two models each iteration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::prefactor::{
    cf_prefactor, curtailment_prefactor, markup_ratio, peak_prefactor, PrefactorState, PrefactorTech, PrefactorYear,
};
use crate::annual::{AnnualInputs, AnnualSolution, AnnualTechInputs, AnnualYearInputs, MarkupCurve};
use crate::hourly::{standing_bound, MarketStats, YearInputs};
use crate::scenario::{Scenario, TechKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualToHourly {
    pub iteration: usize,
    pub years: Vec<YearInputs>,
}

impl AnnualToHourly {
    pub fn year(&self, year: i32) -> Option<&YearInputs> {
        self.years.iter().find(|y| y.year == year)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyTechSignal {
    pub name: String,
    pub kind: TechKind,
    pub market_value_stripped: Option<f64>,
    pub markup_stripped: Option<f64>,
    /// Generation share among dispatchables and vre.
    pub share: f64,
    pub capacity_factor: Option<f64>,
    pub curtailment_ratio: Option<f64>,
    pub capture_price: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyYearSignal {
    pub year: i32,
    pub mean_price: f64,
    pub mean_price_stripped: f64,
    pub peak_ratio: f64,
    pub storage_loss_fraction: f64,
    pub techs: Vec<HourlyTechSignal>,
}

impl HourlyYearSignal {
    pub fn tech(&self, name: &str) -> Option<&HourlyTechSignal> {
        self.techs.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyToAnnual {
    pub iteration: usize,
    pub years: Vec<HourlyYearSignal>,
}

impl HourlyToAnnual {
    pub fn year(&self, year: i32) -> Option<&HourlyYearSignal> {
        self.years.iter().find(|y| y.year == year)
    }

    /// Checks coverage and ranges: every coupled year, ratios in [0,1], finite markups.
    pub fn validate(&self, s: &Scenario) -> Result<()> {
        for &y in &s.coupled_years {
            let ys = self
                .year(y)
                .ok_or_else(|| Error::Invariant(format!("signal misses coupled year {y}")))?;
            for (_, t) in s.generators() {
                let ts = ys
                    .tech(&t.name)
                    .ok_or_else(|| Error::Invariant(format!("signal misses {y}/{}", t.name)))?;
                let ratios = [Some(ts.share), ts.capacity_factor, ts.curtailment_ratio];
                if ratios.iter().flatten().any(|r| !(-1e-9..=1.0 + 1e-9).contains(r)) {
                    return Err(Error::Invariant(format!("{y}/{}: ratio outside [0,1]", t.name)));
                }
                if ts.markup_stripped.is_some_and(|m| !m.is_finite()) {
                    return Err(Error::Invariant(format!("{y}/{}: markup not finite", t.name)));
                }
            }
            if !(0.0..=1.0).contains(&ys.peak_ratio) {
                return Err(Error::Invariant(format!("{y}: peak ratio outside [0,1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "direction", rename_all = "snake_case")]
pub enum CouplingSignal {
    AnnualToHourly(AnnualToHourly),
    HourlyToAnnual(HourlyToAnnual),
}

pub fn hourly_signal(iteration: usize, stats: &[MarketStats]) -> HourlyToAnnual {
    let years = stats
        .iter()
        .map(|ms| HourlyYearSignal {
            year: ms.year,
            mean_price: ms.mean_price,
            mean_price_stripped: ms.mean_price_stripped,
            peak_ratio: ms.peak_ratio,
            storage_loss_fraction: ms.storage_loss_fraction,
            techs: ms
                .techs
                .iter()
                .map(|t| HourlyTechSignal {
                    name: t.name.clone(),
                    kind: t.kind,
                    market_value_stripped: t.market_value_stripped,
                    markup_stripped: t.markup_stripped,
                    share: ms.generation_share(&t.name),
                    capacity_factor: t.capacity_factor,
                    curtailment_ratio: t.curtailment_ratio,
                    capture_price: t.capture_price,
                })
                .collect(),
        })
        .collect();
    HourlyToAnnual { iteration, years }
}

/// Inputs for the hourly model of every coupled year, taken from an annual solution.
pub fn annual_signal(s: &Scenario, iteration: usize, sol: &AnnualSolution) -> Result<AnnualToHourly> {
    let mut years = Vec::new();
    for &y in &s.coupled_years {
        let yi = s
            .grid
            .index_of(y)
            .ok_or_else(|| Error::Input(format!("coupled year {y} is not a model year")))?;
        let mut base = YearInputs::uncoupled(s, y)?;
        for inp in base.techs.iter_mut() {
            let Some(k) = sol.techs.iter().position(|n| *n == inp.name) else {
                continue;
            };
            let cell = sol.cell(yi, k);
            let t = s.tech(&inp.name).expect("tech from scenario");
            inp.fixed_cost = cell.fixed_cost * (1.0 + cell.adjustment_factor);
            let pre_investment = if yi == 0 {
                t.standing_capacity.get(&y).copied().unwrap_or(0.0)
            } else {
                (cell.capacity - cell.addition).max(0.0)
            };
            let er = if pre_investment + cell.retirement > 0.0 {
                cell.retirement / (pre_investment + cell.retirement)
            } else {
                0.0
            };
            let fixed = t.is_offshore().then_some(cell.capacity);
            inp.fixed_capacity = fixed;
            inp.standing_capacity = if fixed.is_some() {
                0.0
            } else {
                standing_bound(pre_investment, er.min(1.0 - 1e-9))
            };
        }
        years.push(base);
    }
    Ok(AnnualToHourly { iteration, years })
}

/// Effective annual-model inputs for the next iteration plus the prefactors used.
///
/// `prev_annual` and `prev_hourly` are from the same iteration: the lagged
/// share difference ΔS = S_annual − S_hourly drives the capacity-factor,
/// curtailment and peak prefactors; the markup curve responds to the share
/// inside the annual solve.
pub fn annual_inputs(
    s: &Scenario,
    prev_annual: &AnnualSolution,
    prev_hourly: &HourlyToAnnual,
    prev_inputs: Option<&AnnualInputs>,
) -> Result<(AnnualInputs, PrefactorState)> {
    prev_hourly.validate(s)?;
    let mut inputs = AnnualInputs::default();
    let mut state = PrefactorState::default();
    let pf = &s.prefactors;
    for &y in &s.coupled_years {
        let yi = s.grid.index_of(y).expect("validated coupled year");
        let hs = prev_hourly.year(y).expect("validated coverage");
        let mut techs = BTreeMap::new();
        let mut ptechs = Vec::new();
        let mut ds_wind = 0.0;
        for (k, name) in prev_annual.techs.iter().enumerate() {
            let t = s.tech(name).expect("annual techs come from scenario");
            let ts = hs.tech(name).expect("validated coverage");
            let ds = prev_annual.share(yi, k) - ts.share;
            if t.is_wind() {
                ds_wind += ds;
            }
            let prev_cf = prev_inputs
                .and_then(|p| p.years.get(&y))
                .and_then(|p| p.techs.get(name))
                .map_or(t.default_cf, |p| p.cf);
            let (cf, f_cf, alpha, f_alpha) = match t.kind {
                TechKind::Vre => {
                    let cf = ts.capacity_factor.unwrap_or(prev_cf);
                    let ratio = ts.curtailment_ratio.unwrap_or(0.0);
                    (cf, None, curtailment_prefactor(ratio, ds), Some(1.0 + ds))
                }
                _ => match ts.capacity_factor {
                    Some(phi) => {
                        let (f, cf) = cf_prefactor(phi, ds, pf.cf_slope, pf.cf_floor, t.max_annual_cf);
                        (cf, Some(f), 0.0, None)
                    }
                    None => (prev_cf, None, 0.0, None),
                },
            };
            let (markup, b, f_eta) = match (ts.market_value_stripped, hs.mean_price_stripped) {
                (Some(mv), j) => match markup_ratio(mv, j) {
                    Ok(ratio) => {
                        let b = ratio * pf.markup_b_scale;
                        let curve = MarkupCurve {
                            mv,
                            j,
                            b,
                            share_ref: ts.share,
                        };
                        (Some(curve), Some(b), Some(1.0 - b * ds))
                    }
                    Err(_) => (
                        Some(MarkupCurve {
                            mv,
                            j,
                            b: 0.0,
                            share_ref: ts.share,
                        }),
                        None,
                        Some(1.0),
                    ),
                },
                (None, _) => (None, None, None),
            };
            techs.insert(
                name.clone(),
                AnnualTechInputs {
                    cf,
                    curtailment: alpha,
                    markup,
                },
            );
            ptechs.push(PrefactorTech {
                name: name.clone(),
                b,
                delta_s: ds,
                f_eta,
                f_cf,
                f_curtailment: f_alpha,
                demand_markup: None,
            });
        }
        for ts in hs.techs.iter().filter(|t| t.kind == TechKind::FlexDemand) {
            ptechs.push(PrefactorTech {
                name: ts.name.clone(),
                b: None,
                delta_s: 0.0,
                f_eta: Some(1.0),
                f_cf: None,
                f_curtailment: None,
                demand_markup: ts.capture_price.map(|cp| cp - hs.mean_price),
            });
        }
        let b_peak = pf.b_peak[yi];
        let bound = peak_prefactor(hs.peak_ratio, ds_wind, b_peak, s.annual_demand[yi]);
        inputs.years.insert(
            y,
            AnnualYearInputs {
                peak_bound: Some(bound),
                storage_loss: hs.storage_loss_fraction.max(0.0),
                techs,
            },
        );
        state.years.push(PrefactorYear {
            year: y,
            b_peak,
            delta_s_wind: ds_wind,
            f_peak: (1.0 - b_peak * ds_wind).max(0.0),
            techs: ptechs,
        });
    }
    Ok((inputs, state))
}
