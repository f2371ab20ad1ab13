//! Single-year hourly dispatch-and-investment LP with optional storage and
//! flexible electrolysis demand.

mod export;
mod stats;

use serde::{Deserialize, Serialize};

use crate::lp::{self, LpProblem, RowId, Sense, VarId};
use crate::scenario::{rescale_demand, rescale_vre_cf, Scenario, TechKind};
use crate::{Error, Result};

pub use export::{write_hourly_csv, write_summary_csv};
pub use stats::{capture_price, market_stats, peak_residual_demand, MarketStats, TechStats};

/// Per-technology data the annual side passes to one hourly year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechInputs {
    pub name: String,
    /// [$ /MW-yr]
    pub fixed_cost: f64,
    /// [$ /MWh]
    pub variable_cost: f64,
    pub potential: Option<f64>,
    /// Lower bound on capacity from the annual model's pre-investment stock [MW].
    pub standing_capacity: f64,
    /// Capacity fixed to the annual model's value [MW].
    pub fixed_capacity: Option<f64>,
    /// Mean theoretical capacity factor for vre.
    pub mean_cf: Option<f64>,
}

/// Everything the hourly model needs from the annual side for one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearInputs {
    pub year: i32,
    /// Total demand including flexible electrolysis [MWh/yr].
    pub annual_demand: f64,
    pub flex_energy: f64,
    pub techs: Vec<TechInputs>,
}

impl YearInputs {
    /// Inputs taken straight from the scenario: no standing capacity, no fixes.
    pub fn uncoupled(s: &Scenario, year: i32) -> Result<Self> {
        let yi = s
            .grid
            .index_of(year)
            .ok_or_else(|| Error::Input(format!("{year} is not a model year")))?;
        let techs = s
            .hourly_techs()
            .map(|(ti, t)| {
                let fuel = s.fitted_fuel_cost(ti)[yi];
                TechInputs {
                    name: t.name.clone(),
                    fixed_cost: t.fixed_cost[yi],
                    variable_cost: t.running_cost(yi, s.co2_price[yi], fuel),
                    potential: t.potential,
                    standing_capacity: 0.0,
                    fixed_capacity: None,
                    mean_cf: (t.kind == TechKind::Vre).then_some(t.default_cf),
                }
            })
            .collect();
        Ok(YearInputs {
            year,
            annual_demand: s.annual_demand[yi],
            flex_energy: s.flex_energy(yi),
            techs,
        })
    }

    pub fn tech(&self, name: &str) -> Option<&TechInputs> {
        self.techs.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageData {
    /// [$ /MWh-yr]
    pub energy_cost: f64,
    /// Separate charging capacity cost [$ /MW-yr]; `None` shares the discharge capacity.
    pub charge_cost: Option<f64>,
    pub roundtrip_efficiency: f64,
}

/// One technology of a fully explicit hourly instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyTech {
    pub name: String,
    pub kind: TechKind,
    pub fixed_cost: f64,
    pub variable_cost: f64,
    pub potential: Option<f64>,
    pub standing_capacity: f64,
    pub fixed_capacity: Option<f64>,
    /// Hourly capacity factors (vre).
    pub cf: Vec<f64>,
    /// Annual dispatch cap Σ_h G ≤ cap·H·P (dispatchables).
    pub dispatch_cap: f64,
    pub storage: Option<StorageData>,
}

/// A fully explicit hourly problem: series already rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyInstance {
    pub year: i32,
    pub hour_weight: f64,
    /// Inflexible demand per hour [MW].
    pub demand: Vec<f64>,
    /// Flexible demand energy to place over the year [MWh].
    pub flex_energy: f64,
    pub techs: Vec<HourlyTech>,
}

impl HourlyInstance {
    pub fn hours(&self) -> usize {
        self.demand.len()
    }

    /// Assembles the instance for `year` from scenario profiles and annual-side inputs.
    pub fn from_scenario(s: &Scenario, inputs: &YearInputs) -> Result<Self> {
        let yi = s
            .grid
            .index_of(inputs.year)
            .ok_or_else(|| Error::Input(format!("{} is not a model year", inputs.year)))?;
        let w = s.grid.hour_weight();
        let prof = s.resampled_profiles()?;
        let inflexible = inputs.annual_demand - inputs.flex_energy;
        let demand = rescale_demand(&prof.demand_mw, w, inflexible)?;
        let mut techs = Vec::new();
        for (_, t) in s.hourly_techs() {
            let inp = inputs.tech(&t.name).ok_or_else(|| {
                Error::Input(format!("signal for {} has no entry for {}", inputs.year, t.name))
            })?;
            let cf = if t.kind == TechKind::Vre {
                let col = t.profile.as_deref().unwrap_or_default();
                let base = prof
                    .cf(col)
                    .ok_or_else(|| Error::Input(format!("no profile column {col}")))?;
                let target = inp.mean_cf.unwrap_or(t.default_cf);
                let mut cf = rescale_vre_cf(base, target)?;
                if let Some(cap) = t.hourly_cf_cap {
                    cf.iter_mut().for_each(|c| *c = c.min(cap));
                }
                cf
            } else {
                Vec::new()
            };
            let storage = t.storage.as_ref().map(|st| StorageData {
                energy_cost: st.energy_cost[yi],
                charge_cost: st.charge_cost.as_ref().map(|c| c[yi]),
                roundtrip_efficiency: st.roundtrip_efficiency,
            });
            techs.push(HourlyTech {
                name: t.name.clone(),
                kind: t.kind,
                fixed_cost: inp.fixed_cost,
                variable_cost: inp.variable_cost,
                potential: inp.potential,
                standing_capacity: inp.standing_capacity,
                fixed_capacity: if s.features.offshore_fix_enabled { inp.fixed_capacity } else { None },
                cf,
                dispatch_cap: t.max_annual_cf,
                storage,
            });
        }
        Ok(HourlyInstance {
            year: inputs.year,
            hour_weight: w,
            demand,
            flex_energy: inputs.flex_energy,
            techs,
        })
    }
}

/// Row and column handles of one technology block.
#[derive(Debug, Clone, Default)]
struct TechIndex {
    capacity: Option<VarId>,
    generation: Vec<VarId>,
    charge: Vec<VarId>,
    soc: Vec<VarId>,
    energy_cap: Option<VarId>,
    charge_cap: Option<VarId>,
    flex: Vec<VarId>,
    gen_rows: Vec<RowId>,
    potential: Option<RowId>,
    standing: Option<RowId>,
    fix: Option<RowId>,
    flex_energy: Option<RowId>,
}

pub struct HourlyLp {
    pub problem: LpProblem,
    balance: Vec<RowId>,
    techs: Vec<TechIndex>,
}

/// Builds the LP. Generation variables are average MW over a represented
/// hour; each hour stands for `w` real hours, so running costs carry `w`
/// and annual energies are `w·Σ_h`.
pub fn build_instance(inst: &HourlyInstance) -> Result<HourlyLp> {
    let h_n = inst.hours();
    let w = inst.hour_weight;
    if h_n == 0 {
        return Err(Error::Input("hourly instance has no hours".into()));
    }
    let y = inst.year;
    let mut p = LpProblem::new();
    let mut balance_terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); h_n];
    let mut techs = Vec::new();
    let inf = f64::INFINITY;
    for t in &inst.techs {
        let s = &t.name;
        let mut ix = TechIndex::default();
        let cap = p.add_var(format!("P[{y},{s}]"), 0.0, inf, t.fixed_cost);
        ix.capacity = Some(cap);
        if let Some(psi) = t.potential {
            ix.potential = Some(p.add_row(format!("potential[{y},{s}]"), vec![(cap, 1.0)], Sense::Le, psi));
        }
        if t.standing_capacity > 0.0 {
            ix.standing = Some(p.add_row(
                format!("standing[{y},{s}]"),
                vec![(cap, 1.0)],
                Sense::Ge,
                t.standing_capacity,
            ));
        }
        if let Some(fix) = t.fixed_capacity {
            ix.fix = Some(p.add_row(format!("capacity_fix[{y},{s}]"), vec![(cap, 1.0)], Sense::Eq, fix));
        }
        match t.kind {
            TechKind::Dispatchable => {
                for h in 0..h_n {
                    let g = p.add_var(format!("G[{y},{s},{h}]"), 0.0, inf, w * t.variable_cost);
                    ix.gen_rows.push(p.add_row(
                        format!("dispatch[{y},{s},{h}]"),
                        vec![(g, 1.0), (cap, -1.0)],
                        Sense::Le,
                        0.0,
                    ));
                    balance_terms[h].push((g, 1.0));
                    ix.generation.push(g);
                }
                if t.dispatch_cap < 1.0 {
                    let mut c: Vec<(VarId, f64)> = ix.generation.iter().map(|g| (*g, 1.0)).collect();
                    c.push((cap, -t.dispatch_cap * h_n as f64));
                    p.add_row(format!("dispatch_cap[{y},{s}]"), c, Sense::Le, 0.0);
                }
            }
            TechKind::Vre => {
                if t.cf.len() != h_n {
                    return Err(Error::Input(format!("{s}: capacity-factor series has wrong length")));
                }
                // Running cost accrues on pre-curtailment output cf·P, so it is
                // charged to capacity and curtailment is the slack of G ≤ cf·P.
                p.add_obj(cap, w * t.variable_cost * t.cf.iter().sum::<f64>());
                for h in 0..h_n {
                    let g = p.add_var(format!("G[{y},{s},{h}]"), 0.0, inf, 0.0);
                    ix.gen_rows.push(p.add_row(
                        format!("vre[{y},{s},{h}]"),
                        vec![(g, 1.0), (cap, -t.cf[h])],
                        Sense::Le,
                        0.0,
                    ));
                    balance_terms[h].push((g, 1.0));
                    ix.generation.push(g);
                }
            }
            TechKind::Storage => {
                let st = t
                    .storage
                    .as_ref()
                    .ok_or_else(|| Error::Input(format!("{s}: storage data missing")))?;
                let root = st.roundtrip_efficiency.sqrt();
                let e = p.add_var(format!("E[{y},{s}]"), 0.0, inf, st.energy_cost);
                ix.energy_cap = Some(e);
                let charge_cap = match st.charge_cost {
                    Some(cc) => {
                        let v = p.add_var(format!("Pin[{y},{s}]"), 0.0, inf, cc);
                        ix.charge_cap = Some(v);
                        v
                    }
                    None => cap,
                };
                for h in 0..h_n {
                    let g = p.add_var(format!("G[{y},{s},{h}]"), 0.0, inf, w * t.variable_cost);
                    let c = p.add_var(format!("Charge[{y},{s},{h}]"), 0.0, inf, 0.0);
                    let soc = p.add_var(format!("Soc[{y},{s},{h}]"), 0.0, inf, 0.0);
                    ix.generation.push(g);
                    ix.charge.push(c);
                    ix.soc.push(soc);
                    balance_terms[h].push((g, 1.0));
                    balance_terms[h].push((c, -1.0));
                }
                for h in 0..h_n {
                    let next = ix.soc[(h + 1) % h_n];
                    let mut coeffs = vec![(ix.charge[h], -w * root), (ix.generation[h], w / root)];
                    if h_n > 1 {
                        coeffs.push((next, 1.0));
                        coeffs.push((ix.soc[h], -1.0));
                    }
                    p.add_row(format!("soc[{y},{s},{h}]"), coeffs, Sense::Eq, 0.0);
                    p.add_row(format!("soc_cap[{y},{s},{h}]"), vec![(ix.soc[h], 1.0), (e, -1.0)], Sense::Le, 0.0);
                    p.add_row(
                        format!("charge_cap[{y},{s},{h}]"),
                        vec![(ix.charge[h], 1.0), (charge_cap, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                    ix.gen_rows.push(p.add_row(
                        format!("discharge_cap[{y},{s},{h}]"),
                        vec![(ix.generation[h], 1.0), (cap, -1.0)],
                        Sense::Le,
                        0.0,
                    ));
                }
            }
            TechKind::FlexDemand => {
                for h in 0..h_n {
                    let f = p.add_var(format!("Flex[{y},{s},{h}]"), 0.0, inf, w * t.variable_cost);
                    p.add_row(format!("flex_cap[{y},{s},{h}]"), vec![(f, 1.0), (cap, -1.0)], Sense::Le, 0.0);
                    balance_terms[h].push((f, -1.0));
                    ix.flex.push(f);
                }
                let coeffs = ix.flex.iter().map(|f| (*f, w)).collect();
                ix.flex_energy = Some(p.add_row(format!("flex_energy[{y},{s}]"), coeffs, Sense::Eq, inst.flex_energy));
            }
        }
        techs.push(ix);
    }
    let balance = balance_terms
        .into_iter()
        .enumerate()
        .map(|(h, terms)| p.add_row(format!("balance[{y},{h}]"), terms, Sense::Eq, inst.demand[h]))
        .collect();
    Ok(HourlyLp {
        problem: p,
        balance,
        techs,
    })
}

/// Primal and dual results for one technology. Series that do not apply to
/// the technology's kind are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechResult {
    pub name: String,
    pub kind: TechKind,
    pub fixed_cost: f64,
    pub variable_cost: f64,
    /// [MW]; discharge power for storage, electrolyzer power for flex demand.
    pub capacity: f64,
    /// Potential dual, nonnegative.
    pub omega: f64,
    /// Standing-capacity (and capacity-fix) dual; nonnegative when the lower bound binds.
    pub zeta: f64,
    /// Post-curtailment generation, or storage discharge [MW per represented hour].
    pub generation: Vec<f64>,
    pub curtailment: Vec<f64>,
    /// Hourly capacity factors the solve used (vre).
    pub cf: Vec<f64>,
    /// Capacity-link duals [$ /MWh], nonnegative.
    pub mu: Vec<f64>,
    /// Storage charging or flexible demand.
    pub consumption: Vec<f64>,
    pub soc: Vec<f64>,
    pub energy_capacity: f64,
    pub charge_capacity: f64,
    pub energy_cost: f64,
    pub charge_cost: f64,
}

impl TechResult {
    /// Annual post-curtailment energy [MWh].
    pub fn energy(&self, w: f64) -> f64 {
        w * self.generation.iter().sum::<f64>()
    }

    pub fn pre_curtailment_energy(&self, w: f64) -> f64 {
        w * (self.generation.iter().sum::<f64>() + self.curtailment.iter().sum::<f64>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySolution {
    pub year: i32,
    pub hour_weight: f64,
    pub demand: Vec<f64>,
    pub flex_energy: f64,
    /// Balance duals [$ /MWh].
    pub price: Vec<f64>,
    pub techs: Vec<TechResult>,
    pub objective: f64,
}

impl HourlySolution {
    pub fn hours(&self) -> usize {
        self.demand.len()
    }

    pub fn tech(&self, name: &str) -> Option<&TechResult> {
        self.techs.iter().find(|t| t.name == name)
    }

    /// Total annual demand including flexible demand [MWh].
    pub fn total_demand(&self) -> f64 {
        self.hour_weight * self.demand.iter().sum::<f64>() + self.flex_energy
    }
}

pub fn solve_instance(inst: &HourlyInstance) -> Result<(HourlySolution, MarketStats)> {
    let lp = build_instance(inst)?;
    let sol = lp::solve(&lp.problem)?.into_optimal()?;
    let hs = repackage(inst, &lp, &sol);
    let ms = market_stats(&hs);
    Ok((hs, ms))
}

fn repackage(inst: &HourlyInstance, lp: &HourlyLp, sol: &lp::LpSolution) -> HourlySolution {
    let w = inst.hour_weight;
    let vals = |v: &[VarId]| v.iter().map(|x| sol.value(*x)).collect::<Vec<_>>();
    let techs = inst
        .techs
        .iter()
        .zip(&lp.techs)
        .map(|(t, ix)| {
            let st = t.storage.as_ref();
            let generation = vals(&ix.generation);
            let capacity = ix.capacity.map_or(0.0, |v| sol.value(v));
            let (curtailment, mu_shift) = if t.kind == TechKind::Vre {
                let c = t.cf.iter().zip(&generation).map(|(cf, g)| (cf * capacity - g).max(0.0)).collect();
                (c, t.variable_cost)
            } else {
                (Vec::new(), 0.0)
            };
            TechResult {
                name: t.name.clone(),
                kind: t.kind,
                fixed_cost: t.fixed_cost,
                variable_cost: t.variable_cost,
                capacity,
                omega: ix.potential.map_or(0.0, |r| -sol.dual(r)),
                zeta: ix.standing.map_or(0.0, |r| sol.dual(r)) + ix.fix.map_or(0.0, |r| sol.dual(r)),
                generation: generation.clone(),
                curtailment,
                cf: t.cf.clone(),
                mu: ix.gen_rows.iter().map(|r| -sol.dual(*r) / w - mu_shift).collect(),
                consumption: if t.kind == TechKind::FlexDemand { vals(&ix.flex) } else { vals(&ix.charge) },
                soc: vals(&ix.soc),
                energy_capacity: ix.energy_cap.map_or(0.0, |v| sol.value(v)),
                charge_capacity: ix
                    .charge_cap
                    .or(if t.kind == TechKind::Storage { ix.capacity } else { None })
                    .map_or(0.0, |v| sol.value(v)),
                energy_cost: st.map_or(0.0, |s| s.energy_cost),
                charge_cost: st.and_then(|s| s.charge_cost).unwrap_or(0.0),
            }
        })
        .collect();
    HourlySolution {
        year: inst.year,
        hour_weight: w,
        demand: inst.demand.clone(),
        flex_energy: inst.flex_energy,
        price: lp.balance.iter().map(|r| sol.dual(*r) / w).collect(),
        techs,
        objective: sol.objective,
    }
}

/// Builds the LP for `year` from scenario data and the annual side's inputs.
pub fn build_hourly(s: &Scenario, inputs: &YearInputs) -> Result<LpProblem> {
    Ok(build_instance(&HourlyInstance::from_scenario(s, inputs)?)?.problem)
}

pub fn solve_hourly(s: &Scenario, inputs: &YearInputs) -> Result<(HourlySolution, MarketStats)> {
    solve_instance(&HourlyInstance::from_scenario(s, inputs)?)
}

/// Standing capacity bound: pre-investment capacity grossed up by the early-retirement share.
pub fn standing_bound(pre_investment: f64, early_retirement: f64) -> f64 {
    pre_investment / (1.0 - early_retirement)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two hours, solar with cf [1,0] and gas; unit weight.
    pub fn toy() -> HourlyInstance {
        HourlyInstance {
            year: 2030,
            hour_weight: 1.0,
            demand: vec![1.0, 1.0],
            flex_energy: 0.0,
            techs: vec![
                HourlyTech {
                    name: "solar".into(),
                    kind: TechKind::Vre,
                    fixed_cost: 3.0,
                    variable_cost: 0.0,
                    potential: None,
                    standing_capacity: 0.0,
                    fixed_capacity: None,
                    cf: vec![1.0, 0.0],
                    dispatch_cap: 1.0,
                    storage: None,
                },
                HourlyTech {
                    name: "gas".into(),
                    kind: TechKind::Dispatchable,
                    fixed_cost: 10.0,
                    variable_cost: 5.0,
                    potential: None,
                    standing_capacity: 0.0,
                    fixed_capacity: None,
                    cf: vec![],
                    dispatch_cap: 1.0,
                    storage: None,
                },
            ],
        }
    }

    #[test]
    fn toy_prices_and_objective() {
        let inst = toy();
        let (hs, ms) = solve_instance(&inst).unwrap();
        assert!((hs.price[0] - 3.0).abs() < 1e-9 && (hs.price[1] - 15.0).abs() < 1e-9);
        assert!((hs.objective - 18.0).abs() < 1e-9);
        let oracle = lp::brute_force_solve(&build_instance(&inst).unwrap().problem).unwrap();
        assert!((oracle.objective - 18.0).abs() < 1e-9);
        assert!((ms.mean_price - 9.0).abs() < 1e-9);
    }

    #[test]
    fn standing_capacity_binds() {
        let mut inst = toy();
        inst.demand = vec![3.0, 3.0];
        inst.techs[1].standing_capacity = 5.0;
        let lp = build_instance(&inst).unwrap();
        assert!(lp.problem.row("standing[2030,gas]").is_some());
        let (hs, _) = solve_instance(&inst).unwrap();
        let gas = hs.tech("gas").unwrap();
        assert!((gas.capacity - 5.0).abs() < 1e-9);
        assert!(gas.zeta > 0.0);
    }

    #[test]
    fn flex_rows_only_when_present() {
        let lp = build_instance(&toy()).unwrap();
        assert!(lp.problem.constraints.iter().all(|c| !c.name.starts_with("flex")));
    }

    #[test]
    fn c8_bound() {
        assert!((standing_bound(9.0, 0.1) - 10.0).abs() < 1e-12);
    }
}
