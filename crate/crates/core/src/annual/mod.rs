//! Multi-year annual capacity-expansion model of the power sector.
//!
//! All model years are optimized jointly. Costs are weighted by
//! δ_y = Δy/(1+r)^(y−y0); duals are reported undiscounted by dividing by δ_y.

mod export;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lp::{self, LpProblem, LpSolution, RowId, Sense, VarId};
use crate::scenario::{Scenario, TechKind};
use crate::{Error, Result, HOURS_PER_YEAR};

pub use export::write_annual_csv;

/// Share-responsive markup η(S) = (1 − b·(S − share_ref))·mv − j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkupCurve {
    pub mv: f64,
    pub j: f64,
    pub b: f64,
    pub share_ref: f64,
}

impl MarkupCurve {
    /// A share-independent markup.
    pub fn flat(eta: f64) -> Self {
        MarkupCurve {
            mv: eta,
            j: 0.0,
            b: 0.0,
            share_ref: 0.0,
        }
    }

    pub fn at(&self, share: f64) -> f64 {
        (1.0 - self.b * (share - self.share_ref)) * self.mv - self.j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualTechInputs {
    /// Annual capacity factor φ for the availability row.
    pub cf: f64,
    /// Curtailment ratio α.
    pub curtailment: f64,
    pub markup: Option<MarkupCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualYearInputs {
    /// Right-hand side of the peak constraint on dispatchable capacity [MW].
    pub peak_bound: Option<f64>,
    pub storage_loss: f64,
    pub techs: BTreeMap<String, AnnualTechInputs>,
}

/// Effective coupling quantities, after prefactors, keyed by year.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnualInputs {
    pub years: BTreeMap<i32, AnnualYearInputs>,
}

/// Adjustment cost ε and adjustment factor a for one capacity addition.
pub fn adjustment_cost(dp: f64, dp_prev: f64, c: f64, k: f64, beta: f64, dy: f64) -> Result<(f64, f64)> {
    if !(dp_prev + beta > 0.0) || !(dp_prev / dy + beta > 0.0) {
        return Err(Error::Input("adjustment cost denominator must be positive".into()));
    }
    let diff = dp - dp_prev;
    let eps = c * k * (diff / (dy * dy)).powi(2) / (dp_prev / dy + beta);
    let a = 2.0 * k * diff / ((dp_prev + beta) * dy * dy);
    Ok((eps, a))
}

#[derive(Debug, Clone, Copy, Default)]
struct CellIndex {
    p: Option<VarId>,
    g: Option<VarId>,
    dp: Option<VarId>,
    r: Option<VarId>,
    avail: Option<RowId>,
    potential: Option<RowId>,
    standing_lo: Option<RowId>,
    standing_up: Option<RowId>,
    nearterm: Option<RowId>,
}

pub struct AnnualLp {
    pub problem: LpProblem,
    techs: Vec<usize>,
    cells: Vec<CellIndex>,
    balance: Vec<RowId>,
    peak: Vec<Option<RowId>>,
    params: Vec<CellParams>,
    years: Vec<YearParams>,
}

#[derive(Debug, Clone, Copy)]
struct CellParams {
    cf: f64,
    curtailment: f64,
    markup: Option<MarkupCurve>,
    fixed_cost: f64,
    variable_cost: f64,
    adjustment: f64,
}

#[derive(Debug, Clone, Copy)]
struct YearParams {
    discount: f64,
    demand: f64,
    usable_demand: f64,
    storage_loss: f64,
    peak_bound: Option<f64>,
}

fn tech_inputs<'a>(
    inputs: Option<&'a AnnualInputs>,
    s: &Scenario,
    year: i32,
    name: &str,
) -> Result<Option<&'a AnnualTechInputs>> {
    let Some(inp) = inputs else { return Ok(None) };
    match inp.years.get(&year) {
        Some(y) => y
            .techs
            .get(name)
            .map(Some)
            .ok_or_else(|| Error::Input(format!("signal for {year} has no entry for {name}"))),
        None if s.is_coupled(year) => Err(Error::Input(format!("signal has no entry for coupled year {year}"))),
        None => Ok(None),
    }
}

/// Builds the joint multi-year problem. `adjustment[y][k]` is the adjustment
/// factor a applied to capacity additions (zero when disabled).
fn build(s: &Scenario, inputs: Option<&AnnualInputs>, adjustment: Option<&[Vec<f64>]>) -> Result<AnnualLp> {
    let years = &s.grid.years;
    let gens: Vec<usize> = s.generators().map(|(i, _)| i).collect();
    let n_g = gens.len();
    let mut p = LpProblem::new();
    let inf = f64::INFINITY;
    let mut cells = vec![CellIndex::default(); years.len() * n_g];
    let mut params = Vec::with_capacity(cells.len());
    let mut yparams = Vec::new();
    let mut balance_terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); years.len()];

    for (yi, &y) in years.iter().enumerate() {
        let delta = s.discount_weight(yi);
        let yin = inputs.and_then(|i| i.years.get(&y));
        let loss = yin.map_or(0.0, |v| v.storage_loss);
        let demand = s.annual_demand[yi];
        let usable = demand * (1.0 + loss);
        yparams.push(YearParams {
            discount: delta,
            demand,
            usable_demand: usable,
            storage_loss: loss,
            peak_bound: yin.and_then(|v| v.peak_bound),
        });
        for (k, &ti) in gens.iter().enumerate() {
            let t = &s.technologies[ti];
            let name = &t.name;
            let fuel = s.technologies[ti].fuel_cost[yi];
            let o = t.running_cost(yi, s.co2_price[yi], fuel);
            let c = t.fixed_cost[yi];
            let ti_in = tech_inputs(inputs, s, y, name)?;
            let cf = ti_in.map_or(t.default_cf, |v| v.cf);
            let alpha = ti_in.map_or(0.0, |v| v.curtailment);
            let markup = ti_in.and_then(|v| v.markup);
            let a = adjustment.map_or(0.0, |a| a[yi][k]);
            if !(cf > 0.0 && cf <= 1.0) || !(0.0..1.0).contains(&alpha) {
                return Err(Error::Input(format!("{y}/{name}: capacity factor or curtailment out of range")));
            }
            let mut ix = CellIndex::default();
            let pv = p.add_var(format!("P[{y},{name}]"), 0.0, inf, delta * c);
            let gv = p.add_var(format!("G[{y},{name}]"), 0.0, inf, delta * o);
            let dpv = p.add_var(format!("DP[{y},{name}]"), 0.0, inf, delta * a * c);
            ix.p = Some(pv);
            ix.g = Some(gv);
            ix.dp = Some(dpv);
            if let Some(m) = markup {
                // −δ∫η over usable generation U = (1−α)G, with S = U/D.
                let lin = -delta * ((1.0 + m.b * m.share_ref) * m.mv - m.j) * (1.0 - alpha);
                p.add_obj(gv, lin);
                let q = delta * m.b * m.mv * (1.0 - alpha).powi(2) / usable;
                if q > 0.0 {
                    p.set_quadratic(gv, q);
                }
            }
            balance_terms[yi].push((gv, 1.0 - alpha));
            ix.avail = Some(p.add_row(
                format!("avail[{y},{name}]"),
                vec![(gv, 1.0), (pv, -HOURS_PER_YEAR * cf)],
                Sense::Eq,
                0.0,
            ));
            if let Some(psi) = t.potential {
                ix.potential = Some(p.add_row(format!("potential[{y},{name}]"), vec![(pv, 1.0)], Sense::Le, psi));
            }
            if let Some(&sc) = t.standing_capacity.get(&y) {
                ix.standing_lo = Some(p.add_row(format!("standing_lo[{y},{name}]"), vec![(pv, 1.0)], Sense::Ge, sc));
                ix.standing_up =
                    Some(p.add_row(format!("standing_up[{y},{name}]"), vec![(pv, 1.0)], Sense::Le, 1.05 * sc));
            }
            if let Some(&q) = t.nearterm_add_cap.get(&y) {
                ix.nearterm = Some(p.add_row(format!("nearterm[{y},{name}]"), vec![(dpv, 1.0)], Sense::Le, q));
            }
            if yi > 0 {
                ix.r = Some(p.add_var(format!("R[{y},{name}]"), 0.0, inf, 0.0));
            }
            cells[yi * n_g + k] = ix;
            params.push(CellParams {
                cf,
                curtailment: alpha,
                markup,
                fixed_cost: c,
                variable_cost: o,
                adjustment: a,
            });
        }
    }

    // Vintage stock: P_k = P_{k−1} + ΔP_k − R_k − (vintages reaching end of life in (y_{k−1}, y_k]).
    for (k, &ti) in gens.iter().enumerate() {
        let t = &s.technologies[ti];
        let life = t.lifetime as i32;
        for (yi, &y) in years.iter().enumerate() {
            let cell = cells[yi * n_g + k];
            let mut coeffs = vec![(cell.p.unwrap(), 1.0), (cell.dp.unwrap(), -1.0)];
            if yi > 0 {
                let prev = cells[(yi - 1) * n_g + k];
                let y_prev = years[yi - 1];
                coeffs.push((prev.p.unwrap(), -1.0));
                coeffs.push((cell.r.unwrap(), 1.0));
                for (j, &yj) in years.iter().enumerate().take(yi) {
                    if y_prev < yj + life && yj + life <= y {
                        coeffs.push((cells[j * n_g + k].dp.unwrap(), 1.0));
                    }
                }
                let cap = (s.early_retirement_cap * (y - y_prev) as f64).min(1.0);
                p.add_row(
                    format!("retire[{y},{}]", t.name),
                    vec![(cell.r.unwrap(), 1.0), (prev.p.unwrap(), -cap)],
                    Sense::Le,
                    0.0,
                );
            }
            p.add_row(format!("stock[{y},{}]", t.name), coeffs, Sense::Eq, 0.0);
        }
    }

    let balance = balance_terms
        .into_iter()
        .enumerate()
        .map(|(yi, terms)| {
            p.add_row(
                format!("balance[{}]", years[yi]),
                terms,
                Sense::Eq,
                yparams[yi].usable_demand,
            )
        })
        .collect();

    let mut peak = vec![None; years.len()];
    for (yi, &y) in years.iter().enumerate() {
        if let Some(bound) = yparams[yi].peak_bound {
            let coeffs: Vec<(VarId, f64)> = gens
                .iter()
                .enumerate()
                .filter(|(_, &ti)| s.technologies[ti].kind == TechKind::Dispatchable)
                .map(|(k, _)| (cells[yi * n_g + k].p.unwrap(), 1.0))
                .collect();
            if !coeffs.is_empty() && bound > 0.0 {
                peak[yi] = Some(p.add_row(format!("peak[{y}]"), coeffs, Sense::Ge, bound));
            }
        }
    }

    Ok(AnnualLp {
        problem: p,
        techs: gens,
        cells,
        balance,
        peak,
        params,
        years: yparams,
    })
}

/// The joint problem for `s` under an optional coupling signal.
pub fn build_annual(s: &Scenario, inputs: Option<&AnnualInputs>) -> Result<LpProblem> {
    Ok(build(s, inputs, None)?.problem)
}

/// Results for one (year, technology).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualCell {
    pub year: i32,
    pub tech: String,
    pub kind: TechKind,
    /// [MW]
    pub capacity: f64,
    /// Pre-curtailment generation [MWh].
    pub generation: f64,
    pub addition: f64,
    pub retirement: f64,
    pub fixed_cost: f64,
    pub variable_cost: f64,
    pub cf: f64,
    pub curtailment: f64,
    /// Effective markup at the solution, zero when uncoupled.
    pub markup: f64,
    pub adjustment_factor: f64,
    pub mu: f64,
    pub omega: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub xi: f64,
}

impl AnnualCell {
    pub fn usable_generation(&self) -> f64 {
        (1.0 - self.curtailment) * self.generation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualYear {
    pub year: i32,
    pub discount: f64,
    pub demand: f64,
    /// Demand grossed up by storage losses.
    pub usable_demand: f64,
    pub storage_loss: f64,
    pub lambda: f64,
    /// Peak-constraint dual, nonpositive.
    pub nu: f64,
    pub peak_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSolution {
    pub techs: Vec<String>,
    pub years: Vec<AnnualYear>,
    /// Year-major: `cells[yi * techs.len() + k]`.
    pub cells: Vec<AnnualCell>,
    pub objective: f64,
    pub adjustment_passes: usize,
}

impl AnnualSolution {
    pub fn cell(&self, yi: usize, k: usize) -> &AnnualCell {
        &self.cells[yi * self.techs.len() + k]
    }

    pub fn find(&self, year: i32, tech: &str) -> Option<&AnnualCell> {
        self.cells.iter().find(|c| c.year == year && c.tech == tech)
    }

    pub fn year_cells(&self, yi: usize) -> &[AnnualCell] {
        let n = self.techs.len();
        &self.cells[yi * n..(yi + 1) * n]
    }

    /// Usable-generation share of tech `k` in year `yi`.
    pub fn share(&self, yi: usize, k: usize) -> f64 {
        let tot: f64 = self.year_cells(yi).iter().map(|c| c.usable_generation()).sum();
        if tot > 0.0 {
            self.cell(yi, k).usable_generation() / tot
        } else {
            0.0
        }
    }
}

fn repackage(s: &Scenario, lp: &AnnualLp, sol: &LpSolution, passes: usize) -> AnnualSolution {
    let n_g = lp.techs.len();
    let years: Vec<AnnualYear> = s
        .grid
        .years
        .iter()
        .enumerate()
        .map(|(yi, &y)| {
            let yp = lp.years[yi];
            AnnualYear {
                year: y,
                discount: yp.discount,
                demand: yp.demand,
                usable_demand: yp.usable_demand,
                storage_loss: yp.storage_loss,
                lambda: sol.dual(lp.balance[yi]) / yp.discount,
                nu: lp.peak[yi].map_or(0.0, |r| -sol.dual(r) / yp.discount),
                peak_bound: yp.peak_bound,
            }
        })
        .collect();
    let mut cells = Vec::with_capacity(lp.cells.len());
    for (yi, yr) in years.iter().enumerate() {
        let d = yr.discount;
        for (k, &ti) in lp.techs.iter().enumerate() {
            let ix = lp.cells[yi * n_g + k];
            let pr = lp.params[yi * n_g + k];
            let t = &s.technologies[ti];
            let g = sol.value(ix.g.unwrap());
            let dual = |r: Option<RowId>| r.map_or(0.0, |r| sol.dual(r));
            let share = (1.0 - pr.curtailment) * g / yr.usable_demand;
            cells.push(AnnualCell {
                year: yr.year,
                tech: t.name.clone(),
                kind: t.kind,
                capacity: sol.value(ix.p.unwrap()),
                generation: g,
                addition: sol.value(ix.dp.unwrap()),
                retirement: ix.r.map_or(0.0, |v| sol.value(v)),
                fixed_cost: pr.fixed_cost,
                variable_cost: pr.variable_cost,
                cf: pr.cf,
                curtailment: pr.curtailment,
                markup: pr.markup.map_or(0.0, |m| m.at(share)),
                adjustment_factor: pr.adjustment,
                mu: -dual(ix.avail) / d,
                omega: -dual(ix.potential) / d,
                sigma: (dual(ix.standing_lo) + dual(ix.standing_up)) / d,
                gamma: -dual(ix.nearterm) / d,
                xi: sol.reduced_costs[ix.g.unwrap().0] / d,
            });
        }
    }
    AnnualSolution {
        techs: lp.techs.iter().map(|&ti| s.technologies[ti].name.clone()).collect(),
        years,
        cells,
        objective: sol.objective,
        adjustment_passes: passes,
    }
}

const ADJUSTMENT_MAX_PASSES: usize = 10;
const ADJUSTMENT_TOL: f64 = 1e-4;

fn adjustment_factors(s: &Scenario, gens: &[usize], sol: &AnnualSolution) -> Result<Vec<Vec<f64>>> {
    let years = &s.grid.years;
    let mut out = vec![vec![0.0; gens.len()]; years.len()];
    for yi in 1..years.len() {
        let dy = (years[yi] - years[yi - 1]) as f64;
        for (k, &ti) in gens.iter().enumerate() {
            let t = &s.technologies[ti];
            if t.adjustment_k == 0.0 {
                continue;
            }
            let dp = sol.cell(yi, k).addition;
            let dp_prev = sol.cell(yi - 1, k).addition;
            let c = sol.cell(yi, k).fixed_cost;
            out[yi][k] = adjustment_cost(dp, dp_prev, c, t.adjustment_k, t.adjustment_beta, dy)?.1;
        }
    }
    Ok(out)
}

/// Solves the annual model. With adjustment costs enabled, the adjustment
/// factor is re-evaluated at each solution and fed back as a linear cost on
/// additions until additions settle.
pub fn solve_annual(s: &Scenario, inputs: Option<&AnnualInputs>) -> Result<AnnualSolution> {
    let lp0 = build(s, inputs, None)?;
    let sol0 = lp::solve(&lp0.problem)?.into_optimal()?;
    let mut current = repackage(s, &lp0, &sol0, 1);
    if !s.features.adjustment_cost_enabled {
        return Ok(current);
    }
    for pass in 2..=ADJUSTMENT_MAX_PASSES {
        let a = adjustment_factors(s, &lp0.techs, &current)?;
        let lp = build(s, inputs, Some(&a))?;
        let sol = lp::solve(&lp.problem)?.into_optimal()?;
        let next = repackage(s, &lp, &sol, pass);
        let num: f64 = next
            .cells
            .iter()
            .zip(&current.cells)
            .map(|(a, b)| (a.addition - b.addition).powi(2))
            .sum::<f64>()
            .sqrt();
        let den: f64 = next.cells.iter().map(|c| c.addition.powi(2)).sum::<f64>().sqrt();
        current = next;
        if num <= ADJUSTMENT_TOL * den.max(1.0) {
            break;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests;
