use serde::{Deserialize, Serialize};

use crate::annual::AnnualSolution;
use crate::hourly::{HourlySolution, MarketStats};
use crate::scenario::TechKind;
use crate::HOURS_PER_YEAR;

pub const ZPR_TOL: f64 = 1e-5;
/// Techs producing less than this share of demand are listed but not enforced.
const MIN_GENERATION_SHARE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Annual,
    Hourly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Tech(String),
    System,
}

/// One zero-profit identity: cost terms on the left, shadow and revenue terms on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZprEntry {
    pub model: Model,
    pub scope: Scope,
    /// `None` for the annual model's sum over years.
    pub year: Option<i32>,
    pub pre_curtailment_lcoe: f64,
    pub curtailment_lcoe: f64,
    /// Curtailment term written as Σ cost·α / Σ usable generation (annual only).
    pub curtailment_lcoe_literal: Option<f64>,
    pub capacity_shadow: f64,
    pub revenue: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub enforced: bool,
}

impl ZprEntry {
    pub fn passes(&self) -> bool {
        !self.enforced || self.relative_residual <= ZPR_TOL
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZprReport {
    pub entries: Vec<ZprEntry>,
}

impl ZprReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(ZprEntry::passes)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.enforced)
            .map(|e| e.relative_residual)
            .fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: ZprReport) {
        self.entries.extend(other.entries);
    }
}

#[allow(clippy::too_many_arguments)]
fn entry(
    model: Model,
    scope: Scope,
    year: Option<i32>,
    cost: f64,
    pre_energy: f64,
    energy: f64,
    literal: Option<f64>,
    shadow: f64,
    revenue: f64,
    enforced: bool,
) -> ZprEntry {
    let pre = if pre_energy > 0.0 { cost / pre_energy } else { 0.0 };
    let total = if energy > 0.0 { cost / energy } else { 0.0 };
    let residual = total - (shadow + revenue);
    ZprEntry {
        model,
        scope,
        year,
        pre_curtailment_lcoe: pre,
        curtailment_lcoe: total - pre,
        curtailment_lcoe_literal: literal,
        capacity_shadow: shadow,
        revenue,
        residual,
        relative_residual: residual.abs() / (1.0 + revenue.abs()),
        enforced,
    }
}

/// Discounted sums over all years, per technology and for the system:
/// cost/Σ δG + curtailment term = −Σ δ((ω − σ + ν)P + γΔP)/Σ δU + Σ δ(λ+η)U/Σ δU.
pub fn annual_zpr(sol: &AnnualSolution) -> ZprReport {
    let demand: f64 = sol.years.iter().map(|y| y.discount * y.demand).sum();
    let mut report = ZprReport::default();
    let mut sys = [0.0; 6];
    for (k, name) in sol.techs.iter().enumerate() {
        // cost, Σ δG, Σ δU, shadow, revenue, Σ δ cost·α
        let mut acc = [0.0; 6];
        for (yi, yr) in sol.years.iter().enumerate() {
            let c = sol.cell(yi, k);
            let d = yr.discount;
            let u = c.usable_generation();
            let cost = d * (c.fixed_cost * c.capacity
                + c.variable_cost * c.generation
                + c.adjustment_factor * c.fixed_cost * c.addition);
            let nu = if c.kind == TechKind::Dispatchable { yr.nu } else { 0.0 };
            acc[0] += cost;
            acc[1] += d * c.generation;
            acc[2] += d * u;
            acc[3] -= d * ((c.omega - c.sigma + nu) * c.capacity + c.gamma * c.addition);
            acc[4] += d * (yr.lambda + c.markup) * u;
            acc[5] += cost * c.curtailment;
        }
        for (s, a) in sys.iter_mut().zip(&acc) {
            *s += a;
        }
        report.entries.push(annual_entry(Scope::Tech(name.clone()), &acc, acc[1] >= MIN_GENERATION_SHARE * demand));
    }
    report.entries.push(annual_entry(Scope::System, &sys, true));
    report
}

fn annual_entry(scope: Scope, acc: &[f64; 6], enforced: bool) -> ZprEntry {
    let per_u = |x: f64| if acc[2] > 0.0 { x / acc[2] } else { 0.0 };
    entry(
        Model::Annual,
        scope,
        None,
        acc[0],
        acc[1],
        acc[2],
        Some(per_u(acc[5])),
        per_u(acc[3]),
        per_u(acc[4]),
        enforced,
    )
}

/// Per technology and system for one hourly year:
/// LCOE = −(ω − ζ)P/ΣG + MV. Storage earns its net arbitrage revenue per
/// discharged MWh; flexible consumers are not producers and are skipped.
pub fn hourly_zpr(hs: &HourlySolution) -> ZprReport {
    let w = hs.hour_weight;
    let total_demand = hs.total_demand();
    let mut report = ZprReport::default();
    let mut sys_cost = 0.0;
    let mut sys_shadow = 0.0;
    let mut sys_energy = 0.0;
    let mut sys_pre = 0.0;
    let mut net_revenue = 0.0;
    for t in &hs.techs {
        if t.kind == TechKind::FlexDemand {
            continue;
        }
        let gen_sum: f64 = t.generation.iter().sum();
        let curt_sum: f64 = t.curtailment.iter().sum();
        let energy = w * gen_sum;
        let pre = w * (gen_sum + curt_sum);
        let cost = t.fixed_cost * t.capacity
            + t.energy_cost * t.energy_capacity
            + if t.kind == TechKind::Storage && t.charge_cost > 0.0 { t.charge_cost * t.charge_capacity } else { 0.0 }
            + w * t.variable_cost * (gen_sum + curt_sum);
        let revenue_total: f64 = w * hs
            .price
            .iter()
            .enumerate()
            .map(|(h, p)| p * (t.generation[h] - t.consumption.get(h).copied().unwrap_or(0.0)))
            .sum::<f64>();
        let shadow_total = -(t.omega - t.zeta) * t.capacity;
        let per = |x: f64| if energy > 0.0 { x / energy } else { 0.0 };
        let enforced = energy >= MIN_GENERATION_SHARE * total_demand;
        report.entries.push(entry(
            Model::Hourly,
            Scope::Tech(t.name.clone()),
            Some(hs.year),
            cost,
            pre,
            energy,
            None,
            per(shadow_total),
            per(revenue_total),
            enforced,
        ));
        sys_cost += cost;
        sys_shadow += shadow_total;
        sys_pre += if t.kind == TechKind::Storage { 0.0 } else { pre };
        if t.kind.is_generator() {
            sys_energy += energy;
        }
        net_revenue += revenue_total;
    }
    let per = |x: f64| if sys_energy > 0.0 { x / sys_energy } else { 0.0 };
    let sys = entry(
        Model::Hourly,
        Scope::System,
        Some(hs.year),
        sys_cost,
        sys_pre,
        sys_energy,
        None,
        per(sys_shadow),
        per(net_revenue),
        true,
    );
    report.entries.push(sys);
    report
}

/// Generation-weighted markup sums (full and stripped), recomputed from the
/// hourly solution alone.
pub fn markup_zero_sum(hs: &HourlySolution) -> (f64, f64) {
    let w = hs.hour_weight;
    let n = hs.price.len();
    let mut load = hs.demand.clone();
    for t in hs.techs.iter().filter(|t| matches!(t.kind, TechKind::Storage | TechKind::FlexDemand)) {
        for h in 0..n {
            load[h] += t.consumption[h];
        }
    }
    let mut top = 0;
    for h in 0..n {
        if hs.price[h] > hs.price[top] {
            top = h;
        }
    }
    let mut second = f64::NEG_INFINITY;
    for h in (0..n).filter(|&h| h != top) {
        second = second.max(hs.price[h]);
    }
    if !second.is_finite() {
        second = hs.price[top];
    }
    let mut stripped = hs.price.clone();
    stripped[top] = second;
    let avg = |p: &[f64], q: &[f64]| -> f64 {
        let tot: f64 = q.iter().sum();
        if tot > 0.0 {
            p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() / tot
        } else {
            0.0
        }
    };
    let j = avg(&hs.price, &load);
    let js = avg(&stripped, &load);
    let mut sum = 0.0;
    let mut sum_s = 0.0;
    for t in hs.techs.iter().filter(|t| t.kind != TechKind::FlexDemand) {
        if t.generation.iter().sum::<f64>() > 0.0 {
            let energy = w * t.generation.iter().sum::<f64>();
            sum += (avg(&hs.price, &t.generation) - j) * energy;
            sum_s += (avg(&stripped, &t.generation) - js) * energy;
        }
    }
    (sum, sum_s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScarcityEntry {
    pub year: i32,
    pub tech: String,
    /// −ν/(φ·8760) from the annual model.
    pub annual_side: f64,
    /// λ_surplus·G_scar/ΣG from the hourly model.
    pub hourly_side: f64,
    pub relative_residual: f64,
}

/// Scarcity-rent equivalence per dispatchable with hourly generation.
/// Only meaningful near convergence.
pub fn scarcity_equivalence(annual: &AnnualSolution, stats: &MarketStats) -> Vec<ScarcityEntry> {
    let Some(yi) = annual.years.iter().position(|y| y.year == stats.year) else {
        return Vec::new();
    };
    let nu = annual.years[yi].nu;
    let mut out = Vec::new();
    for (k, name) in annual.techs.iter().enumerate() {
        let cell = annual.cell(yi, k);
        if cell.kind != TechKind::Dispatchable {
            continue;
        }
        let Some(ts) = stats.tech(name) else { continue };
        if ts.energy <= 0.0 {
            continue;
        }
        // energy is w·ΣG, so G_scar/ΣG = w·G_scar/energy
        let hourly_side = stats.surplus * stats.hour_weight * ts.scarcity_generation / ts.energy;
        let annual_side = -nu / (cell.cf * HOURS_PER_YEAR);
        let scale = annual_side.abs().max(hourly_side.abs());
        out.push(ScarcityEntry {
            year: stats.year,
            tech: name.clone(),
            annual_side,
            hourly_side,
            relative_residual: if scale > 0.0 { (annual_side - hourly_side).abs() / scale } else { 0.0 },
        });
    }
    out
}
