//! Market values, markups, scarcity stripping and residual demand.

use serde::{Deserialize, Serialize};

use super::HourlySolution;
use crate::scenario::TechKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechStats {
    pub name: String,
    pub kind: TechKind,
    pub capacity: f64,
    /// Annual post-curtailment energy (discharge for storage) [MWh].
    pub energy: f64,
    pub pre_curtailment_energy: f64,
    pub market_value: Option<f64>,
    pub market_value_stripped: Option<f64>,
    pub markup: Option<f64>,
    pub markup_stripped: Option<f64>,
    /// Market value is that of a marginal unit because the tech does not run.
    pub marginal: bool,
    /// Realized capacity factor (dispatchables, storage) or mean theoretical
    /// capacity factor (vre).
    pub capacity_factor: Option<f64>,
    pub curtailment_ratio: Option<f64>,
    pub scarcity_generation: f64,
    /// Consumption-weighted price for flex demand and storage charging.
    pub capture_price: Option<f64>,
    pub consumption: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketStats {
    pub year: i32,
    pub hour_weight: f64,
    /// Load-weighted annual average price J.
    pub mean_price: f64,
    pub mean_price_stripped: f64,
    pub arithmetic_mean_price: f64,
    pub scarcity_hour: usize,
    pub scarcity_price: f64,
    pub second_price: f64,
    pub surplus: f64,
    pub peak_residual: f64,
    pub peak_ratio: f64,
    /// Net storage losses as a fraction of total demand.
    pub storage_loss_fraction: f64,
    pub markup_zero_sum: f64,
    pub markup_zero_sum_stripped: f64,
    /// Σ_h λ·load·w, the scale for the zero-sum tolerance.
    pub price_load_sum: f64,
    pub techs: Vec<TechStats>,
}

impl MarketStats {
    pub fn tech(&self, name: &str) -> Option<&TechStats> {
        self.techs.iter().find(|t| t.name == name)
    }

    /// Post-curtailment generation share among dispatchables and vre.
    pub fn generation_share(&self, name: &str) -> f64 {
        let tot: f64 = self.techs.iter().filter(|t| t.kind.is_generator()).map(|t| t.energy).sum();
        match self.tech(name) {
            Some(t) if tot > 0.0 && t.kind.is_generator() => t.energy / tot,
            _ => 0.0,
        }
    }
}

/// Index of the highest price (lowest index on ties) and the second-highest price.
pub(crate) fn scarcity(price: &[f64]) -> (usize, f64, f64) {
    let mut best = 0;
    for (h, p) in price.iter().enumerate() {
        if *p > price[best] {
            best = h;
        }
    }
    let second = price
        .iter()
        .enumerate()
        .filter(|(h, _)| *h != best)
        .map(|(_, p)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    let second = if second.is_finite() { second } else { price[best] };
    (best, price[best], second)
}

/// Hourly load: inflexible demand plus storage charging plus flex demand.
fn hourly_load(hs: &HourlySolution) -> Vec<f64> {
    let mut load = hs.demand.clone();
    for t in &hs.techs {
        if matches!(t.kind, TechKind::Storage | TechKind::FlexDemand) {
            for (l, c) in load.iter_mut().zip(&t.consumption) {
                *l += c;
            }
        }
    }
    load
}

fn weighted(price: &[f64], q: &[f64]) -> Option<f64> {
    let tot: f64 = q.iter().sum();
    (tot > 0.0).then(|| price.iter().zip(q).map(|(p, x)| p * x).sum::<f64>() / tot)
}

/// Peak residual demand [MW] and its ratio to total annual demand.
pub fn peak_residual_demand(hs: &HourlySolution) -> (f64, f64) {
    let mut res = hs.demand.clone();
    for t in &hs.techs {
        if matches!(t.kind, TechKind::Vre | TechKind::Storage) {
            for (r, g) in res.iter_mut().zip(&t.generation) {
                *r -= g;
            }
        }
    }
    let peak = res.iter().copied().fold(0.0, f64::max);
    let total = hs.total_demand();
    (peak, if total > 0.0 { peak / total } else { 0.0 })
}

/// Demand-weighted price paid by a consumer; `None` if it consumes nothing.
pub fn capture_price(price: &[f64], consumption: &[f64]) -> Option<f64> {
    weighted(price, consumption)
}

pub fn market_stats(hs: &HourlySolution) -> MarketStats {
    let w = hs.hour_weight;
    let h_n = hs.hours();
    let (h_scar, top, second) = scarcity(&hs.price);
    let mut stripped = hs.price.clone();
    stripped[h_scar] = second;
    let load = hourly_load(hs);
    let j = weighted(&hs.price, &load).unwrap_or(0.0);
    let j_s = weighted(&stripped, &load).unwrap_or(0.0);
    let total = hs.total_demand();
    let mut charge = 0.0;
    let mut discharge = 0.0;
    let mut zero_sum = 0.0;
    let mut zero_sum_s = 0.0;
    let mut techs = Vec::new();
    for t in &hs.techs {
        let energy = t.energy(w);
        let consumption = w * t.consumption.iter().sum::<f64>();
        let generator = t.kind != TechKind::FlexDemand;
        let mut marginal = false;
        let (mv, mv_s) = if !generator {
            (None, None)
        } else if t.generation.iter().sum::<f64>() > 0.0 {
            (weighted(&hs.price, &t.generation), weighted(&stripped, &t.generation))
        } else {
            marginal = true;
            let weights: Vec<f64> = match t.kind {
                TechKind::Vre => t.cf.clone(),
                _ => hs
                    .price
                    .iter()
                    .map(|p| if *p >= t.variable_cost { 1.0 } else { 0.0 })
                    .collect(),
            };
            (weighted(&hs.price, &weights), weighted(&stripped, &weights))
        };
        let markup = mv.map(|m| m - j);
        let markup_s = mv_s.map(|m| m - j_s);
        if generator && !marginal {
            zero_sum += markup.unwrap_or(0.0) * energy;
            zero_sum_s += markup_s.unwrap_or(0.0) * energy;
        }
        if t.kind == TechKind::Storage {
            charge += consumption;
            discharge += energy;
        }
        let capacity_factor = match t.kind {
            TechKind::Vre => Some(t.cf.iter().sum::<f64>() / h_n as f64),
            TechKind::FlexDemand => None,
            _ => (t.capacity > 0.0).then(|| t.generation.iter().sum::<f64>() / (h_n as f64 * t.capacity)),
        };
        let pre = t.pre_curtailment_energy(w);
        techs.push(TechStats {
            name: t.name.clone(),
            kind: t.kind,
            capacity: t.capacity,
            energy,
            pre_curtailment_energy: pre,
            market_value: mv,
            market_value_stripped: mv_s,
            markup,
            markup_stripped: markup_s,
            marginal,
            capacity_factor,
            curtailment_ratio: (t.kind == TechKind::Vre && pre > 0.0)
                .then(|| w * t.curtailment.iter().sum::<f64>() / pre),
            scarcity_generation: t.generation.get(h_scar).copied().unwrap_or(0.0),
            capture_price: capture_price(&hs.price, &t.consumption),
            consumption,
        });
    }
    let (peak, ratio) = peak_residual_demand(hs);
    MarketStats {
        year: hs.year,
        hour_weight: w,
        mean_price: j,
        mean_price_stripped: j_s,
        arithmetic_mean_price: hs.price.iter().sum::<f64>() / h_n as f64,
        scarcity_hour: h_scar,
        scarcity_price: top,
        second_price: second,
        surplus: top - second,
        peak_residual: peak,
        peak_ratio: ratio,
        storage_loss_fraction: if total > 0.0 { (charge - discharge) / total } else { 0.0 },
        markup_zero_sum: zero_sum,
        markup_zero_sum_stripped: zero_sum_s,
        price_load_sum: w * hs.price.iter().zip(&load).map(|(p, l)| p * l).sum::<f64>(),
        techs,
    }
}
