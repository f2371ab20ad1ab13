//! Scenario configuration: technologies, time grid, demand and policy paths.

pub mod costs;
pub mod profiles;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, HOURS_PER_YEAR};
pub use costs::fit_fuel_cost;
pub use profiles::{rescale_demand, rescale_vre_cf, HourlyProfiles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechKind {
    Dispatchable,
    Vre,
    Storage,
    FlexDemand,
}

impl TechKind {
    /// Generators appear in both models; storage and flexible demand only hourly.
    pub fn is_generator(self) -> bool {
        matches!(self, TechKind::Dispatchable | TechKind::Vre)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub years: Vec<i32>,
    pub step_years: Vec<u32>,
    pub hours: usize,
}

impl TimeGrid {
    pub fn hour_weight(&self) -> f64 {
        HOURS_PER_YEAR / self.hours as f64
    }

    pub fn index_of(&self, year: i32) -> Option<usize> {
        self.years.iter().position(|&y| y == year)
    }

    fn validate(&self) -> Result<()> {
        if self.years.is_empty() {
            return Err(Error::Invariant("years must not be empty".into()));
        }
        if self.years.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invariant("years must be strictly increasing".into()));
        }
        if self.step_years.len() != self.years.len() || self.step_years.contains(&0) {
            return Err(Error::Invariant("step_years must be >= 1 for every year".into()));
        }
        if self.hours == 0 || self.hours > 8760 {
            return Err(Error::Invariant("hours must lie in 1..=8760".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageParams {
    /// Annuitized cost of energy capacity [$ /MWh-yr].
    pub energy_cost: Vec<f64>,
    /// Annuitized cost of a separate charging capacity [$ /MW-yr]; `None` means
    /// charging shares the discharge power capacity.
    pub charge_cost: Option<Vec<f64>>,
    pub roundtrip_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechnologySpec {
    pub name: String,
    pub kind: TechKind,
    /// Annuitized fixed cost per year [$ /MW-yr].
    pub fixed_cost: Vec<f64>,
    /// Variable O&M per year [$ /MWh_el].
    pub variable_cost: Vec<f64>,
    /// Fuel price per year [$ /MWh_th].
    pub fuel_cost: Vec<f64>,
    pub efficiency: f64,
    /// [tCO2 / MWh_th]
    pub co2_intensity: f64,
    pub potential: Option<f64>,
    pub lifetime: u32,
    pub max_annual_cf: f64,
    /// Annual capacity factor used by the annual model before any hourly feedback.
    /// For vre and hydro this is the mean theoretical capacity factor.
    pub default_cf: f64,
    pub standing_capacity: BTreeMap<i32, f64>,
    pub nearterm_add_cap: BTreeMap<i32, f64>,
    pub grid_cost_per_mwh: f64,
    /// Hourly CSV column holding the capacity-factor shape (vre only).
    pub profile: Option<String>,
    /// Upper bound on any hourly capacity factor (hydro: 0.9).
    pub hourly_cf_cap: Option<f64>,
    pub adjustment_k: f64,
    pub adjustment_beta: f64,
    pub storage: Option<StorageParams>,
}

impl TechnologySpec {
    /// Running cost per MWh_el: O&M, fuel, CO2 and grid.
    pub fn running_cost(&self, year_idx: usize, co2_price: f64, fuel: f64) -> f64 {
        self.variable_cost[year_idx]
            + fuel / self.efficiency
            + co2_price * self.co2_intensity / self.efficiency
            + self.grid_cost_per_mwh
    }

    pub fn is_wind(&self) -> bool {
        self.name.starts_with("wind")
    }

    pub fn is_offshore(&self) -> bool {
        self.name == "wind_offshore"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Features {
    pub storage_enabled: bool,
    pub flex_enabled: bool,
    pub adjustment_cost_enabled: bool,
    pub offshore_fix_enabled: bool,
}

impl Default for Features {
    fn default() -> Self {
        Features {
            storage_enabled: false,
            flex_enabled: false,
            adjustment_cost_enabled: false,
            offshore_fix_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefactorParams {
    /// Multiplier on the derived markup ratio b.
    pub markup_b_scale: f64,
    /// b_peak per model year.
    pub b_peak: Vec<f64>,
    /// Slope of the capacity-factor prefactor (0.5 in the heuristic).
    pub cf_slope: f64,
    /// Lower clamp ε_φ on effective dispatchable capacity factors.
    pub cf_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Termination {
    pub max_iters: usize,
    pub share_tol: f64,
    pub min_iters: usize,
}

impl Default for Termination {
    fn default() -> Self {
        Termination {
            max_iters: 30,
            share_tol: 0.05,
            min_iters: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub technologies: Vec<TechnologySpec>,
    pub grid: TimeGrid,
    /// Total electricity demand per year, including flexible electrolysis [MWh/yr].
    pub annual_demand: Vec<f64>,
    pub flex_demand_energy: Vec<f64>,
    pub co2_price: Vec<f64>,
    pub interest_rate: f64,
    pub features: Features,
    pub prefactors: PrefactorParams,
    pub termination: Termination,
    pub early_retirement_cap: f64,
    pub coupled_years: Vec<i32>,
    pub profiles: HourlyProfiles,
    /// Where the profiles came from; kept so that `save` can reference them.
    pub profiles_path: Option<PathBuf>,
}

impl Scenario {
    pub fn tech(&self, name: &str) -> Option<&TechnologySpec> {
        self.technologies.iter().find(|t| t.name == name)
    }

    pub fn generators(&self) -> impl Iterator<Item = (usize, &TechnologySpec)> {
        self.technologies.iter().enumerate().filter(|(_, t)| t.kind.is_generator())
    }

    /// Technologies participating in the hourly model under the current feature flags.
    pub fn hourly_techs(&self) -> impl Iterator<Item = (usize, &TechnologySpec)> {
        let f = self.features;
        self.technologies.iter().enumerate().filter(move |(_, t)| match t.kind {
            TechKind::Storage => f.storage_enabled,
            TechKind::FlexDemand => f.flex_enabled,
            _ => true,
        })
    }

    /// Discount-and-duration weight δ_y = Δy / (1+r)^(y−y0).
    pub fn discount_weight(&self, year_idx: usize) -> f64 {
        let y0 = self.grid.years[0];
        let dy = self.grid.step_years[year_idx] as f64;
        dy / (1.0 + self.interest_rate).powi(self.grid.years[year_idx] - y0)
    }

    /// Flexible electrolysis energy in year `y`, zero when the feature is off.
    pub fn flex_energy(&self, year_idx: usize) -> f64 {
        if self.features.flex_enabled {
            self.flex_demand_energy[year_idx]
        } else {
            0.0
        }
    }

    pub fn is_coupled(&self, year: i32) -> bool {
        self.coupled_years.contains(&year)
    }

    /// Fuel prices passed to the hourly model: the least-squares line through the raw series.
    pub fn fitted_fuel_cost(&self, tech_idx: usize) -> Vec<f64> {
        fit_fuel_cost(&self.grid.years, &self.technologies[tech_idx].fuel_cost)
    }

    /// Hourly profiles resampled to the scenario's `H`.
    pub fn resampled_profiles(&self) -> Result<HourlyProfiles> {
        self.profiles.resample(self.grid.hours)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.years.len();
        let check_len = |name: &str, v: &[f64]| -> Result<()> {
            if v.len() != n {
                return Err(Error::Invariant(format!("{name} must have one value per year")));
            }
            Ok(())
        };
        check_len("annual_demand", &self.annual_demand)?;
        check_len("flex_demand_energy", &self.flex_demand_energy)?;
        check_len("co2_price", &self.co2_price)?;
        check_len("prefactors.b_peak", &self.prefactors.b_peak)?;
        if self.annual_demand.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Invariant("annual_demand must be > 0".into()));
        }
        if self.flex_demand_energy.iter().zip(&self.annual_demand).any(|(f, d)| !(*f >= 0.0 && f < d)) {
            return Err(Error::Invariant("flex_demand_energy must be >= 0 and below annual_demand".into()));
        }
        if self.co2_price.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Invariant("co2_price must be >= 0".into()));
        }
        if !(self.interest_rate > 0.0 && self.interest_rate < 1.0) {
            return Err(Error::Invariant("interest_rate must lie in (0,1)".into()));
        }
        let t = &self.termination;
        if !(t.share_tol > 0.0 && t.share_tol < 1.0) {
            return Err(Error::Invariant("share_tol must lie in (0,1)".into()));
        }
        if t.max_iters == 0 {
            return Err(Error::Invariant("max_iters must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.early_retirement_cap) {
            return Err(Error::Invariant("early_retirement_cap must lie in [0,1]".into()));
        }
        for y in &self.coupled_years {
            if self.grid.index_of(*y).is_none() {
                return Err(Error::Invariant(format!("coupled year {y} is not a model year")));
            }
        }
        self.profiles.validate()?;
        if self.profiles.len() < self.grid.hours {
            return Err(Error::Invariant("hourly profiles are shorter than hours".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for tech in &self.technologies {
            let nm = &tech.name;
            if !names.insert(nm.clone()) {
                return Err(Error::Invariant(format!("duplicate technology {nm}")));
            }
            for (label, v) in [
                ("fixed_cost", &tech.fixed_cost),
                ("variable_cost", &tech.variable_cost),
                ("fuel_cost", &tech.fuel_cost),
            ] {
                check_len(&format!("{nm}.{label}"), v)?;
                if v.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    return Err(Error::Invariant(format!("{nm}: all costs must be >= 0")));
                }
            }
            if !(tech.efficiency > 0.0 && tech.efficiency <= 1.0) {
                return Err(Error::Invariant(format!("{nm}: efficiency must lie in (0,1]")));
            }
            if !(0.0..=1.0).contains(&tech.max_annual_cf) || !(0.0..=1.0).contains(&tech.default_cf) {
                return Err(Error::Invariant(format!("{nm}: capacity factors must lie in [0,1]")));
            }
            if tech.potential.is_some_and(|p| !(p >= 0.0)) {
                return Err(Error::Invariant(format!("{nm}: potential must be >= 0")));
            }
            if tech.co2_intensity < 0.0 || tech.grid_cost_per_mwh < 0.0 {
                return Err(Error::Invariant(format!("{nm}: all costs must be >= 0")));
            }
            if tech.lifetime == 0 {
                return Err(Error::Invariant(format!("{nm}: lifetime must be >= 1")));
            }
            match tech.kind {
                TechKind::Vre => {
                    let col = tech.profile.as_deref().ok_or_else(|| {
                        Error::Invariant(format!("{nm}: vre technology needs a profile column"))
                    })?;
                    if self.profiles.cf(col).is_none() {
                        return Err(Error::Invariant(format!("{nm}: unknown profile column {col}")));
                    }
                    if !(tech.default_cf > 0.0) {
                        return Err(Error::Invariant(format!("{nm}: vre default_cf must be > 0")));
                    }
                }
                TechKind::Storage => {
                    let s = tech.storage.as_ref().ok_or_else(|| {
                        Error::Invariant(format!("{nm}: storage technology needs storage parameters"))
                    })?;
                    if !(s.roundtrip_efficiency > 0.0 && s.roundtrip_efficiency <= 1.0) {
                        return Err(Error::Invariant(format!("{nm}: roundtrip_efficiency must lie in (0,1]")));
                    }
                    check_len(&format!("{nm}.storage.energy_cost"), &s.energy_cost)?;
                    if let Some(c) = &s.charge_cost {
                        check_len(&format!("{nm}.storage.charge_cost"), c)?;
                    }
                }
                TechKind::Dispatchable => {
                    if !(tech.default_cf > 0.0) {
                        return Err(Error::Invariant(format!("{nm}: dispatchable default_cf must be > 0")));
                    }
                }
                TechKind::FlexDemand => {}
            }
        }
        if self.technologies.iter().filter(|t| t.kind == TechKind::FlexDemand).count() > 1 {
            return Err(Error::Invariant("at most one flex_demand technology is supported".into()));
        }
        if self.features.flex_enabled
            && !self.technologies.iter().any(|t| t.kind == TechKind::FlexDemand)
            && self.flex_demand_energy.iter().any(|f| *f > 0.0)
        {
            return Err(Error::Invariant("flex demand enabled without a flex_demand technology".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File format

/// A per-year quantity given either as one value for all years or as a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YearValues {
    Scalar(f64),
    Series(Vec<f64>),
}

impl YearValues {
    fn resolve(&self, n: usize, field: &str) -> Result<Vec<f64>> {
        match self {
            YearValues::Scalar(v) => Ok(vec![*v; n]),
            YearValues::Series(v) if v.len() == n => Ok(v.clone()),
            YearValues::Series(v) => Err(Error::Schema {
                field: field.to_string(),
                message: format!("expected {n} values (one per year), got {}", v.len()),
            }),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_cost: Option<YearValues>,
    /// Overnight cost of energy capacity [$ /kWh].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_overnight_cost: Option<YearValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge_cost: Option<YearValues>,
    /// Overnight cost of separate charging capacity [$ /kW].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge_overnight_cost: Option<YearValues>,
    pub roundtrip_efficiency: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyFile {
    pub name: String,
    pub kind: TechKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_cost: Option<YearValues>,
    /// Overnight capital cost [$ /kW].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overnight_cost: Option<YearValues>,
    /// Fixed O&M [$ /kW-yr].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omf: Option<YearValues>,
    /// Fixed O&M as a share of overnight cost, used when `omf` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omf_share: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variable_cost: Option<YearValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuel_cost: Option<YearValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub co2_intensity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_annual_cf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default_cf: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub standing_capacity: BTreeMap<i32, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nearterm_add_cap: BTreeMap<i32, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_cost_per_mwh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hourly_cf_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjustment_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjustment_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageFile>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefactorFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markup_b_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_peak: Option<YearValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cf_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cf_floor: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub years: Vec<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_years: Option<Vec<u32>>,
    pub hours: usize,
    /// Hourly CSV, relative to the scenario file.
    pub profiles: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_year: Option<String>,
    pub interest_rate: f64,
    pub annual_demand: YearValues,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flex_demand_energy: Option<YearValues>,
    pub co2_price: YearValues,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_retirement_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupled_years: Option<Vec<i32>>,
    #[serde(default)]
    pub features: Features,
    #[serde(default)]
    pub prefactors: PrefactorFile,
    #[serde(default)]
    pub termination: Termination,
    pub technologies: Vec<TechnologyFile>,
}

/// Default step lengths: the distance to the next year, the last step repeating the previous one.
pub fn default_steps(years: &[i32]) -> Vec<u32> {
    let n = years.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                (years[i + 1] - years[i]) as u32
            } else if n >= 2 {
                (years[n - 1] - years[n - 2]) as u32
            } else {
                1
            }
        })
        .collect()
}

/// b_peak rising linearly from `start` in the first year to `end` in the last.
pub fn ramp(years: &[i32], start: f64, end: f64) -> Vec<f64> {
    let (y0, y1) = (years[0], *years.last().unwrap());
    years
        .iter()
        .map(|&y| {
            if y1 == y0 {
                start
            } else {
                start + (end - start) * (y - y0) as f64 / (y1 - y0) as f64
            }
        })
        .collect()
}

impl TechnologyFile {
    /// A technology with every optional field left to its default.
    pub fn new(name: &str, kind: TechKind) -> Self {
        TechnologyFile {
            name: name.to_string(),
            kind,
            fixed_cost: None,
            overnight_cost: None,
            omf: None,
            omf_share: None,
            variable_cost: None,
            fuel_cost: None,
            efficiency: None,
            co2_intensity: None,
            potential: None,
            lifetime: None,
            max_annual_cf: None,
            default_cf: None,
            standing_capacity: BTreeMap::new(),
            nearterm_add_cap: BTreeMap::new(),
            grid_cost_per_mwh: None,
            profile: None,
            hourly_cf_cap: None,
            adjustment_k: None,
            adjustment_beta: None,
            storage: None,
        }
    }
}

fn resolve_tech(f: &TechnologyFile, years: &[i32], rate: f64) -> Result<TechnologySpec> {
    let n = years.len();
    let field = |s: &str| format!("technologies.{}.{s}", f.name);
    let anchor = costs::default_costs(&f.name);
    let lifetime = f.lifetime.or(anchor.map(|a| a.lifetime)).unwrap_or(30);
    let per_year = |v: &Option<YearValues>, name: &str, default: f64| -> Result<Vec<f64>> {
        match v {
            Some(v) => v.resolve(n, &field(name)),
            None => Ok(vec![default; n]),
        }
    };
    let overnight: Option<Vec<f64>> = match (&f.overnight_cost, anchor) {
        (Some(v), _) => Some(v.resolve(n, &field("overnight_cost"))?),
        (None, Some(a)) => Some(years.iter().map(|&y| costs::interpolate_anchor(a.overnight, y)).collect()),
        (None, None) => None,
    };
    let fixed_cost = match (&f.fixed_cost, &overnight) {
        (Some(v), _) => v.resolve(n, &field("fixed_cost"))?,
        (None, Some(inv)) => {
            let omf: Vec<f64> = match (&f.omf, f.omf_share, anchor) {
                (Some(v), _, _) => v.resolve(n, &field("omf"))?,
                (None, Some(share), _) => inv.iter().map(|i| i * share).collect(),
                (None, None, Some(a)) if f.overnight_cost.is_none() => {
                    years.iter().map(|&y| costs::interpolate_anchor(a.omf, y)).collect()
                }
                _ => vec![0.0; n],
            };
            inv.iter()
                .zip(&omf)
                .map(|(i, o)| costs::annualized_fixed_cost(*i, *o, rate, lifetime as f64))
                .collect()
        }
        (None, None) => {
            return Err(Error::Schema {
                field: field("fixed_cost"),
                message: "missing (give fixed_cost or overnight_cost)".into(),
            })
        }
    };
    let variable_cost = per_year(&f.variable_cost, "variable_cost", anchor.map_or(0.0, |a| a.omv))?;
    let fuel_cost = per_year(&f.fuel_cost, "fuel_cost", 0.0)?;
    let nuclear = f.name.contains("nuclear");
    let max_annual_cf = f.max_annual_cf.unwrap_or(match f.kind {
        TechKind::Dispatchable if nuclear => 0.85,
        TechKind::Dispatchable => 0.80,
        _ => 1.0,
    });
    let profile = f.profile.clone().or_else(|| match f.kind {
        TechKind::Vre => Some(format!("{}_cf", f.name)),
        _ => None,
    });
    let hourly_cf_cap = f
        .hourly_cf_cap
        .or(if f.name == "hydro" { Some(0.9) } else { None });
    let storage = match (&f.storage, f.kind) {
        (Some(s), _) => {
            let energy_cost = match (&s.energy_cost, &s.energy_overnight_cost) {
                (Some(v), _) => v.resolve(n, &field("storage.energy_cost"))?,
                (None, Some(v)) => v
                    .resolve(n, &field("storage.energy_overnight_cost"))?
                    .iter()
                    .map(|i| costs::annualized_fixed_cost(*i, 0.0, rate, lifetime as f64))
                    .collect(),
                (None, None) => {
                    return Err(Error::Schema {
                        field: field("storage.energy_cost"),
                        message: "missing (give energy_cost or energy_overnight_cost)".into(),
                    })
                }
            };
            let charge_cost = match (&s.charge_cost, &s.charge_overnight_cost) {
                (Some(v), _) => Some(v.resolve(n, &field("storage.charge_cost"))?),
                (None, Some(v)) => Some(
                    v.resolve(n, &field("storage.charge_overnight_cost"))?
                        .iter()
                        .map(|i| costs::annualized_fixed_cost(*i, 0.0, rate, lifetime as f64))
                        .collect(),
                ),
                (None, None) => None,
            };
            Some(StorageParams {
                energy_cost,
                charge_cost,
                roundtrip_efficiency: s.roundtrip_efficiency,
            })
        }
        (None, TechKind::Storage) => {
            return Err(Error::Schema {
                field: field("storage"),
                message: "missing for a storage technology".into(),
            })
        }
        (None, _) => None,
    };
    Ok(TechnologySpec {
        name: f.name.clone(),
        kind: f.kind,
        fixed_cost,
        variable_cost,
        fuel_cost,
        efficiency: f.efficiency.unwrap_or(1.0),
        co2_intensity: f.co2_intensity.unwrap_or(0.0),
        potential: f.potential,
        lifetime,
        max_annual_cf,
        default_cf: f.default_cf.unwrap_or(max_annual_cf),
        standing_capacity: f.standing_capacity.clone(),
        nearterm_add_cap: f.nearterm_add_cap.clone(),
        grid_cost_per_mwh: f.grid_cost_per_mwh.unwrap_or(0.0),
        profile,
        hourly_cf_cap,
        adjustment_k: f.adjustment_k.unwrap_or(1.0),
        adjustment_beta: f.adjustment_beta.unwrap_or(1.0),
        storage,
    })
}

impl ScenarioFile {
    /// Resolves defaults against already-loaded profiles.
    pub fn resolve(&self, profiles: HourlyProfiles, profiles_path: Option<PathBuf>) -> Result<Scenario> {
        let years = self.years.clone();
        let n = years.len();
        if n == 0 {
            return Err(Error::Schema {
                field: "years".into(),
                message: "must not be empty".into(),
            });
        }
        let step_years = self.step_years.clone().unwrap_or_else(|| default_steps(&years));
        let technologies = self
            .technologies
            .iter()
            .map(|t| resolve_tech(t, &years, self.interest_rate))
            .collect::<Result<Vec<_>>>()?;
        let b_peak = match &self.prefactors.b_peak {
            Some(v) => v.resolve(n, "prefactors.b_peak")?,
            None => ramp(&years, 0.5, 1.0),
        };
        let s = Scenario {
            name: self.name.clone(),
            technologies,
            annual_demand: self.annual_demand.resolve(n, "annual_demand")?,
            flex_demand_energy: match &self.flex_demand_energy {
                Some(v) => v.resolve(n, "flex_demand_energy")?,
                None => vec![0.0; n],
            },
            co2_price: self.co2_price.resolve(n, "co2_price")?,
            interest_rate: self.interest_rate,
            features: self.features,
            prefactors: PrefactorParams {
                markup_b_scale: self.prefactors.markup_b_scale.unwrap_or(1.0),
                b_peak,
                cf_slope: self.prefactors.cf_slope.unwrap_or(0.5),
                cf_floor: self.prefactors.cf_floor.unwrap_or(0.01),
            },
            termination: self.termination,
            early_retirement_cap: self.early_retirement_cap.unwrap_or(0.09),
            coupled_years: self.coupled_years.clone().unwrap_or_else(|| years.clone()),
            grid: TimeGrid {
                years,
                step_years,
                hours: self.hours,
            },
            profiles,
            profiles_path,
        };
        s.validate()?;
        Ok(s)
    }
}

impl Scenario {
    /// Canonical file form: every per-year quantity written out as an explicit series.
    pub fn to_file(&self, profiles_ref: &str) -> ScenarioFile {
        let series = |v: &[f64]| YearValues::Series(v.to_vec());
        ScenarioFile {
            name: self.name.clone(),
            years: self.grid.years.clone(),
            step_years: Some(self.grid.step_years.clone()),
            hours: self.grid.hours,
            profiles: profiles_ref.to_string(),
            base_year: Some(self.profiles.base_year.clone()),
            interest_rate: self.interest_rate,
            annual_demand: series(&self.annual_demand),
            flex_demand_energy: Some(series(&self.flex_demand_energy)),
            co2_price: series(&self.co2_price),
            early_retirement_cap: Some(self.early_retirement_cap),
            coupled_years: Some(self.coupled_years.clone()),
            features: self.features,
            prefactors: PrefactorFile {
                markup_b_scale: Some(self.prefactors.markup_b_scale),
                b_peak: Some(series(&self.prefactors.b_peak)),
                cf_slope: Some(self.prefactors.cf_slope),
                cf_floor: Some(self.prefactors.cf_floor),
            },
            termination: self.termination,
            technologies: self
                .technologies
                .iter()
                .map(|t| TechnologyFile {
                    name: t.name.clone(),
                    kind: t.kind,
                    fixed_cost: Some(series(&t.fixed_cost)),
                    overnight_cost: None,
                    omf: None,
                    omf_share: None,
                    variable_cost: Some(series(&t.variable_cost)),
                    fuel_cost: Some(series(&t.fuel_cost)),
                    efficiency: Some(t.efficiency),
                    co2_intensity: Some(t.co2_intensity),
                    potential: t.potential,
                    lifetime: Some(t.lifetime),
                    max_annual_cf: Some(t.max_annual_cf),
                    default_cf: Some(t.default_cf),
                    standing_capacity: t.standing_capacity.clone(),
                    nearterm_add_cap: t.nearterm_add_cap.clone(),
                    grid_cost_per_mwh: Some(t.grid_cost_per_mwh),
                    profile: t.profile.clone(),
                    hourly_cf_cap: t.hourly_cf_cap,
                    adjustment_k: Some(t.adjustment_k),
                    adjustment_beta: Some(t.adjustment_beta),
                    storage: t.storage.as_ref().map(|s| StorageFile {
                        energy_cost: Some(series(&s.energy_cost)),
                        energy_overnight_cost: None,
                        charge_cost: s.charge_cost.as_deref().map(series),
                        charge_overnight_cost: None,
                        roundtrip_efficiency: s.roundtrip_efficiency,
                    }),
                })
                .collect(),
        }
    }
}

/// Parses a scenario file; schema errors name the offending field path.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = parse_scenario_file(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let ppath = dir.join(&file.profiles);
    let base_year = file.base_year.clone().unwrap_or_else(|| "base".into());
    let profiles = HourlyProfiles::read_csv(&ppath, &base_year)?;
    file.resolve(profiles, Some(ppath))
}

/// Writes the canonical scenario JSON next to a profiles CSV named `profiles_name`.
pub fn save_scenario(s: &Scenario, path: &Path, profiles_name: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    s.profiles.write_csv(&dir.join(profiles_name))?;
    let text = serde_json::to_string_pretty(&s.to_file(profiles_name))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles() -> HourlyProfiles {
        let mut cf = BTreeMap::new();
        for c in profiles::CF_COLUMNS {
            cf.insert(c.to_string(), vec![0.2, 0.4]);
        }
        HourlyProfiles {
            base_year: "2019".into(),
            demand_mw: vec![1.0, 2.0],
            cf_by_vre: cf,
        }
    }

    fn minimal() -> &'static str {
        r#"{
          "name": "mini", "years": [2020, 2030], "hours": 2, "profiles": "p.csv",
          "interest_rate": 0.05, "annual_demand": 1000.0, "co2_price": [30, 37],
          "technologies": [
            {"name": "solar", "kind": "vre", "default_cf": 0.3},
            {"name": "gas", "kind": "dispatchable", "fixed_cost": 50000, "fuel_cost": 20, "efficiency": 0.5}
          ]
        }"#
    }

    #[test]
    fn minimal_two_tech_with_defaults() {
        let f = parse_scenario_file(minimal()).unwrap();
        let s = f.resolve(profiles(), None).unwrap();
        assert_eq!(s.technologies.len(), 2);
        let solar = s.tech("solar").unwrap();
        let crf = 0.05 / (1.0 - 1.05f64.powi(-30));
        assert!((solar.fixed_cost[0] - (564.0 * crf + 11.3) * 1000.0).abs() < 1e-6);
        assert_eq!(solar.lifetime, 30);
        assert_eq!(s.tech("gas").unwrap().max_annual_cf, 0.8);
        assert_eq!(s.grid.step_years, vec![10, 10]);
        assert_eq!(s.prefactors.b_peak, vec![0.5, 1.0]);
    }

    #[test]
    fn negative_demand_rejected() {
        let text = minimal().replace("\"annual_demand\": 1000.0", "\"annual_demand\": [1000.0, -5.0]");
        let err = parse_scenario_file(&text).unwrap().resolve(profiles(), None).unwrap_err();
        assert_eq!(err.to_string(), "annual_demand must be > 0");
    }

    #[test]
    fn schema_error_names_field() {
        let text = minimal().replace("\"hours\": 2", "\"hours\": \"two\"");
        match parse_scenario_file(&text).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "hours"),
            e => panic!("unexpected {e}"),
        }
        let text = minimal().replace("\"kind\": \"vre\"", "\"kind\": \"nuclear\"");
        match parse_scenario_file(&text).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "technologies[0].kind"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn canonical_form_round_trips() {
        let s = parse_scenario_file(minimal()).unwrap().resolve(profiles(), None).unwrap();
        let text = serde_json::to_string(&s.to_file("p.csv")).unwrap();
        let s2 = parse_scenario_file(&text).unwrap().resolve(profiles(), None).unwrap();
        assert_eq!(s, s2);
        let text2 = serde_json::to_string(&s2.to_file("p.csv")).unwrap();
        assert_eq!(text, text2);
    }
}
