//! Seeded synthetic inputs: Germany-like hourly profiles and the bundled scenarios.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::scenario::profiles::{CF_COLUMNS, HourlyProfiles};
use crate::scenario::{
    ramp, Features, PrefactorFile, Scenario, ScenarioFile, StorageFile, TechKind, TechnologyFile, Termination,
    YearValues,
};
use crate::Result;

pub const DEFAULT_SEED: u64 = 42;
pub const PROFILE_HOURS: usize = 8760;
/// Mean load of the generated demand series [MW].
pub const MEAN_LOAD_MW: f64 = 60_000.0;
/// File name the bundled profiles are written under.
pub const PROFILES_FILE: &str = "profiles.csv";

fn day_of(h: usize) -> f64 {
    (h / 24) as f64
}

/// Stationary AR(1) with unit variance.
fn ar1(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let k = (1.0 - rho * rho).sqrt();
    let mut x = normal.sample(rng);
    (0..n)
        .map(|_| {
            x = rho * x + k * normal.sample(rng);
            x
        })
        .collect()
}

fn demand(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = ar1(rng, PROFILE_HOURS, 0.9);
    let raw: Vec<f64> = (0..PROFILE_HOURS)
        .map(|h| {
            let day = day_of(h);
            let hod = (h % 24) as f64;
            // winter peak around mid January
            let season = 1.0 + 0.10 * (2.0 * PI * (day - 15.0) / 365.0).cos();
            let morning = (-(hod - 9.0).powi(2) / 8.0).exp();
            let evening = (-(hod - 19.0).powi(2) / 6.0).exp();
            let night = if !(6.0..23.0).contains(&hod) { -0.12 } else { 0.0 };
            let daily = 1.0 + 0.12 * morning + 0.15 * evening + night;
            let weekday = if (h / 24) % 7 >= 5 { 0.88 } else { 1.0 };
            season * daily * weekday * (1.0 + 0.02 * noise[h])
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.iter().map(|d| d * MEAN_LOAD_MW / mean).collect()
}

fn solar(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let days = PROFILE_HOURS / 24;
    let clear = ar1(rng, days, 0.7);
    (0..PROFILE_HOURS)
        .map(|h| {
            let day = day_of(h);
            let hod = (h % 24) as f64 + 0.5;
            let summer = (2.0 * PI * (day - 172.0) / 365.0).cos();
            let daylength = 12.0 + 4.0 * summer;
            let sunrise = 12.5 - daylength / 2.0;
            let t = (hod - sunrise) / daylength;
            if !(0.0..1.0).contains(&t) {
                return 0.0;
            }
            let bell = (PI * t).sin().powf(1.5);
            let amplitude = 0.55 + 0.35 * summer;
            let c = 1.0 / (1.0 + (-1.2 * clear[h / 24] - 0.6).exp());
            (0.95 * bell * amplitude * (0.25 + 0.75 * c)).clamp(0.0, 1.0)
        })
        .collect()
}

fn power_curve(v: f64) -> f64 {
    const CUT_IN: f64 = 3.0;
    const RATED: f64 = 12.5;
    const CUT_OUT: f64 = 25.0;
    if !(CUT_IN..CUT_OUT).contains(&v) {
        0.0
    } else if v >= RATED {
        0.95
    } else {
        0.95 * ((v - CUT_IN) / (RATED - CUT_IN)).powi(3)
    }
}

/// Onshore and offshore series from one shared weather driver.
fn wind(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let common = ar1(rng, PROFILE_HOURS, 0.985);
    let own = ar1(rng, PROFILE_HOURS, 0.985);
    let mut on = Vec::with_capacity(PROFILE_HOURS);
    let mut off = Vec::with_capacity(PROFILE_HOURS);
    for h in 0..PROFILE_HOURS {
        let winter = (2.0 * PI * (day_of(h) - 15.0) / 365.0).cos();
        let x_off = 0.8 * common[h] + 0.6 * own[h];
        on.push(power_curve((6.5 + 1.2 * winter + 2.8 * common[h]).max(0.0)));
        off.push(power_curve((9.0 + 1.5 * winter + 3.2 * x_off).max(0.0)));
    }
    (on, off)
}

fn hydro(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = ar1(rng, PROFILE_HOURS, 0.995);
    (0..PROFILE_HOURS)
        .map(|h| {
            // snowmelt peak in early summer
            let melt = (2.0 * PI * (day_of(h) - 160.0) / 365.0).cos();
            (0.5 + 0.15 * melt + 0.05 * noise[h]).clamp(0.05, 0.95)
        })
        .collect()
}

/// Full-year profiles; identical seeds give identical series.
pub fn generate_profiles(seed: u64) -> HourlyProfiles {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demand_mw = demand(&mut rng);
    let solar = solar(&mut rng);
    let (on, off) = wind(&mut rng);
    let hydro = hydro(&mut rng);
    let mut cf = BTreeMap::new();
    for (col, series) in CF_COLUMNS.iter().zip([solar, on, off, hydro]) {
        cf.insert(col.to_string(), series);
    }
    HourlyProfiles {
        base_year: format!("synthetic-{seed}"),
        demand_mw,
        cf_by_vre: cf,
    }
}

fn series(v: &[f64]) -> YearValues {
    YearValues::Series(v.to_vec())
}

fn vre(name: &str, default_cf: f64) -> TechnologyFile {
    let mut t = TechnologyFile::new(name, TechKind::Vre);
    t.default_cf = Some(default_cf);
    t
}

/// A fossil plant from overnight cost [$ /kW], fixed O&M [$ /kW-yr], fuel price
/// [$ /MWh_th], efficiency and emission factor [t/MWh_th].
fn thermal(name: &str, overnight: f64, omf: f64, fuel: f64, eff: f64, co2: f64, lifetime: u32) -> TechnologyFile {
    let mut t = TechnologyFile::new(name, TechKind::Dispatchable);
    t.overnight_cost = Some(YearValues::Scalar(overnight));
    t.omf = Some(YearValues::Scalar(omf));
    t.variable_cost = Some(YearValues::Scalar(2.0));
    t.fuel_cost = Some(YearValues::Scalar(fuel));
    t.efficiency = Some(eff);
    t.co2_intensity = Some(co2);
    t.lifetime = Some(lifetime);
    t.default_cf = Some(0.5);
    t
}

fn coal() -> TechnologyFile {
    thermal("coal", 1800.0, 45.0, 8.0, 0.42, 0.34, 40)
}

fn ccgt() -> TechnologyFile {
    thermal("ccgt", 900.0, 22.0, 20.0, 0.58, 0.20, 30)
}

fn ocgt() -> TechnologyFile {
    let mut t = thermal("ocgt", 450.0, 12.0, 20.0, 0.38, 0.20, 30);
    t.default_cf = Some(0.1);
    t
}

fn biomass() -> TechnologyFile {
    thermal("biomass", 2500.0, 60.0, 25.0, 0.35, 0.0, 30)
}

fn hydro_tech() -> TechnologyFile {
    let mut t = vre("hydro", 0.45);
    t.overnight_cost = Some(YearValues::Scalar(2000.0));
    t.omf = Some(YearValues::Scalar(30.0));
    t.lifetime = Some(60);
    t.potential = Some(4000.0);
    t.standing_capacity = BTreeMap::from([(2020, 3800.0)]);
    t
}

fn battery() -> TechnologyFile {
    let mut t = TechnologyFile::new("battery", TechKind::Storage);
    t.storage = Some(StorageFile {
        energy_overnight_cost: Some(YearValues::Scalar(250.0)),
        roundtrip_efficiency: 0.88,
        ..StorageFile::default()
    });
    t
}

fn electrolyzer() -> TechnologyFile {
    TechnologyFile::new("electrolyzer", TechKind::FlexDemand)
}

fn base_file(name: &str, years: Vec<i32>, hours: usize, demand_twh: f64) -> ScenarioFile {
    ScenarioFile {
        name: name.to_string(),
        years,
        step_years: None,
        hours,
        profiles: PROFILES_FILE.to_string(),
        base_year: None,
        interest_rate: 0.05,
        annual_demand: YearValues::Scalar(demand_twh * 1e6),
        flex_demand_energy: None,
        co2_price: YearValues::Scalar(37.0),
        early_retirement_cap: None,
        coupled_years: None,
        features: Features {
            offshore_fix_enabled: false,
            ..Features::default()
        },
        prefactors: PrefactorFile::default(),
        termination: Termination {
            max_iters: 30,
            share_tol: 0.05,
            min_iters: 3,
        },
        technologies: Vec::new(),
    }
}

fn resolve(mut f: ScenarioFile, profiles: HourlyProfiles) -> Result<(ScenarioFile, Scenario)> {
    f.base_year = Some(profiles.base_year.clone());
    let s = f.resolve(profiles, None)?;
    Ok((f, s))
}

/// Two technologies, two years, one week of hours.
pub fn toy(seed: u64) -> Result<(ScenarioFile, Scenario)> {
    let mut f = base_file("toy", vec![2020, 2030], 168, 500.0);
    f.technologies = vec![vre("solar", 0.11), ccgt()];
    resolve(f, generate_profiles(seed))
}

/// Five technologies, six coupled years, H=672, no storage or flexible demand.
pub fn baseline(seed: u64) -> Result<(ScenarioFile, Scenario)> {
    let years = vec![2020, 2025, 2030, 2035, 2040, 2045];
    let mut f = base_file("baseline", years.clone(), 672, 500.0);
    // electrification: demand grows so that every period needs new firm capacity
    f.annual_demand = series(&ramp(&years, 500e6, 650e6));
    let mut wind = vre("wind_onshore", 0.30);
    wind.potential = Some(150_000.0);
    f.technologies = vec![vre("solar", 0.11), wind, hydro_tech(), ccgt(), ocgt()];
    // at 0.05 the scarcity rents of the last iteration have not settled yet
    f.termination.share_tol = 0.01;
    resolve(f, generate_profiles(seed))
}

/// Rising CO2 price with a battery and flexible electrolysis.
pub fn net_zero(seed: u64) -> Result<(ScenarioFile, Scenario)> {
    let years = vec![2025, 2030, 2035, 2040];
    let mut f = base_file("net_zero", years, 672, 550.0);
    f.co2_price = series(&[115.0, 292.0, 464.0, 636.0]);
    f.flex_demand_energy = Some(series(&[5e6, 20e6, 40e6, 60e6]));
    f.features.storage_enabled = true;
    f.features.flex_enabled = true;
    f.termination.share_tol = 0.07;
    let mut wind = vre("wind_onshore", 0.22);
    wind.potential = Some(200_000.0);
    let mut offshore = vre("wind_offshore", 0.40);
    offshore.potential = Some(60_000.0);
    f.technologies = vec![
        vre("solar", 0.11),
        wind,
        offshore,
        ccgt(),
        ocgt(),
        battery(),
        electrolyzer(),
    ];
    resolve(f, generate_profiles(seed))
}

/// Sunny, cheap-solar system without storage; solar supplies most of the demand.
pub fn solar_heavy(seed: u64) -> Result<(ScenarioFile, Scenario)> {
    // 12-hour blocks: without storage, finer blocks cap solar near the daytime load share
    let mut f = base_file("solar_heavy", vec![2040, 2045], 730, 500.0);
    f.co2_price = YearValues::Scalar(150.0);
    let mut solar = vre("solar", 0.20);
    solar.overnight_cost = Some(YearValues::Scalar(200.0));
    solar.omf = Some(YearValues::Scalar(4.0));
    f.technologies = vec![solar, ccgt(), ocgt()];
    resolve(f, generate_profiles(seed))
}

/// Eight generators at full hourly resolution.
pub fn full_scale(seed: u64) -> Result<(ScenarioFile, Scenario)> {
    let mut f = base_file("full_scale", vec![2030], PROFILE_HOURS, 500.0);
    f.co2_price = YearValues::Scalar(100.0);
    f.technologies = vec![
        vre("solar", 0.11),
        vre("wind_onshore", 0.30),
        vre("wind_offshore", 0.40),
        hydro_tech(),
        biomass(),
        coal(),
        ccgt(),
        ocgt(),
    ];
    resolve(f, generate_profiles(seed))
}

/// The scenario written by `gen-synthetic`.
pub fn bundled(seed: u64) -> Result<(ScenarioFile, Scenario)> {
    baseline(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn seeded_and_bounded() {
        let a = generate_profiles(7);
        let b = generate_profiles(7);
        assert_eq!(a, b);
        assert_ne!(a, generate_profiles(8));
        a.validate().unwrap();
        assert_eq!(a.len(), PROFILE_HOURS);
        assert!((mean(&a.demand_mw) - MEAN_LOAD_MW).abs() < 1e-6);
    }

    #[test]
    fn profile_shapes() {
        let p = generate_profiles(DEFAULT_SEED);
        let solar = p.cf("solar_cf").unwrap();
        // nights are dark
        assert!((0..365).all(|d| solar[d * 24 + 1] == 0.0));
        let summer = mean(&solar[172 * 24..202 * 24]);
        let winter = mean(&solar[0..30 * 24]);
        assert!(summer > 2.0 * winter);
        let on = p.cf("wind_onshore_cf").unwrap();
        let off = p.cf("wind_offshore_cf").unwrap();
        assert!(mean(off) > mean(on));
        let (mo, mf) = (mean(on), mean(off));
        let cov: f64 = on.iter().zip(off).map(|(a, b)| (a - mo) * (b - mf)).sum();
        assert!(cov > 0.0);
    }

    #[test]
    fn scenarios_resolve() {
        for build in [toy, baseline, net_zero, solar_heavy, full_scale] {
            let (f, s) = build(DEFAULT_SEED).unwrap();
            assert_eq!(f.technologies.len(), s.technologies.len());
        }
        let (_, s) = baseline(DEFAULT_SEED).unwrap();
        assert_eq!(s.technologies.len(), 5);
        assert_eq!(s.coupled_years.len(), 6);
        assert_eq!(s.grid.hours, 672);
        assert_eq!(full_scale(DEFAULT_SEED).unwrap().1.technologies.len(), 8);
    }
}
