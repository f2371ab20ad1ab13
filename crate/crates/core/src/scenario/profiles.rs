//! Hourly input series: loading, resampling and rescaling.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Column names of the hourly input CSV, after `hour`.
pub const LOAD_COLUMN: &str = "load_mw";
pub const CF_COLUMNS: [&str; 4] = ["solar_cf", "wind_onshore_cf", "wind_offshore_cf", "hydro_cf"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyProfiles {
    pub base_year: String,
    pub demand_mw: Vec<f64>,
    /// Capacity-factor series keyed by CSV column name.
    pub cf_by_vre: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    hour: usize,
    load_mw: f64,
    solar_cf: f64,
    wind_onshore_cf: f64,
    wind_offshore_cf: f64,
    hydro_cf: f64,
}

impl HourlyProfiles {
    pub fn len(&self) -> usize {
        self.demand_mw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand_mw.is_empty()
    }

    pub fn cf(&self, column: &str) -> Option<&[f64]> {
        self.cf_by_vre.get(column).map(|v| v.as_slice())
    }

    pub fn validate(&self) -> Result<()> {
        if self.demand_mw.is_empty() {
            return Err(Error::Invariant("hourly profiles are empty".into()));
        }
        if self.demand_mw.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Invariant("hourly demand must be >= 0".into()));
        }
        for (name, series) in &self.cf_by_vre {
            if series.len() != self.demand_mw.len() {
                return Err(Error::Invariant(format!("cf column {name} has wrong length")));
            }
            if series.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::Invariant(format!("cf column {name} must lie in [0,1]")));
            }
        }
        Ok(())
    }

    pub fn read_csv(path: &Path, base_year: &str) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let mut rows: Vec<Row> = Vec::new();
        for rec in rdr.deserialize() {
            rows.push(rec?);
        }
        for (i, r) in rows.iter().enumerate() {
            if r.hour != i {
                return Err(Error::Input(format!(
                    "{}: hour column must be 0-based and consecutive (row {i} has {})",
                    path.display(),
                    r.hour
                )));
            }
        }
        let mut cf = BTreeMap::new();
        cf.insert(CF_COLUMNS[0].to_string(), rows.iter().map(|r| r.solar_cf).collect());
        cf.insert(CF_COLUMNS[1].to_string(), rows.iter().map(|r| r.wind_onshore_cf).collect());
        cf.insert(CF_COLUMNS[2].to_string(), rows.iter().map(|r| r.wind_offshore_cf).collect());
        cf.insert(CF_COLUMNS[3].to_string(), rows.iter().map(|r| r.hydro_cf).collect());
        let p = HourlyProfiles {
            base_year: base_year.to_string(),
            demand_mw: rows.iter().map(|r| r.load_mw).collect(),
            cf_by_vre: cf,
        };
        p.validate()?;
        Ok(p)
    }

    /// Writes the standard CSV layout; columns missing from `cf_by_vre` are written as zero.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let col = |name: &str, h: usize| self.cf_by_vre.get(name).map_or(0.0, |s| s[h]);
        for h in 0..self.len() {
            w.serialize(Row {
                hour: h,
                load_mw: self.demand_mw[h],
                solar_cf: col(CF_COLUMNS[0], h),
                wind_onshore_cf: col(CF_COLUMNS[1], h),
                wind_offshore_cf: col(CF_COLUMNS[2], h),
                hydro_cf: col(CF_COLUMNS[3], h),
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Block-averages every series down to `hours` points. Block `k` covers
    /// `[k·L/H, (k+1)·L/H)` of the original index axis; fractional overlaps
    /// are weighted, so total energy is preserved exactly.
    pub fn resample(&self, hours: usize) -> Result<Self> {
        let n = self.len();
        if hours == 0 || hours > n {
            return Err(Error::Input(format!(
                "cannot resample a {n}-hour series to {hours} hours"
            )));
        }
        if hours == n {
            return Ok(self.clone());
        }
        Ok(HourlyProfiles {
            base_year: self.base_year.clone(),
            demand_mw: block_average(&self.demand_mw, hours),
            cf_by_vre: self
                .cf_by_vre
                .iter()
                .map(|(k, v)| (k.clone(), block_average(v, hours)))
                .collect(),
        })
    }
}

pub fn block_average(series: &[f64], hours: usize) -> Vec<f64> {
    let n = series.len();
    let len = n as f64 / hours as f64;
    (0..hours)
        .map(|k| {
            let a = k as f64 * len;
            let b = (k + 1) as f64 * len;
            let mut acc = 0.0;
            let mut i = a.floor() as usize;
            while i < n && (i as f64) < b {
                let lo = a.max(i as f64);
                let hi = b.min((i + 1) as f64);
                if hi > lo {
                    acc += series[i] * (hi - lo);
                }
                i += 1;
            }
            acc / len
        })
        .collect()
}

/// Scales a demand shape so that `w·Σ d = target`.
pub fn rescale_demand(base: &[f64], weight: f64, target_annual: f64) -> Result<Vec<f64>> {
    let sum: f64 = base.iter().sum();
    if !(sum * weight > 0.0) {
        return Err(Error::Input("demand profile has zero annual energy".into()));
    }
    let k = target_annual / (weight * sum);
    Ok(base.iter().map(|d| d * k).collect())
}

/// Scales a capacity-factor series to a target mean, capping each hour at 0.99.
pub fn rescale_vre_cf(base: &[f64], target_mean_cf: f64) -> Result<Vec<f64>> {
    if base.is_empty() {
        return Err(Error::Input("capacity-factor series is empty".into()));
    }
    let mean = base.iter().sum::<f64>() / base.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Input("capacity-factor series has zero mean".into()));
    }
    if !(target_mean_cf > 0.0 && target_mean_cf <= 1.0) {
        return Err(Error::Input(format!(
            "target mean capacity factor {target_mean_cf} outside (0,1]"
        )));
    }
    let k = target_mean_cf / mean;
    Ok(base.iter().map(|c| (c * k).min(0.99)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn demand_example() {
        assert_eq!(rescale_demand(&[1.0, 3.0], 1.0, 8.0).unwrap(), vec![2.0, 6.0]);
        assert_eq!(rescale_demand(&[1.0, 3.0], 1.0, 4.0).unwrap(), vec![1.0, 3.0]);
        assert!(rescale_demand(&[0.0, 0.0], 1.0, 4.0).is_err());
    }

    #[test]
    fn cf_examples() {
        let a = rescale_vre_cf(&[0.2, 0.6], 0.5).unwrap();
        assert!((a[0] - 0.25).abs() < 1e-15 && (a[1] - 0.75).abs() < 1e-15);
        let b = rescale_vre_cf(&[0.9, 0.1], 0.6).unwrap();
        assert_eq!(b[0], 0.99);
        assert!((b[1] - 0.12).abs() < 1e-15);
        assert_eq!(rescale_vre_cf(&[0.3, 0.5], 0.4).unwrap(), vec![0.3, 0.5]);
        assert!(rescale_vre_cf(&[0.0, 0.0], 0.4).is_err());
    }

    #[test]
    fn block_average_preserves_energy() {
        let s: Vec<f64> = (0..8760).map(|h| (h % 24) as f64).collect();
        let r = block_average(&s, 672);
        let w = 8760.0 / 672.0;
        let e0: f64 = s.iter().sum();
        let e1: f64 = r.iter().sum::<f64>() * w;
        assert!((e0 - e1).abs() < 1e-9 * e0);
        assert_eq!(block_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.5, 3.5]);
    }

    proptest! {
        #[test]
        fn demand_rescale_hits_target(base in prop::collection::vec(0.1f64..100.0, 1..50),
                                      w in 1.0f64..200.0, target in 1.0f64..1e9) {
            let d = rescale_demand(&base, w, target).unwrap();
            let e: f64 = d.iter().sum::<f64>() * w;
            prop_assert!((e - target).abs() <= 1e-9 * target);
            let r0 = d[0] / base[0];
            for (x, b) in d.iter().zip(&base) {
                prop_assert!((x / b - r0).abs() <= 1e-12 * r0);
            }
        }

        #[test]
        fn cf_rescale_bounds(base in prop::collection::vec(0.0f64..1.0, 2..50), target in 0.01f64..1.0) {
            prop_assume!(base.iter().sum::<f64>() > 1e-3);
            let c = rescale_vre_cf(&base, target).unwrap();
            prop_assert!(c.iter().all(|x| (0.0..=0.99).contains(x)));
            let mean_b = base.iter().sum::<f64>() / base.len() as f64;
            if base.iter().all(|b| b * target / mean_b <= 0.99) {
                let mean = c.iter().sum::<f64>() / c.len() as f64;
                prop_assert!((mean - target).abs() <= 1e-12);
            }
        }
    }
}
