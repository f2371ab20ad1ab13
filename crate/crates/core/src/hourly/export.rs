use std::path::Path;

use super::{HourlySolution, MarketStats};
use crate::scenario::TechKind;
use crate::{Error, Result};

/// `hour,tech,generation_mwh,curtailment_mwh,price`; one row per hour and producing tech.
pub fn write_hourly_csv(hs: &HourlySolution, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["hour", "tech", "generation_mwh", "curtailment_mwh", "price"])?;
    for h in 0..hs.hours() {
        for t in hs.techs.iter().filter(|t| t.kind != TechKind::FlexDemand) {
            let g = hs.hour_weight * t.generation[h];
            let c = hs.hour_weight * t.curtailment.get(h).copied().unwrap_or(0.0);
            w.write_record([
                h.to_string(),
                t.name.clone(),
                g.to_string(),
                c.to_string(),
                hs.price[h].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-tech summary with market values, markups, capacity factor and curtailment.
pub fn write_summary_csv(hs: &HourlySolution, ms: &MarketStats, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "tech",
        "capacity_mw",
        "energy_mwh",
        "mv",
        "mv_stripped",
        "markup",
        "markup_stripped",
        "cf",
        "curtailment_ratio",
        "capture_price",
        "omega",
        "zeta",
    ])?;
    for (t, s) in hs.techs.iter().zip(&ms.techs) {
        w.write_record([
            t.name.clone(),
            t.capacity.to_string(),
            s.energy.to_string(),
            opt(s.market_value),
            opt(s.market_value_stripped),
            opt(s.markup),
            opt(s.markup_stripped),
            opt(s.capacity_factor),
            opt(s.curtailment_ratio),
            opt(s.capture_price),
            t.omega.to_string(),
            t.zeta.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
