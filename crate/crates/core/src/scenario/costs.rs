//! Cost arithmetic: annuities, default cost data and fuel-price smoothing.

/// Capital recovery factor `r / (1 − (1+r)^−L)`.
pub fn annuity_factor(rate: f64, lifetime: f64) -> f64 {
    if rate == 0.0 {
        return 1.0 / lifetime;
    }
    rate / (1.0 - (1.0 + rate).powf(-lifetime))
}

/// Annuitized fixed cost in $/MW-yr from overnight cost and fixed O&M, both per kW.
pub fn annualized_fixed_cost(overnight_per_kw: f64, omf_per_kw: f64, rate: f64, lifetime: f64) -> f64 {
    (overnight_per_kw * annuity_factor(rate, lifetime) + omf_per_kw) * 1000.0
}

/// Default cost anchors (2005$/kW, 2005$/kW-yr, 2005$/MWh) for 2020 and 2045.
#[derive(Debug, Clone, Copy)]
pub struct CostAnchor {
    pub overnight: (f64, f64),
    pub omf: (f64, f64),
    pub omv: f64,
    pub lifetime: u32,
}

pub const ANCHOR_YEARS: (i32, i32) = (2020, 2045);

pub fn default_costs(name: &str) -> Option<CostAnchor> {
    let a = |i0, i1, f0, f1, omv, lifetime| CostAnchor {
        overnight: (i0, i1),
        omf: (f0, f1),
        omv,
        lifetime,
    };
    Some(match name {
        "solar" => a(564.0, 219.0, 11.3, 4.4, 0.0, 30),
        "wind_onshore" => a(1343.0, 1134.0, 26.9, 22.5, 0.0, 25),
        "wind_offshore" => a(4134.0, 1946.0, 12.4, 52.3, 0.0, 25),
        "battery" => a(573.0, 367.0, 0.2, 0.1, 0.3, 15),
        "electrolyzer" => a(1041.0, 428.0, 52.0, 21.0, 0.3, 20),
        _ => return None,
    })
}

/// Linear interpolation between the two anchor years, flat outside.
pub fn interpolate_anchor(pair: (f64, f64), year: i32) -> f64 {
    let (y0, y1) = ANCHOR_YEARS;
    if year <= y0 {
        pair.0
    } else if year >= y1 {
        pair.1
    } else {
        let t = (year - y0) as f64 / (y1 - y0) as f64;
        pair.0 + t * (pair.1 - pair.0)
    }
}

/// Ordinary least-squares line through `(years, series)` evaluated at each year.
/// A single point is returned unchanged; negative fitted values are floored at zero.
pub fn fit_fuel_cost(years: &[i32], series: &[f64]) -> Vec<f64> {
    assert_eq!(years.len(), series.len());
    let n = series.len();
    if n < 2 {
        return series.to_vec();
    }
    let nf = n as f64;
    let mx = years.iter().map(|&y| y as f64).sum::<f64>() / nf;
    let my = series.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&y, &v) in years.iter().zip(series) {
        let dx = y as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    years
        .iter()
        .map(|&y| (my + slope * (y as f64 - mx)).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fuel_fit_examples() {
        let y = [2020, 2025, 2030];
        let a = fit_fuel_cost(&y, &[10.0, 12.0, 14.0]);
        let b = fit_fuel_cost(&y, &[10.0, 14.0, 12.0]);
        for (x, e) in a.iter().zip([10.0, 12.0, 14.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        for (x, e) in b.iter().zip([11.0, 12.0, 13.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        assert_eq!(fit_fuel_cost(&[2020], &[7.0]), vec![7.0]);
    }

    #[test]
    fn solar_default_2020() {
        let d = default_costs("solar").unwrap();
        let c = annualized_fixed_cost(interpolate_anchor(d.overnight, 2020), interpolate_anchor(d.omf, 2020), 0.05, 30.0);
        // 564 $/kW over 30 years at 5% plus 11.3 $/kW-yr fixed O&M.
        let crf = 0.05 / (1.0 - 1.05f64.powi(-30));
        assert!((c - (564.0 * crf + 11.3) * 1000.0).abs() < 1e-9);
        assert!((crf - 0.065_051_435_9).abs() < 1e-9);
    }
}
