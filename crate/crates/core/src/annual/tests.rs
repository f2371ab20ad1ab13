use std::collections::BTreeMap;

use super::*;
use crate::lp::brute_force_solve;
use crate::scenario::{parse_scenario_file, HourlyProfiles};

fn profiles() -> HourlyProfiles {
    let mut cf = BTreeMap::new();
    for c in crate::scenario::profiles::CF_COLUMNS {
        cf.insert(c.to_string(), vec![0.5, 0.1]);
    }
    HourlyProfiles {
        base_year: "2019".into(),
        demand_mw: vec![1.0, 1.0],
        cf_by_vre: cf,
    }
}

fn scenario(years: &str, techs: &str) -> Scenario {
    let text = format!(
        r#"{{"name": "t", "years": {years}, "hours": 2, "profiles": "p.csv",
            "interest_rate": 0.05, "annual_demand": 876000.0, "co2_price": 0.0,
            "technologies": [{techs}]}}"#
    );
    parse_scenario_file(&text).unwrap().resolve(profiles(), None).unwrap()
}

const GAS: &str = r#"{"name": "gas", "kind": "dispatchable", "fixed_cost": 87600, "variable_cost": 20, "default_cf": 0.5}"#;

#[test]
fn single_tech_price_is_lcoe() {
    let s = scenario("[2030]", GAS);
    let sol = solve_annual(&s, None).unwrap();
    let c = sol.cell(0, 0);
    assert!((c.capacity - 876000.0 / (8760.0 * 0.5)).abs() < 1e-6);
    let lcoe = 87600.0 / (8760.0 * 0.5) + 20.0;
    assert!((sol.years[0].lambda - lcoe).abs() < 1e-7);
    // interior capacity: c = 8760·φ·μ
    assert!((87600.0 - 8760.0 * 0.5 * c.mu).abs() < 1e-5);
}

#[test]
fn merit_order_matches_oracle() {
    let techs = r#"
        {"name": "a", "kind": "dispatchable", "fixed_cost": 100000, "variable_cost": 10, "default_cf": 0.8},
        {"name": "b", "kind": "dispatchable", "fixed_cost": 30000, "variable_cost": 40, "default_cf": 0.3},
        {"name": "c", "kind": "dispatchable", "fixed_cost": 200000, "variable_cost": 1, "default_cf": 0.9}"#;
    let s = scenario("[2030]", techs);
    let p = build_annual(&s, None).unwrap();
    let oracle = brute_force_solve(&p).unwrap();
    let sol = solve_annual(&s, None).unwrap();
    assert!((oracle.objective - sol.objective).abs() <= 1e-8 * (1.0 + oracle.objective.abs()));
    let lcoe = |c: f64, cf: f64, o: f64| c / (8760.0 * cf) + o;
    let best = lcoe(100000.0, 0.8, 10.0)
        .min(lcoe(30000.0, 0.3, 40.0))
        .min(lcoe(200000.0, 0.9, 1.0));
    assert!((sol.years[0].lambda - best).abs() < 1e-7);
}

#[test]
fn markup_shifts_usable_generation_cost() {
    let techs = format!(r#"{{"name": "solar", "kind": "vre", "fixed_cost": 50000, "default_cf": 0.2}}, {GAS}"#);
    let s = scenario("[2030]", &techs);
    let base = build_annual(&s, None).unwrap();
    let mut y = AnnualYearInputs {
        peak_bound: None,
        storage_loss: 0.0,
        techs: BTreeMap::new(),
    };
    for (name, cf, eta) in [("solar", 0.2, -6.0), ("gas", 0.5, 6.0)] {
        y.techs.insert(
            name.into(),
            AnnualTechInputs {
                cf,
                curtailment: 0.0,
                markup: Some(MarkupCurve::flat(eta)),
            },
        );
    }
    let inputs = AnnualInputs {
        years: [(2030, y)].into(),
    };
    let coupled = build_annual(&s, Some(&inputs)).unwrap();
    let g = base.var("G[2030,solar]").unwrap();
    let delta = s.discount_weight(0);
    let diff = coupled.variables[g.0].obj - base.variables[g.0].obj;
    assert!((diff - 6.0 * delta).abs() < 1e-12);
    // zero curtailment: identical balance rows
    let b = base.row("balance[2030]").unwrap();
    assert_eq!(base.constraints[b.0], coupled.constraints[b.0]);
}

#[test]
fn missing_signal_entry_is_an_error() {
    let s = scenario("[2030]", GAS);
    let inputs = AnnualInputs {
        years: [(
            2030,
            AnnualYearInputs {
                peak_bound: None,
                storage_loss: 0.0,
                techs: BTreeMap::new(),
            },
        )]
        .into(),
    };
    assert!(matches!(build_annual(&s, Some(&inputs)), Err(Error::Input(_))));
    assert!(build_annual(&s, Some(&AnnualInputs::default())).is_err());
}

#[test]
fn binding_standing_capacity_has_positive_sigma() {
    let techs = format!(
        r#"{GAS}, {{"name": "coal", "kind": "dispatchable", "fixed_cost": 300000, "variable_cost": 30,
            "default_cf": 0.5, "standing_capacity": {{"2020": 150}}}}"#
    );
    let s = scenario("[2020, 2030]", &techs);
    let sol = solve_annual(&s, None).unwrap();
    let coal = sol.find(2020, "coal").unwrap();
    assert!((coal.capacity - 150.0).abs() < 1e-6);
    assert!(coal.sigma > 0.0);
    assert!(sol.find(2020, "gas").unwrap().sigma.abs() < 1e-9);
}

#[test]
fn binding_potential_has_positive_omega() {
    let techs = format!(
        r#"{GAS}, {{"name": "hydro", "kind": "vre", "fixed_cost": 10000, "default_cf": 0.5, "potential": 20}}"#
    );
    let s = scenario("[2030]", &techs);
    let sol = solve_annual(&s, None).unwrap();
    let h = sol.find(2030, "hydro").unwrap();
    assert!((h.capacity - 20.0).abs() < 1e-6);
    assert!(h.omega > 0.0);
}

#[test]
fn slack_constraints_have_zero_duals() {
    let techs = format!(
        r#"{GAS}, {{"name": "hydro", "kind": "vre", "fixed_cost": 10000000, "default_cf": 0.5, "potential": 20}}"#
    );
    let s = scenario("[2020, 2030]", &techs);
    let sol = solve_annual(&s, None).unwrap();
    for c in &sol.cells {
        assert!(c.omega.abs() < 1e-9 && c.sigma.abs() < 1e-9 && c.gamma.abs() < 1e-9);
    }
    assert!(sol.years.iter().all(|y| y.nu == 0.0));
}

#[test]
fn adjustment_cost_examples() {
    let (eps, a) = adjustment_cost(10.0, 5.0, 100.0, 1.0, 1.0, 5.0).unwrap();
    assert!((eps - 2.0).abs() < 1e-12);
    assert!((a - 10.0 / 150.0).abs() < 1e-12);
    assert_eq!(adjustment_cost(7.0, 7.0, 100.0, 1.0, 1.0, 5.0).unwrap(), (0.0, 0.0));
    assert!(adjustment_cost(9.0, 3.0, 50.0, 0.5, 0.1, 10.0).unwrap().1 > 0.0);
    assert!(adjustment_cost(1.0, -2.0, 1.0, 1.0, 1.0, 5.0).is_err());
}

#[test]
fn markup_curve_evaluates_at_share() {
    let m = MarkupCurve {
        mv: 12.0,
        j: 8.0,
        b: 1.5,
        share_ref: 0.2,
    };
    assert!((m.at(0.3) - 2.2).abs() < 1e-12);
    assert!((m.at(0.2) - 4.0).abs() < 1e-12);
}
