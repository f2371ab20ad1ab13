use std::collections::BTreeMap;

use super::*;
use crate::scenario::{parse_scenario_file, HourlyProfiles};
use crate::synthetic;

fn one_hour_profiles() -> HourlyProfiles {
    let mut cf = BTreeMap::new();
    for c in crate::scenario::profiles::CF_COLUMNS {
        cf.insert(c.to_string(), vec![0.5]);
    }
    HourlyProfiles {
        base_year: "flat".into(),
        demand_mw: vec![1.0],
        cf_by_vre: cf,
    }
}

/// With a single hour both models see the same constraints, so no markups arise.
fn single_hour() -> Scenario {
    let text = r#"{
      "name": "single", "years": [2020, 2030], "hours": 1, "profiles": "p.csv",
      "interest_rate": 0.05, "annual_demand": 1000.0, "co2_price": 37,
      "termination": {"max_iters": 10, "share_tol": 0.01, "min_iters": 2},
      "technologies": [
        {"name": "solar", "kind": "vre", "default_cf": 0.3, "potential": 0.2},
        {"name": "gas", "kind": "dispatchable", "fixed_cost": 50000, "fuel_cost": 20, "efficiency": 0.5},
        {"name": "peaker", "kind": "dispatchable", "fixed_cost": 20000, "fuel_cost": 20, "efficiency": 0.3}
      ]
    }"#;
    parse_scenario_file(text).unwrap().resolve(one_hour_profiles(), None).unwrap()
}

#[test]
fn identical_models_converge_without_markups() {
    let r = run_coupled(&single_hour()).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 2);
    for rec in &r.history {
        assert!(rec.share_gap < 1e-6, "gap {}", rec.share_gap);
        for ms in &rec.stats {
            for t in &ms.techs {
                if let Some(m) = t.markup_stripped {
                    assert!(m.abs() < 1e-6, "{} markup {m}", t.name);
                }
            }
        }
    }
}

#[test]
fn single_iteration_is_not_converged() {
    let mut s = single_hour();
    s.termination.max_iters = 1;
    let r = run_coupled(&s).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 1);
}

#[test]
fn runs_are_deterministic() {
    let (_, mut s) = synthetic::toy(synthetic::DEFAULT_SEED).unwrap();
    s.termination.max_iters = 3;
    let a = serde_json::to_string(&run_coupled(&s).unwrap()).unwrap();
    let b = serde_json::to_string(&run_coupled(&s).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn hourly_demand_matches_annual() {
    let (_, mut s) = synthetic::toy(synthetic::DEFAULT_SEED).unwrap();
    s.termination.max_iters = 2;
    let r = run_coupled(&s).unwrap();
    for rec in &r.history {
        for hs in &rec.hourly {
            let yi = s.grid.index_of(hs.year).unwrap();
            let d = s.annual_demand[yi];
            assert!((hs.total_demand() - d).abs() <= 1e-9 * d);
        }
    }
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = single_hour();
    s.termination.max_iters = 2;
    let r = run_coupled_to(&s, dir.path()).unwrap();
    let f = read_final_state(dir.path()).unwrap();
    assert_eq!(f.iterations, r.iterations);
    assert_eq!(f.history.len(), r.iterations);
    assert!(dir.path().join("iter_1").join("annual.csv").exists());
}
