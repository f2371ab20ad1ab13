//! End-to-end acceptance criteria. Runs without the libtest harness so that
//! each criterion prints exactly one PASS/FAIL line.

use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcoupler::coupling::{run_coupled, CoupledResult};
use mcoupler::hourly::{build_instance, market_stats, solve_hourly, solve_instance, HourlyInstance, HourlySolution, HourlyTech, YearInputs};
use mcoupler::lp::{brute_force_solve, solve, LpProblem, Sense, Status};
use mcoupler::reporting::{pdc, rldc};
use mcoupler::scenario::TechKind;
use mcoupler::synthetic;
use mcoupler::validation::{annual_zpr, hourly_zpr, markup_zero_sum, q1q2, scarcity_equivalence};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn seed(n: u64) -> u64 {
    synthetic::DEFAULT_SEED + n
}

// A1, A2 and A6 share one baseline run.
fn baseline() -> Result<(CoupledResult, Duration), String> {
    let (_, s) = synthetic::baseline(synthetic::DEFAULT_SEED).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let res = run_coupled(&s).map_err(|e| e.to_string())?;
    Ok((res, t.elapsed()))
}

fn a1(run: &(CoupledResult, Duration)) -> Check {
    let (res, dt) = run;
    let gap = res.last().share_gap;
    ensure(
        res.converged && gap <= 0.05 && res.iterations <= 30 && dt.as_secs_f64() < 300.0,
        format!(
            "converged={} after {} iterations, max share gap {gap:.4}, {:.1} s",
            res.converged,
            res.iterations,
            dt.as_secs_f64()
        ),
    )
}

fn a2(res: &CoupledResult) -> Check {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for rec in &res.history {
        let mut reports = vec![annual_zpr(&rec.annual)];
        reports.extend(rec.hourly.iter().map(hourly_zpr));
        for r in reports {
            worst = worst.max(r.max_relative_residual());
            for e in r.entries.iter().filter(|e| !e.passes()) {
                failures.push(format!("iter {} {:?} {:?} {:?}: {:.2e}", rec.iteration, e.model, e.scope, e.year, e.relative_residual));
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!("{} iterations, max relative residual {worst:.2e} {}", res.history.len(), failures.join("; ")),
    )
}

fn a6(res: &CoupledResult) -> Check {
    let last = res.last();
    let mut worst = (0.0f64, String::new());
    let mut n = 0;
    for ms in &last.stats {
        let demand: f64 = ms.techs.iter().filter(|t| t.kind.is_generator()).map(|t| t.energy).sum();
        for e in scarcity_equivalence(&last.annual, ms) {
            let gen = ms.tech(&e.tech).map_or(0.0, |t| t.energy);
            if gen <= 1e-6 * demand {
                continue;
            }
            n += 1;
            if e.relative_residual >= worst.0 {
                worst = (e.relative_residual, format!("{} {}", e.year, e.tech));
            }
        }
    }
    ensure(
        n > 0 && worst.0 <= 0.05,
        format!("{n} dispatchable entries, max residual {:.4} ({})", worst.0, worst.1),
    )
}

/// Random feasible LP within the oracle's size limits: finite bounds,
/// constraints built around an interior point, generic costs so the optimum
/// is unique.
fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..=6);
    let mut p = LpProblem::new();
    let mut x0 = Vec::new();
    let vars: Vec<_> = (0..n)
        .map(|j| {
            let lo = if rng.gen_bool(0.7) { 0.0 } else { rng.gen_range(-5.0..0.0) };
            let hi = lo + rng.gen_range(1.0..10.0);
            x0.push(lo + rng.gen_range(0.2..0.8) * (hi - lo));
            p.add_var(format!("x{j}"), lo, hi, rng.gen_range(-1.0..1.0))
        })
        .collect();
    for i in 0..m {
        let mut coeffs = Vec::new();
        for v in &vars {
            if rng.gen_bool(0.7) {
                coeffs.push((*v, rng.gen_range(-3.0..3.0)));
            }
        }
        if coeffs.is_empty() {
            continue;
        }
        let at: f64 = coeffs.iter().map(|(v, a)| a * x0[v.0]).sum();
        let (sense, rhs) = match rng.gen_range(0..3) {
            0 => (Sense::Le, at + rng.gen_range(0.0..2.0)),
            1 => (Sense::Ge, at - rng.gen_range(0.0..2.0)),
            _ => (Sense::Eq, at),
        };
        p.add_row(format!("r{i}"), coeffs, sense, rhs);
    }
    p
}

fn a3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(3));
    let mut worst = 0.0f64;
    for k in 0..200 {
        let p = random_lp(&mut rng);
        let a = solve(&p).map_err(|e| format!("instance {k}: {e}"))?;
        let b = brute_force_solve(&p).map_err(|e| format!("instance {k}: {e}"))?;
        if a.status != Status::Optimal || b.status != Status::Optimal {
            return Err(format!("instance {k}: status {:?} vs oracle {:?}", a.status, b.status));
        }
        let mut d = (a.objective - b.objective).abs() / (1.0 + b.objective.abs());
        for (x, y) in a.x.iter().zip(&b.x) {
            d = d.max((x - y).abs() / (1.0 + y.abs()));
        }
        worst = worst.max(d);
    }
    ensure(worst <= 1e-8, format!("200 instances, max objective/primal deviation {worst:.2e}"))
}

fn a4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(4));
    let (mut link, mut cap) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let inst = q1q2::ToyInstance::random(&mut rng);
        let r = q1q2::compare(&inst).map_err(|e| format!("instance {k}: {e}"))?;
        link = link.max(r.mu_link_residual);
        cap = cap.max(r.capacity_residual);
    }
    ensure(
        link <= 1e-6 && cap <= 1e-6,
        format!("50 instances, capacity-factor link residual {link:.2e}, capacity residual {cap:.2e}"),
    )
}

fn toy_instance() -> HourlyInstance {
    let tech = |name: &str, kind, fixed, var, cf: Vec<f64>| HourlyTech {
        name: name.into(),
        kind,
        fixed_cost: fixed,
        variable_cost: var,
        potential: None,
        standing_capacity: 0.0,
        fixed_capacity: None,
        cf,
        dispatch_cap: 1.0,
        storage: None,
    };
    HourlyInstance {
        year: 2030,
        hour_weight: 1.0,
        demand: vec![1.0, 1.0],
        flex_energy: 0.0,
        techs: vec![
            tech("solar", TechKind::Vre, 3.0, 0.0, vec![1.0, 0.0]),
            tech("gas", TechKind::Dispatchable, 10.0, 5.0, vec![]),
        ],
    }
}

fn a5() -> Check {
    let inst = toy_instance();
    let (hs, ms) = solve_instance(&inst).map_err(|e| e.to_string())?;
    let lp = build_instance(&inst).map_err(|e| e.to_string())?;
    let oracle = brute_force_solve(&lp.problem).map_err(|e| e.to_string())?;
    let oracle_price: Vec<f64> = (0..2)
        .map(|h| oracle.dual(lp.problem.row(&format!("balance[2030,{h}]")).expect("balance row")) / inst.hour_weight)
        .collect();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let eta = |s: &str| ms.tech(s).and_then(|t| t.markup).unwrap_or(f64::NAN);
    let eta_s = |s: &str| ms.tech(s).and_then(|t| t.markup_stripped).unwrap_or(f64::NAN);
    let ok = close(hs.price[0], 3.0)
        && close(hs.price[1], 15.0)
        && close(oracle_price[0], 3.0)
        && close(oracle_price[1], 15.0)
        && close(eta("solar"), -6.0)
        && close(eta("gas"), 6.0)
        && close(eta_s("solar"), 0.0)
        && close(eta_s("gas"), 0.0)
        && close(ms.surplus, 12.0)
        && close(ms.peak_residual, 1.0);
    ensure(
        ok,
        format!(
            "lambda {:?} (oracle {:?}), eta [{}, {}], eta' [{}, {}], surplus {}, d_res {}",
            hs.price,
            oracle_price,
            eta("solar"),
            eta("gas"),
            eta_s("solar"),
            eta_s("gas"),
            ms.surplus,
            ms.peak_residual
        ),
    )
}

/// One randomized hourly year: a synthetic scenario at a random resolution
/// with perturbed costs, demand and standing capacities.
fn random_hourly(rng: &mut ChaCha8Rng, k: usize) -> Result<(YearInputs, HourlySolution), String> {
    let storage = k % 2 == 1;
    let (_, mut s) = if storage {
        synthetic::net_zero(synthetic::DEFAULT_SEED)
    } else {
        synthetic::baseline(synthetic::DEFAULT_SEED)
    }
    .map_err(|e| e.to_string())?;
    s.grid.hours = [24, 48, 73, 96, 120][rng.gen_range(0..5)];
    s.features.storage_enabled = storage;
    s.features.flex_enabled = storage && rng.gen_bool(0.7);
    let year = s.grid.years[rng.gen_range(0..s.grid.years.len())];
    let mut inputs = YearInputs::uncoupled(&s, year).map_err(|e| e.to_string())?;
    inputs.annual_demand *= rng.gen_range(0.7..1.3);
    if s.features.flex_enabled {
        inputs.flex_energy = rng.gen_range(0.0..0.1) * inputs.annual_demand;
    }
    for t in &mut inputs.techs {
        t.fixed_cost *= rng.gen_range(0.5..1.5);
        t.variable_cost *= rng.gen_range(0.5..1.5);
        if rng.gen_bool(0.3) {
            t.standing_capacity = rng.gen_range(0.0..0.2) * inputs.annual_demand / 8760.0;
            if let Some(p) = t.potential {
                t.standing_capacity = t.standing_capacity.min(p);
            }
        }
    }
    let (hs, _) = solve_hourly(&s, &inputs).map_err(|e| format!("solve {k}: {e}"))?;
    Ok((inputs, hs))
}

fn a7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed(7));
    let mut worst = [0.0f64; 3];
    for k in 0..100 {
        let (inputs, hs) = random_hourly(&mut rng, k)?;
        let ms = market_stats(&hs);
        let scale = ms.price_load_sum.max(1.0);
        let zs = ms.markup_zero_sum.abs().max(ms.markup_zero_sum_stripped.abs()) / scale;
        worst[0] = worst[0].max(zs);
        if zs > 1e-6 || markup_zero_sum(&hs) != (ms.markup_zero_sum, ms.markup_zero_sum_stripped) {
            return Err(format!("solve {k}: markup zero-sum {zs:.2e}"));
        }
        let mut stripped = hs.price.clone();
        stripped[ms.scarcity_hour] = ms.second_price;
        let cap = stripped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for t in &ms.techs {
            if let Some(e) = t.markup_stripped {
                if e.abs() > cap + 1e-9 * (1.0 + cap.abs()) {
                    return Err(format!("solve {k}: |eta'| {} for {} exceeds max stripped price {cap}", e, t.name));
                }
            }
        }
        let demand_gap = (hs.total_demand() - inputs.annual_demand).abs() / inputs.annual_demand;
        worst[1] = worst[1].max(demand_gap);
        if demand_gap > 1e-9 {
            return Err(format!("solve {k}: demand harmonization residual {demand_gap:.2e}"));
        }
        let r = rldc(&hs);
        let p = pdc(&hs);
        let monotone = r.curves.iter().all(|c| c.mw.windows(2).all(|w| w[0] >= w[1]))
            && p.price.windows(2).all(|w| w[0] >= w[1]);
        let inflexible = hs.hour_weight * hs.demand.iter().sum::<f64>();
        let top = (r.integral(0) - inflexible).abs() / inflexible;
        worst[2] = worst[2].max(top);
        if !monotone || top > 1e-9 {
            return Err(format!("solve {k}: curves monotone={monotone}, top integral residual {top:.2e}"));
        }
    }
    Ok(format!(
        "100 solves, zero-sum {:.2e}, demand_gap {:.2e}, RLDC integral {:.2e}",
        worst[0], worst[1], worst[2]
    ))
}

fn a8() -> Check {
    let (_, s) = synthetic::net_zero(synthetic::DEFAULT_SEED).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let res = run_coupled(&s).map_err(|e| e.to_string())?;
    let dt = t.elapsed().as_secs_f64();
    let last = res.last();
    let mut cp_ok = true;
    let mut cps = Vec::new();
    for ms in &last.stats {
        for ts in ms.techs.iter().filter(|t| t.kind == TechKind::FlexDemand) {
            match ts.capture_price {
                Some(cp) => {
                    cp_ok &= cp <= ms.arithmetic_mean_price + 1e-9;
                    cps.push(format!("{} {cp:.2}/{:.2}", ms.year, ms.arithmetic_mean_price));
                }
                None => cps.push(format!("{} none", ms.year)),
            }
        }
    }
    ensure(
        res.converged && last.share_gap <= 0.07 && cp_ok && !cps.is_empty() && dt < 900.0,
        format!(
            "converged={} after {} iterations, gap {:.4}, CP/mean [{}], {dt:.1} s",
            res.converged,
            res.iterations,
            last.share_gap,
            cps.join(", ")
        ),
    )
}

/// Dispatchable that sets the price in the most hours: λ_h equals its
/// running cost while it runs strictly between zero and capacity.
fn price_setter(hs: &HourlySolution) -> Option<String> {
    hs.techs
        .iter()
        .filter(|t| t.kind == TechKind::Dispatchable && t.capacity > 0.0)
        .map(|t| {
            let tol = 1e-6 * (1.0 + t.variable_cost.abs());
            let n = (0..hs.hours())
                .filter(|&h| {
                    let g = t.generation[h];
                    (hs.price[h] - t.variable_cost).abs() <= tol && g > 1e-9 * t.capacity && g < t.capacity * (1.0 - 1e-9)
                })
                .count();
            (n, t.name.clone())
        })
        .filter(|(n, _)| *n > 0)
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, name)| name)
}

fn a9() -> Check {
    let (_, s) = synthetic::solar_heavy(synthetic::DEFAULT_SEED).map_err(|e| e.to_string())?;
    let res = run_coupled(&s).map_err(|e| e.to_string())?;
    let last = res.last();
    let mut found = Vec::new();
    let mut ok = res.converged;
    for (hs, ms) in last.hourly.iter().zip(&last.stats) {
        let yi = last.annual.years.iter().position(|y| y.year == hs.year).expect("coupled year");
        let k = last.annual.techs.iter().position(|t| t == "solar").expect("solar");
        let share = last.annual.share(yi, k);
        if share <= 0.5 {
            continue;
        }
        let eta_solar = ms.tech("solar").and_then(|t| t.markup).unwrap_or(f64::NAN);
        let setter = price_setter(hs);
        let eta_setter = setter
            .as_deref()
            .and_then(|n| ms.tech(n))
            .and_then(|t| t.markup)
            .unwrap_or(f64::NAN);
        ok &= eta_solar < 0.0 && eta_setter > 0.0;
        found.push(format!(
            "{}: solar share {share:.3} eta {eta_solar:.2}, {} eta {eta_setter:.2}",
            hs.year,
            setter.unwrap_or_else(|| "none".into())
        ));
    }
    ensure(
        ok && !found.is_empty(),
        format!("converged={} [{}]", res.converged, found.join("; ")),
    )
}

fn a10() -> Check {
    let (_, s) = synthetic::full_scale(synthetic::DEFAULT_SEED).map_err(|e| e.to_string())?;
    let year = s.grid.years[0];
    let inputs = YearInputs::uncoupled(&s, year).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let (hs, _) = solve_hourly(&s, &inputs).map_err(|e| e.to_string())?;
    let dt = t.elapsed().as_secs_f64();
    ensure(
        hs.hours() == 8760 && hs.techs.len() == 8 && dt < 60.0,
        format!("H={} with {} technologies in {dt:.1} s", hs.hours(), hs.techs.len()),
    )
}

fn report(id: &str, check: Check) -> bool {
    let (tag, msg, ok) = match check {
        Ok(m) => ("PASS", m, true),
        Err(m) => ("FAIL", m, false),
    };
    // written straight to the handle so it shows up in captured test logs
    let _ = writeln!(std::io::stderr(), "{id} {tag}: {msg}");
    ok
}

fn main() -> ExitCode {
    // `cargo test -- --list` and friends only want to enumerate tests
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let (r1, r2, r6) = match baseline() {
        Ok(run) => (a1(&run), a2(&run.0), a6(&run.0)),
        Err(e) => (Err(e.clone()), Err(e.clone()), Err(e)),
    };
    let mut ok = report("A1", r1);
    ok &= report("A2", r2);
    ok &= report("A3", a3());
    ok &= report("A4", a4());
    ok &= report("A5", a5());
    ok &= report("A6", r6);
    ok &= report("A7", a7());
    ok &= report("A8", a8());
    ok &= report("A9", a9());
    ok &= report("A10", a10());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
