//! Two dispatchable-only toy problems: Q1 with hourly capacity limits and Q2
//! with one annual capacity-factor equality per technology.
//!
//! Q2 takes φ from Q1's solution and includes only technologies Q1 builds.
//! Without further information every technology in Q2 has the same cost per
//! MWh and the capacity split is not unique, so Q2 also carries Q1's market
//! value markups in share-responsive form (the same convex markup term the
//! annual model uses). Its unique optimum reproduces Q1's capacities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::prefactor::markup_ratio;
use crate::lp::{self, LpProblem, Sense, VarId};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyInstance {
    /// Fixed cost per MW.
    pub fixed_cost: Vec<f64>,
    pub variable_cost: Vec<f64>,
    pub demand: Vec<f64>,
}

impl ToyInstance {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let n = rng.gen_range(2..=4);
        let hours = rng.gen_range(3..=10);
        ToyInstance {
            fixed_cost: (0..n).map(|_| rng.gen_range(1.0..20.0)).collect(),
            variable_cost: (0..n).map(|_| rng.gen_range(0.5..10.0)).collect(),
            demand: (0..hours).map(|_| rng.gen_range(0.5..5.0)).collect(),
        }
    }

    pub fn hours(&self) -> usize {
        self.demand.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q1Solution {
    pub capacity: Vec<f64>,
    /// generation[s][h]
    pub generation: Vec<Vec<f64>>,
    pub price: Vec<f64>,
    /// Capacity-limit duals μ[s][h] ≥ 0.
    pub mu: Vec<Vec<f64>>,
}

impl Q1Solution {
    /// φ_s = Σ_h G / (H·P).
    pub fn cf(&self, s: usize) -> f64 {
        let h = self.price.len() as f64;
        self.generation[s].iter().sum::<f64>() / (h * self.capacity[s])
    }

    pub fn market_value(&self, s: usize) -> f64 {
        let g = &self.generation[s];
        g.iter().zip(&self.price).map(|(a, b)| a * b).sum::<f64>() / g.iter().sum::<f64>()
    }
}

pub fn solve_q1(inst: &ToyInstance) -> Result<Q1Solution> {
    let n = inst.fixed_cost.len();
    let hours = inst.hours();
    let mut p = LpProblem::new();
    let cap: Vec<VarId> = (0..n)
        .map(|s| p.add_var(format!("P[{s}]"), 0.0, f64::INFINITY, inst.fixed_cost[s]))
        .collect();
    let mut gen = vec![Vec::new(); n];
    let mut rows = vec![Vec::new(); n];
    for h in 0..hours {
        for s in 0..n {
            let g = p.add_var(format!("G[{s},{h}]"), 0.0, f64::INFINITY, inst.variable_cost[s]);
            rows[s].push(p.add_row(format!("cap[{s},{h}]"), vec![(g, 1.0), (cap[s], -1.0)], Sense::Le, 0.0));
            gen[s].push(g);
        }
    }
    let balance: Vec<_> = (0..hours)
        .map(|h| {
            let terms = (0..n).map(|s| (gen[s][h], 1.0)).collect();
            p.add_row(format!("balance[{h}]"), terms, Sense::Eq, inst.demand[h])
        })
        .collect();
    let sol = lp::solve(&p)?.into_optimal()?;
    Ok(Q1Solution {
        capacity: cap.iter().map(|v| sol.value(*v)).collect(),
        generation: gen.iter().map(|g| g.iter().map(|v| sol.value(*v)).collect()).collect(),
        price: balance.iter().map(|r| sol.dual(*r)).collect(),
        mu: rows.iter().map(|r| r.iter().map(|r| -sol.dual(*r)).collect()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q2Solution {
    /// Indices into the instance's technologies.
    pub techs: Vec<usize>,
    pub cf: Vec<f64>,
    pub capacity: Vec<f64>,
    /// Dual of Σ_h G = H·φ·P.
    pub mu: Vec<f64>,
}

/// Q2 on the technologies Q1 builds. With `markups` false the markup term is
/// left out, which reduces Q2 to the bare annual-equality form.
pub fn solve_q2(inst: &ToyInstance, q1: &Q1Solution, markups: bool) -> Result<Q2Solution> {
    let hours = inst.hours();
    let h = hours as f64;
    let techs: Vec<usize> = (0..inst.fixed_cost.len()).filter(|&s| q1.capacity[s] > 1e-9).collect();
    let total: f64 = inst.demand.iter().sum();
    let mean_price = q1.price.iter().zip(&inst.demand).map(|(a, b)| a * b).sum::<f64>() / total;
    let mut p = LpProblem::new();
    let mut gen = vec![Vec::new(); techs.len()];
    let mut caps = Vec::new();
    let mut annual_rows = Vec::new();
    let mut cfs = Vec::new();
    for (k, &s) in techs.iter().enumerate() {
        let cf = q1.cf(s);
        cfs.push(cf);
        let cap = p.add_var(format!("P[{s}]"), 0.0, f64::INFINITY, inst.fixed_cost[s]);
        for hh in 0..hours {
            gen[k].push(p.add_var(format!("G[{s},{hh}]"), 0.0, f64::INFINITY, inst.variable_cost[s]));
        }
        let mut terms: Vec<(VarId, f64)> = gen[k].iter().map(|g| (*g, 1.0)).collect();
        terms.push((cap, -h * cf));
        annual_rows.push(p.add_row(format!("annual[{s}]"), terms, Sense::Eq, 0.0));
        if markups {
            let mv = q1.market_value(s);
            let b = markup_ratio(mv, mean_price)?;
            let share = q1.generation[s].iter().sum::<f64>() / total;
            let e = p.add_var(format!("E[{s}]"), 0.0, f64::INFINITY, -((1.0 + b * share) * mv - mean_price));
            p.set_quadratic(e, b * mv / total);
            let mut def: Vec<(VarId, f64)> = gen[k].iter().map(|g| (*g, -1.0)).collect();
            def.push((e, 1.0));
            p.add_row(format!("energy[{s}]"), def, Sense::Eq, 0.0);
        }
        caps.push(cap);
    }
    for hh in 0..hours {
        let terms = (0..techs.len()).map(|k| (gen[k][hh], 1.0)).collect();
        p.add_row(format!("balance[{hh}]"), terms, Sense::Eq, inst.demand[hh]);
    }
    let sol = lp::solve(&p)?;
    if !sol.is_optimal() {
        return Err(Error::Invariant(format!("Q2 not optimal: {}", sol.status)));
    }
    Ok(Q2Solution {
        techs,
        cf: cfs,
        capacity: caps.iter().map(|v| sol.value(*v)).collect(),
        mu: annual_rows.iter().map(|r| -sol.dual(*r)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q1Q2Report {
    /// max_s |H·φ·μ′ − Σ_h μ_h| / (1 + Σ_h μ_h)
    pub mu_link_residual: f64,
    /// max_s |P_Q2 − P_Q1| / (1 + P_Q1)
    pub capacity_residual: f64,
}

pub fn compare(inst: &ToyInstance) -> Result<Q1Q2Report> {
    let q1 = solve_q1(inst)?;
    let q2 = solve_q2(inst, &q1, true)?;
    let h = inst.hours() as f64;
    let mut link = 0.0f64;
    let mut cap = 0.0f64;
    for (k, &s) in q2.techs.iter().enumerate() {
        let sum_mu: f64 = q1.mu[s].iter().sum();
        link = link.max((h * q2.cf[k] * q2.mu[k] - sum_mu).abs() / (1.0 + sum_mu.abs()));
        cap = cap.max((q2.capacity[k] - q1.capacity[s]).abs() / (1.0 + q1.capacity[s]));
    }
    Ok(Q1Q2Report {
        mu_link_residual: link,
        capacity_residual: cap,
    })
}

/// Terms of the complementary-slackness chain for one technology:
/// μ′·H·φ·P (annual form), Σ_h μ_h G_h, Σ_h μ_h P, and the largest per-hour
/// |μ_h G_h − μ_h P|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTerms {
    pub tech: usize,
    pub annual_form: f64,
    pub hourly_weighted: f64,
    pub hourly_capacity: f64,
    pub max_hourly_slack: f64,
}

pub fn slackness_chain(inst: &ToyInstance) -> Result<Vec<ChainTerms>> {
    let q1 = solve_q1(inst)?;
    let q2 = solve_q2(inst, &q1, true)?;
    let h = inst.hours() as f64;
    Ok(q2
        .techs
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let p = q1.capacity[s];
            let mu = &q1.mu[s];
            let g = &q1.generation[s];
            ChainTerms {
                tech: s,
                annual_form: q2.mu[k] * h * q2.cf[k] * p,
                hourly_weighted: mu.iter().zip(g).map(|(m, x)| m * x).sum(),
                hourly_capacity: mu.iter().map(|m| m * p).sum(),
                max_hourly_slack: mu.iter().zip(g).map(|(m, x)| (m * x - m * p).abs()).fold(0.0, f64::max),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample() -> ToyInstance {
        ToyInstance {
            fixed_cost: vec![8.0, 2.0],
            variable_cost: vec![1.0, 5.0],
            demand: vec![3.0, 1.0],
        }
    }

    #[test]
    fn q1_builds_base_and_peak() {
        let q1 = solve_q1(&counterexample()).unwrap();
        assert!((q1.capacity[0] - 1.0).abs() < 1e-9);
        assert!((q1.capacity[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bare_q2_misses_q1_capacities() {
        let inst = counterexample();
        let q1 = solve_q1(&inst).unwrap();
        let bare = solve_q2(&inst, &q1, false).unwrap();
        assert!((bare.capacity[0] - 2.0).abs() < 1e-9);
        assert!(bare.capacity[1].abs() < 1e-9);
        let full = solve_q2(&inst, &q1, true).unwrap();
        assert!((full.capacity[0] - 1.0).abs() < 1e-6);
        assert!((full.capacity[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn chain_closes_on_counterexample() {
        for t in slackness_chain(&counterexample()).unwrap() {
            assert!(t.max_hourly_slack < 1e-9);
            assert!((t.hourly_weighted - t.hourly_capacity).abs() < 1e-9);
            assert!((t.annual_form - t.hourly_capacity).abs() < 1e-6);
        }
    }
}
