//! HiGHS-backed solve with power-of-two equilibration.

use highs::{ColProblem, HessianFormat, HighsModelStatus, Sense as HSense};

use super::{LpProblem, LpSolution, Sense, Status};
use crate::{Error, Result};

/// Row and column scale factors, each a power of two so that scaling is exact.
struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
}

fn pow2_round(x: f64) -> f64 {
    if !(x.is_finite() && x > 0.0) {
        return 1.0;
    }
    2f64.powi(x.log2().round().clamp(-60.0, 60.0) as i32)
}

/// Geometric-mean equilibration: alternately scale rows and columns so the
/// largest and smallest magnitude in each line straddle one.
fn equilibrate(p: &LpProblem) -> Scaling {
    let m = p.num_rows();
    let n = p.num_vars();
    let mut row = vec![1.0; m];
    let mut col = vec![1.0; n];
    for _ in 0..4 {
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![0.0f64; m];
        for (i, c) in p.constraints.iter().enumerate() {
            for (v, a) in &c.coeffs {
                let x = (a * col[v.0]).abs();
                if x > 0.0 {
                    lo[i] = lo[i].min(x);
                    hi[i] = hi[i].max(x);
                }
            }
        }
        for i in 0..m {
            if hi[i] > 0.0 {
                row[i] = pow2_round(1.0 / (lo[i] * hi[i]).sqrt());
            }
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, c) in p.constraints.iter().enumerate() {
            for (v, a) in &c.coeffs {
                let x = (a * row[i]).abs();
                if x > 0.0 {
                    lo[v.0] = lo[v.0].min(x);
                    hi[v.0] = hi[v.0].max(x);
                }
            }
        }
        for j in 0..n {
            if hi[j] > 0.0 {
                col[j] = pow2_round(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
    }
    Scaling { row, col }
}

fn row_bounds(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Eq => (rhs, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
    }
}

struct Raw {
    status: HighsModelStatus,
    x: Vec<f64>,
    row_duals: Vec<f64>,
    col_duals: Vec<f64>,
}

fn run_highs(p: &LpProblem, sc: &Scaling) -> Raw {
    let mut hp = ColProblem::default();
    let rows: Vec<_> = p
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (lo, hi) = row_bounds(c.sense, c.rhs * sc.row[i]);
            hp.add_row(lo..=hi)
        })
        .collect();
    let mut by_col: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); p.num_vars()];
    for (i, c) in p.constraints.iter().enumerate() {
        for (v, a) in &c.coeffs {
            by_col[v.0].push((rows[i], a * sc.row[i] * sc.col[v.0]));
        }
    }
    for (j, v) in p.variables.iter().enumerate() {
        let s = sc.col[j];
        hp.add_column(v.obj * s, (v.lower / s)..=(v.upper / s), &by_col[j]);
    }
    let mut model = hp.optimise(HSense::Minimise);
    model.make_quiet();
    model.set_option("threads", 1);
    model.set_option("random_seed", 0);
    if !p.quadratic.is_empty() {
        let mut q = vec![Vec::new(); p.num_vars()];
        for (v, val) in &p.quadratic {
            q[v.0].push((v.0, val * sc.col[v.0] * sc.col[v.0]));
        }
        model.pass_hessian(HessianFormat::Triangular, q);
        model.set_option("qp_regularization_value", 0.0);
    }
    let solved = model.solve();
    let status = solved.status();
    let sol = solved.get_solution();
    Raw {
        status,
        x: sol.columns().iter().zip(&sc.col).map(|(x, s)| x * s).collect(),
        row_duals: sol.dual_rows().iter().zip(&sc.row).map(|(y, r)| y * r).collect(),
        col_duals: sol.dual_columns().iter().zip(&sc.col).map(|(d, s)| d / s).collect(),
    }
}

/// Solves `p`. Non-optimal outcomes are returned as a status-tagged solution
/// (see [`LpSolution::into_optimal`]); errors are reserved for solver failures.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    if let Some(v) = p.variables.iter().find(|v| v.lower > v.upper) {
        return Ok(not_optimal(p, Status::Infeasible, Some(format!("bounds[{}]", v.name))));
    }
    if p.num_vars() == 0 {
        let feasible = p.constraints.iter().all(|c| match c.sense {
            Sense::Le => 0.0 <= c.rhs,
            Sense::Ge => 0.0 >= c.rhs,
            Sense::Eq => c.rhs == 0.0,
        });
        if !feasible {
            return Ok(not_optimal(p, Status::Infeasible, first_violated_family(p)));
        }
        return Ok(LpSolution {
            status: Status::Optimal,
            objective: 0.0,
            x: vec![],
            row_duals: vec![0.0; p.num_rows()],
            reduced_costs: vec![],
            diagnostic: None,
        });
    }
    let sc = equilibrate(p);
    let raw = run_highs(p, &sc);
    match raw.status {
        HighsModelStatus::Optimal => Ok(LpSolution {
            status: Status::Optimal,
            objective: p.objective_value(&raw.x),
            x: raw.x,
            row_duals: raw.row_duals,
            reduced_costs: raw.col_duals,
            diagnostic: None,
        }),
        HighsModelStatus::Infeasible => Ok(not_optimal(p, Status::Infeasible, first_violated_family(p))),
        HighsModelStatus::Unbounded => Ok(not_optimal(p, Status::Unbounded, Some("objective".into()))),
        HighsModelStatus::UnboundedOrInfeasible => match first_violated_family(p) {
            Some(f) => Ok(not_optimal(p, Status::Infeasible, Some(f))),
            None => Ok(not_optimal(p, Status::Unbounded, Some("objective".into()))),
        },
        other => Err(Error::Solve {
            status: format!("{other:?}"),
            family: "solver".into(),
        }),
    }
}

fn not_optimal(p: &LpProblem, status: Status, diagnostic: Option<String>) -> LpSolution {
    LpSolution {
        status,
        objective: f64::NAN,
        x: vec![f64::NAN; p.num_vars()],
        row_duals: vec![f64::NAN; p.num_rows()],
        reduced_costs: vec![f64::NAN; p.num_vars()],
        diagnostic,
    }
}

/// Elastic feasibility problem: every row gets nonnegative slack on its
/// violating side and the total slack is minimized. Returns the family of
/// the lowest-index row whose slack stays positive, or `None` if the rows
/// are jointly feasible.
fn first_violated_family(p: &LpProblem) -> Option<String> {
    let mut e = LpProblem::new();
    for v in &p.variables {
        e.add_var(v.name.clone(), v.lower, v.upper, 0.0);
    }
    let mut slacks = Vec::new();
    for (i, c) in p.constraints.iter().enumerate() {
        let mut coeffs = c.coeffs.clone();
        let mut mine = Vec::new();
        if c.sense != Sense::Le {
            let s = e.add_var(format!("elastic_up[{i}]"), 0.0, f64::INFINITY, 1.0);
            coeffs.push((s, 1.0));
            mine.push(s);
        }
        if c.sense != Sense::Ge {
            let s = e.add_var(format!("elastic_dn[{i}]"), 0.0, f64::INFINITY, 1.0);
            coeffs.push((s, -1.0));
            mine.push(s);
        }
        e.add_row(c.name.clone(), coeffs, c.sense, c.rhs);
        slacks.push(mine);
    }
    if e.num_vars() == 0 {
        return p.constraints.first().map(|c| c.family().to_string());
    }
    let raw = run_highs(&e, &equilibrate(&e));
    if raw.status != HighsModelStatus::Optimal {
        return p.constraints.first().map(|c| c.family().to_string());
    }
    for (i, c) in p.constraints.iter().enumerate() {
        let s: f64 = slacks[i].iter().map(|v| raw.x[v.0]).sum();
        if s > 1e-7 * (1.0 + c.rhs.abs()) {
            return Some(c.family().to_string());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_scaling_is_exact() {
        assert_eq!(pow2_round(3.0), 4.0);
        assert_eq!(pow2_round(0.3), 0.25);
        assert_eq!(pow2_round(0.0), 1.0);
    }
}
