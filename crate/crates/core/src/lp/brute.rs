//! Vertex-enumeration oracle for small problems. Independent of the main
//! solver: it never calls HiGHS and shares no code with it beyond the
//! problem and solution types.

use super::{LpProblem, LpSolution, Sense, Status};
use crate::{Error, Result};

pub const MAX_VARS: usize = 12;
pub const MAX_ROWS: usize = 20;

const TOL: f64 = 1e-9;

#[derive(Clone, Copy)]
enum Kind {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

struct Cand {
    kind: Kind,
    coeffs: Vec<f64>,
    rhs: f64,
}

/// Solves a dense `n×n` system by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Enumerates basic solutions (active sets of `n` independent constraints,
/// equalities always included) in lexicographic order and returns the first
/// one that is primal feasible and whose multipliers have the optimal signs.
///
/// Assumes the feasible region has a vertex when nonempty (true whenever
/// every variable has a finite bound). With tied optimal vertices the
/// oracle may return a different vertex than [`super::solve`].
pub fn brute_force_solve(p: &LpProblem) -> Result<LpSolution> {
    let n = p.num_vars();
    if n > MAX_VARS || p.num_rows() > MAX_ROWS {
        return Err(Error::Input(format!(
            "brute force limited to {MAX_VARS} variables and {MAX_ROWS} constraints"
        )));
    }
    if !p.quadratic.is_empty() {
        return Err(Error::Input("brute force handles linear objectives only".into()));
    }
    let dense = |coeffs: &[(super::VarId, f64)]| {
        let mut r = vec![0.0; n];
        for (v, a) in coeffs {
            r[v.0] += a;
        }
        r
    };
    let mut fixed = Vec::new();
    let mut optional = Vec::new();
    for (i, c) in p.constraints.iter().enumerate() {
        let cand = Cand {
            kind: Kind::Row(i),
            coeffs: dense(&c.coeffs),
            rhs: c.rhs,
        };
        if c.sense == Sense::Eq {
            fixed.push(cand);
        } else {
            optional.push(cand);
        }
    }
    for (j, v) in p.variables.iter().enumerate() {
        let unit = |j: usize| {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            r
        };
        if v.lower.is_finite() && v.upper.is_finite() && v.lower == v.upper {
            fixed.push(Cand { kind: Kind::Lower(j), coeffs: unit(j), rhs: v.lower });
            continue;
        }
        if v.lower.is_finite() {
            optional.push(Cand { kind: Kind::Lower(j), coeffs: unit(j), rhs: v.lower });
        }
        if v.upper.is_finite() {
            optional.push(Cand { kind: Kind::Upper(j), coeffs: unit(j), rhs: v.upper });
        }
    }
    // Dependent equalities are only checked for feasibility.
    let fixed = independent_rows(fixed, n);
    let base_fixed = fixed.len();
    let need = n - base_fixed;
    let c: Vec<f64> = p.variables.iter().map(|v| v.obj).collect();
    let mut any_feasible = false;

    let m_opt = optional.len();
    if need > m_opt {
        return Ok(empty(p, Status::Infeasible));
    }
    let mut idx: Vec<usize> = (0..need).collect();
    loop {
        let active: Vec<&Cand> = fixed[..base_fixed]
            .iter()
            .chain(idx.iter().map(|&k| &optional[k]))
            .collect();
        let a: Vec<Vec<f64>> = active.iter().map(|c| c.coeffs.clone()).collect();
        let b: Vec<f64> = active.iter().map(|c| c.rhs).collect();
        if let Some(x) = solve_dense(a.clone(), b) {
            if feasible(p, &x) {
                any_feasible = true;
                // Multipliers: c = Σ_k μ_k a_k, i.e. Aᵀ μ = c.
                let at: Vec<Vec<f64>> = (0..n).map(|j| a.iter().map(|r| r[j]).collect()).collect();
                if let Some(mu) = solve_dense(at, c.clone()) {
                    if let Some(sol) = assemble(p, &active, &mu, x) {
                        return Ok(sol);
                    }
                }
            }
        }
        if need == 0 || !next_combination(&mut idx, m_opt) {
            break;
        }
    }
    Ok(empty(p, if any_feasible { Status::Unbounded } else { Status::Infeasible }))
}

/// Keeps a maximal linearly independent subset of `rows`, in order.
fn independent_rows(rows: Vec<Cand>, n: usize) -> Vec<Cand> {
    // reduced row echelon form: (pivot column, row with a one there and
    // zeros in every other pivot column)
    let mut basis: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut kept = Vec::new();
    for c in rows {
        if basis.len() == n {
            break;
        }
        let scale = c.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut r = c.coeffs.clone();
        for (piv, b) in &basis {
            let f = r[*piv];
            for (x, y) in r.iter_mut().zip(b) {
                *x -= f * y;
            }
        }
        let piv = (0..n).max_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs())).unwrap_or(0);
        if n == 0 || r[piv].abs() <= 1e-10 * scale {
            continue;
        }
        let d = r[piv];
        r.iter_mut().for_each(|x| *x /= d);
        for (_, b) in basis.iter_mut() {
            let f = b[piv];
            for (x, y) in b.iter_mut().zip(&r) {
                *x -= f * y;
            }
        }
        basis.push((piv, r));
        kept.push(c);
    }
    kept
}

fn feasible(p: &LpProblem, x: &[f64]) -> bool {
    for (j, v) in p.variables.iter().enumerate() {
        if x[j] < v.lower - TOL * (1.0 + v.lower.abs()) || x[j] > v.upper + TOL * (1.0 + v.upper.abs()) {
            return false;
        }
    }
    let act = p.row_activity(x);
    p.constraints.iter().zip(act).all(|(c, a)| {
        let t = TOL * (1.0 + c.rhs.abs());
        match c.sense {
            Sense::Le => a <= c.rhs + t,
            Sense::Ge => a >= c.rhs - t,
            Sense::Eq => (a - c.rhs).abs() <= t,
        }
    })
}

fn assemble(p: &LpProblem, active: &[&Cand], mu: &[f64], x: Vec<f64>) -> Option<LpSolution> {
    let mut row_duals = vec![0.0; p.num_rows()];
    let mut reduced = vec![0.0; p.num_vars()];
    for (c, &m) in active.iter().zip(mu) {
        match c.kind {
            Kind::Row(i) => {
                let ok = match p.constraints[i].sense {
                    Sense::Ge => m >= -TOL,
                    Sense::Le => m <= TOL,
                    Sense::Eq => true,
                };
                if !ok {
                    return None;
                }
                row_duals[i] = m;
            }
            Kind::Lower(j) => {
                let v = &p.variables[j];
                if !(v.lower == v.upper || m >= -TOL) {
                    return None;
                }
                reduced[j] += m;
            }
            Kind::Upper(j) => {
                if m > TOL {
                    return None;
                }
                reduced[j] += m;
            }
        }
    }
    Some(LpSolution {
        status: Status::Optimal,
        objective: p.objective_value(&x),
        x,
        row_duals,
        reduced_costs: reduced,
        diagnostic: None,
    })
}

fn empty(p: &LpProblem, status: Status) -> LpSolution {
    LpSolution {
        status,
        objective: f64::NAN,
        x: vec![f64::NAN; p.num_vars()],
        row_duals: vec![f64::NAN; p.num_rows()],
        reduced_costs: vec![f64::NAN; p.num_vars()],
        diagnostic: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LpProblem, Sense};

    #[test]
    fn two_variable() {
        // min -x - y  s.t. x + 2y ≤ 4, 3x + y ≤ 6, x,y ≥ 0  → x=1.6, y=1.2
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, f64::INFINITY, -1.0);
        let y = p.add_var("y", 0.0, f64::INFINITY, -1.0);
        p.add_row("a", vec![(x, 1.0), (y, 2.0)], Sense::Le, 4.0);
        p.add_row("b", vec![(x, 3.0), (y, 1.0)], Sense::Le, 6.0);
        let s = brute_force_solve(&p).unwrap();
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
        assert!((s.objective + 2.8).abs() < 1e-12);
        // duals: -1 = y_a + 3 y_b, -1 = 2 y_a + y_b → y_a = -0.4, y_b = -0.2
        assert!((s.row_duals[0] + 0.4).abs() < 1e-12 && (s.row_duals[1] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        let mut p = LpProblem::new();
        for i in 0..13 {
            p.add_var(format!("x{i}"), 0.0, 1.0, 1.0);
        }
        assert!(brute_force_solve(&p).is_err());
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        p.add_row("r", vec![(x, 1.0)], Sense::Le, -1.0);
        assert_eq!(brute_force_solve(&p).unwrap().status, Status::Infeasible);
        let mut q = LpProblem::new();
        let x = q.add_var("x", 0.0, f64::INFINITY, -1.0);
        q.add_row("r", vec![(x, 1.0)], Sense::Ge, 1.0);
        assert_eq!(brute_force_solve(&q).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // 2x = 3 and 4x = 6 restate one equation
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, 5.0, 1.0);
        p.add_var("y", 0.0, 5.0, -1.0);
        p.add_row("a", vec![(x, 2.0)], Sense::Eq, 3.0);
        p.add_row("b", vec![(x, 4.0)], Sense::Eq, 6.0);
        let s = brute_force_solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.x[0] - 1.5).abs() < 1e-12 && (s.x[1] - 5.0).abs() < 1e-12);
        p.add_row("c", vec![(x, 1.0)], Sense::Eq, 2.0);
        assert_eq!(brute_force_solve(&p).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn degenerate_ties_share_objective() {
        // min -x - y s.t. x + y ≤ 1: every point on the edge is optimal.
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, f64::INFINITY, -1.0);
        let y = p.add_var("y", 0.0, f64::INFINITY, -1.0);
        p.add_row("r", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        let a = brute_force_solve(&p).unwrap();
        let b = crate::lp::solve(&p).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12);
    }
}
