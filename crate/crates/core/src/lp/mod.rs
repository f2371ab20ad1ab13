//! Linear programs with named variables and constraints, solved with duals.
//!
//! Sign convention: the dual of a row is ∂objective/∂rhs for a minimization.
//! A binding `≥` row has a nonnegative dual, a binding `≤` row a nonpositive one.
//! Reduced costs are `c_j + Q_jj·x_j − Σ_i a_ij·y_i`.

mod brute;
mod dump;
mod solve;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use brute::brute_force_solve;
pub use dump::write_lp;
pub use solve::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Family label: the name up to the first `[`.
    pub fn family(&self) -> &str {
        family_of(&self.name)
    }
}

pub fn family_of(name: &str) -> &str {
    name.split('[').next().unwrap_or(name)
}

/// A minimization problem. An optional separable convex quadratic term
/// `½ Σ q_j x_j²` is supported for the share-responsive markup objective.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Diagonal Hessian entries `q_j ≥ 0`.
    pub quadratic: Vec<(VarId, f64)>,
    var_index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable; panics on duplicate names or non-finite cost.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> VarId {
        let name = name.into();
        assert!(obj.is_finite(), "objective coefficient of {name} is not finite");
        assert!(!lower.is_nan() && !upper.is_nan(), "bounds of {name} are NaN");
        let id = self.variables.len();
        let prev = self.var_index.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, lower, upper, obj });
        VarId(id)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        let name = name.into();
        assert!(rhs.is_finite(), "rhs of {name} is not finite");
        for (v, a) in &coeffs {
            assert!(a.is_finite(), "coefficient of {} in {name} is not finite", v.0);
            assert!(v.0 < self.variables.len(), "unknown variable in {name}");
        }
        let id = self.constraints.len();
        let prev = self.row_index.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate constraint {name}");
        self.constraints.push(Constraint { name, coeffs, sense, rhs });
        RowId(id)
    }

    pub fn add_obj(&mut self, v: VarId, delta: f64) {
        assert!(delta.is_finite());
        self.variables[v.0].obj += delta;
    }

    pub fn set_quadratic(&mut self, v: VarId, q: f64) {
        assert!(q.is_finite() && q >= 0.0, "quadratic term must be finite and convex");
        self.quadratic.retain(|(u, _)| *u != v);
        if q > 0.0 {
            self.quadratic.push((v, q));
        }
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied().map(VarId)
    }

    pub fn row(&self, name: &str) -> Option<RowId> {
        self.row_index.get(name).copied().map(RowId)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.coeffs.iter().map(|(v, a)| a * x[v.0]).sum())
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.variables.iter().zip(x).map(|(v, xi)| v.obj * xi).sum();
        let quad: f64 = self.quadratic.iter().map(|(v, q)| 0.5 * q * x[v.0] * x[v.0]).sum();
        lin + quad
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub objective: f64,
    pub x: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// For non-optimal status: family of the first constraint an elastic
    /// feasibility problem has to relax.
    pub diagnostic: Option<String>,
}

impl LpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }

    pub fn dual(&self, r: RowId) -> f64 {
        self.row_duals[r.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Converts a non-optimal status into an error carrying the diagnostic.
    pub fn into_optimal(self) -> crate::Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(crate::Error::Solve {
                status: self.status.to_string(),
                family: self.diagnostic.clone().unwrap_or_else(|| "unknown".into()),
            })
        }
    }
}

/// Largest violations of the optimality conditions, in the problem's own units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// max over rows and bounds of violation / (1 + |rhs|)
    pub primal_infeasibility: f64,
    /// max over rows of wrong-signed dual magnitude, and over columns of
    /// reduced cost pointing away from an active bound
    pub dual_infeasibility: f64,
    /// |primal − dual| / (1 + |primal|)
    pub duality_gap: f64,
    /// max over rows of |dual · slack| / (1 + |rhs|)
    pub complementary_slackness: f64,
}

impl KktReport {
    pub fn within(&self, eps_feas: f64, eps_gap: f64) -> bool {
        self.primal_infeasibility <= eps_feas
            && self.complementary_slackness <= eps_feas
            && self.duality_gap <= eps_gap
    }
}

/// Evaluates feasibility, duality gap and slackness of a solution independently of the solver.
pub fn check_kkt(p: &LpProblem, s: &LpSolution) -> KktReport {
    let act = p.row_activity(&s.x);
    let mut pinf: f64 = 0.0;
    let mut dinf: f64 = 0.0;
    let mut cs: f64 = 0.0;
    let mut dual_obj = 0.0;
    for (i, c) in p.constraints.iter().enumerate() {
        let y = s.row_duals[i];
        let viol = match c.sense {
            Sense::Le => (act[i] - c.rhs).max(0.0),
            Sense::Ge => (c.rhs - act[i]).max(0.0),
            Sense::Eq => (act[i] - c.rhs).abs(),
        };
        pinf = pinf.max(viol / (1.0 + c.rhs.abs()));
        let wrong = match c.sense {
            Sense::Le => y.max(0.0),
            Sense::Ge => (-y).max(0.0),
            Sense::Eq => 0.0,
        };
        dinf = dinf.max(wrong);
        cs = cs.max((y * (act[i] - c.rhs)).abs() / (1.0 + c.rhs.abs()));
        dual_obj += y * c.rhs;
    }
    let mut d: Vec<f64> = p.variables.iter().map(|v| v.obj).collect();
    for (v, q) in &p.quadratic {
        d[v.0] += q * s.x[v.0];
    }
    for (i, c) in p.constraints.iter().enumerate() {
        for (v, a) in &c.coeffs {
            d[v.0] -= a * s.row_duals[i];
        }
    }
    for (j, v) in p.variables.iter().enumerate() {
        let x = s.x[j];
        pinf = pinf.max((v.lower - x).max(0.0) / (1.0 + v.lower.abs().min(1e300)));
        pinf = pinf.max((x - v.upper).max(0.0) / (1.0 + v.upper.abs().min(1e300)));
        let dj = d[j];
        if dj > 0.0 {
            if v.lower.is_finite() {
                dual_obj += dj * v.lower;
            } else {
                dinf = dinf.max(dj);
            }
        } else if dj < 0.0 {
            if v.upper.is_finite() {
                dual_obj += dj * v.upper;
            } else {
                dinf = dinf.max(-dj);
            }
        }
    }
    let quad: f64 = p.quadratic.iter().map(|(v, q)| 0.5 * q * s.x[v.0] * s.x[v.0]).sum();
    dual_obj -= quad;
    let primal = p.objective_value(&s.x);
    KktReport {
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        duality_gap: (primal - dual_obj).abs() / (1.0 + primal.abs()),
        complementary_slackness: cs,
    }
}
