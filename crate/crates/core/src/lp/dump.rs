//! Plain-text dump in CPLEX LP format for cross-checking with external solvers.

use std::fmt::Write as _;

use super::{LpProblem, Sense};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Renders the problem. Variables are written as `x<index>_<name>` and rows
/// as `c<index>_<name>` so that sanitized names stay unique. Coefficients use
/// Rust's shortest round-trip decimal form, so the dump is exact.
pub fn write_lp(p: &LpProblem) -> String {
    let vn: Vec<String> = p
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| format!("x{j}_{}", sanitize(&v.name)))
        .collect();
    let term = |out: &mut String, a: f64, name: &str| {
        if a < 0.0 {
            let _ = write!(out, " - {} {name}", -a);
        } else {
            let _ = write!(out, " + {a} {name}");
        }
    };
    let mut s = String::from("\\ generated by mcoupler\nMinimize\n obj:");
    for (j, v) in p.variables.iter().enumerate() {
        if v.obj != 0.0 {
            term(&mut s, v.obj, &vn[j]);
        }
    }
    if !p.quadratic.is_empty() {
        s.push_str(" + [");
        for (v, q) in &p.quadratic {
            let _ = write!(s, " + {q} {}^2", vn[v.0]);
        }
        s.push_str(" ] / 2");
    }
    s.push_str("\nSubject To\n");
    for (i, c) in p.constraints.iter().enumerate() {
        let _ = write!(s, " c{i}_{}:", sanitize(&c.name));
        for (v, a) in &c.coeffs {
            term(&mut s, *a, &vn[v.0]);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(s, " {op} {}", c.rhs);
    }
    s.push_str("Bounds\n");
    for (j, v) in p.variables.iter().enumerate() {
        let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
        let hi = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
        let _ = writeln!(s, " {lo} <= {} <= {hi}", vn[j]);
    }
    s.push_str("End\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_constraint_per_line() {
        let mut p = LpProblem::new();
        let x = p.add_var("P[2030,solar]", 0.0, f64::INFINITY, 0.1);
        p.add_row("balance[2030]", vec![(x, -2.5)], Sense::Ge, 3.0);
        let t = write_lp(&p);
        assert!(t.contains(" obj: + 0.1 x0_P_2030_solar_"));
        assert!(t.contains(" c0_balance_2030_: - 2.5 x0_P_2030_solar_ >= 3\n"));
        assert!(t.contains(" 0 <= x0_P_2030_solar_ <= +inf\n"));
    }
}
