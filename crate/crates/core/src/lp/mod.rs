//! Linear programs and solver backends.
//!
//! [`LinearProgram`] is a plain sparse description. Two backends implement
//! [`LpBackend`]: [`SparseBackend`] (HiGHS simplex, used by default) and
//! [`DenseBackend`] (bounded-variable tableau simplex, a small reference
//! implementation). [`vertex_optimum`] enumerates vertices of tiny boxed
//! programs as an independent oracle. Every optimal answer is checked against the
//! original rows before it is reported.

mod dense;
mod export;
mod oracle;
mod sparse;

use std::collections::BTreeMap;
use std::fmt;

pub use dense::DenseBackend;
pub use oracle::vertex_optimum;
pub use sparse::SparseBackend;

/// Primal feasibility tolerance of a reported optimum, applied to scaled
/// residuals (see [`LinearProgram::max_scaled_violation`]).
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    /// `-inf` when unbounded below.
    pub lower: f64,
    /// `+inf` when unbounded above.
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    /// Sorted by variable, no duplicates.
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.cmp {
            Cmp::Le => (a - self.rhs).max(0.0),
            Cmp::Ge => (self.rhs - a).max(0.0),
            Cmp::Eq => (a - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    vars: Vec<Variable>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            vars: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(0.0);
        VarId(self.vars.len() - 1)
    }

    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) {
        self.vars[v.0].lower = lower;
        self.vars[v.0].upper = upper;
    }

    pub fn set_objective(&mut self, v: VarId, coef: f64) {
        self.objective[v.0] = coef;
    }

    /// Adds a row; repeated variables in `terms` are summed and zero
    /// coefficients dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> RowId {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for (v, c) in terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        self.rows.push(Row {
            name: name.into(),
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            cmp,
            rhs,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        self.vars
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0))
            .fold(rows, f64::max)
    }

    /// Largest violation with each row residual divided by
    /// `1 + |rhs| + max_j |a_j|·‖x‖∞` and each bound violation by `1 + |bound|`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let amax = r.terms.iter().fold(0.0f64, |m, (_, c)| m.max(c.abs()));
                r.violation(x) / (1.0 + r.rhs.abs() + amax * xmax)
            })
            .fold(0.0, f64::max);
        self.vars
            .iter()
            .zip(x)
            .map(|(v, &xv)| {
                let below = if v.lower.is_finite() {
                    (v.lower - xv) / (1.0 + v.lower.abs())
                } else {
                    0.0
                };
                let above = if v.upper.is_finite() {
                    (xv - v.upper) / (1.0 + v.upper.abs())
                } else {
                    0.0
                };
                below.max(above).max(0.0)
            })
            .fold(rows, f64::max)
    }

    /// Checks finiteness of coefficients and consistency of bounds.
    pub fn check(&self) -> Result<(), String> {
        for v in &self.vars {
            if v.lower.is_nan()
                || v.upper.is_nan()
                || v.lower > v.upper
                || v.lower == f64::INFINITY
                || v.upper == f64::NEG_INFINITY
            {
                return Err(format!(
                    "bad bounds on {}: [{}, {}]",
                    v.name, v.lower, v.upper
                ));
            }
        }
        if let Some(i) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(format!(
                "non-finite objective coefficient on {}",
                self.vars[i].name
            ));
        }
        for r in &self.rows {
            if !r.rhs.is_finite() || r.terms.iter().any(|(_, c)| !c.is_finite()) {
                return Err(format!("non-finite coefficient in row {}", r.name));
            }
            if let Some((v, _)) = r.terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
                return Err(format!(
                    "row {} references unknown variable {}",
                    r.name, v.0
                ));
            }
        }
        Ok(())
    }

    /// Human-readable export in CPLEX LP text form.
    pub fn to_lp_text(&self) -> String {
        export::write_lp(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::NumericalFailure => "numerical_failure",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub backend: &'static str,
    pub iterations: usize,
    /// Unscaled largest row or bound violation of the returned point.
    pub max_violation: f64,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values, empty unless optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub stats: SolveStats,
}

impl LpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn failed(
        status: LpStatus,
        backend: &'static str,
        iterations: usize,
        message: Option<String>,
    ) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            stats: SolveStats {
                backend,
                iterations,
                max_violation: f64::NAN,
                message,
            },
        }
    }

    /// Wraps a raw optimal point after checking it against `lp`.
    fn checked(lp: &LinearProgram, x: Vec<f64>, backend: &'static str, iterations: usize) -> Self {
        let viol = lp.max_violation(&x);
        let scaled = lp.max_scaled_violation(&x);
        let objective = lp.objective_value(&x);
        let (status, message) = if scaled <= FEASIBILITY_TOL {
            (LpStatus::Optimal, None)
        } else {
            (
                LpStatus::NumericalFailure,
                Some(format!("returned point violates constraints by {viol:e}")),
            )
        };
        Self {
            status,
            x,
            objective,
            stats: SolveStats {
                backend,
                iterations,
                max_violation: viol,
                message,
            },
        }
    }
}

/// A solver for [`LinearProgram`]s. Implementations are deterministic.
pub trait LpBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, lp: &LinearProgram) -> LpSolution;
}

/// Backend choice by configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BackendKind {
    #[default]
    Sparse,
    Dense,
}

impl BackendKind {
    pub fn backend(self) -> &'static dyn LpBackend {
        match self {
            BackendKind::Sparse => &SparseBackend,
            BackendKind::Dense => &DenseBackend,
        }
    }
}

/// Solves with the default backend.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    solve_with(lp, BackendKind::default())
}

pub fn solve_with(lp: &LinearProgram, kind: BackendKind) -> LpSolution {
    if let Err(msg) = lp.check() {
        let backend = kind.backend().name();
        return LpSolution::failed(LpStatus::NumericalFailure, backend, 0, Some(msg));
    }
    kind.backend().solve(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both(lp: &LinearProgram) -> [LpSolution; 2] {
        [
            solve_with(lp, BackendKind::Sparse),
            solve_with(lp, BackendKind::Dense),
        ]
    }

    #[test]
    fn single_variable() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        lp.add_row("cap", [(x, 1.0)], Cmp::Le, 3.0);
        for s in both(&lp) {
            assert_eq!(s.status, LpStatus::Optimal, "{}", s.stats.backend);
            assert!((s.value(x) - 3.0).abs() < 1e-12);
            assert!((s.objective - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_optimum() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        lp.set_objective(y, 1.0);
        lp.add_row("sum", [(x, 1.0), (y, 1.0)], Cmp::Le, 1.0);
        for s in both(&lp) {
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.objective - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn contradiction_is_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row("lo", [(x, 1.0)], Cmp::Ge, 2.0);
        lp.add_row("hi", [(x, 1.0)], Cmp::Le, 1.0);
        for s in both(&lp) {
            assert_eq!(s.status, LpStatus::Infeasible, "{}", s.stats.backend);
        }
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        lp.add_row("r", [(x, 1.0), (y, -1.0)], Cmp::Le, 1.0);
        for s in both(&lp) {
            assert_eq!(s.status, LpStatus::Unbounded, "{}", s.stats.backend);
        }
    }

    #[test]
    fn duplicate_terms_are_merged() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 10.0);
        lp.set_objective(x, 1.0);
        lp.add_row("r", [(x, 1.0), (x, 1.0)], Cmp::Le, 4.0);
        assert_eq!(lp.rows()[0].terms, vec![(x, 2.0)]);
        for s in both(&lp) {
            assert!((s.value(x) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equality_and_free_variables() {
        // min x + 2y  s.t. x - y = 1, y >= -3, x free
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = lp.add_var("y", -3.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        lp.set_objective(y, 2.0);
        lp.add_row("link", [(x, 1.0), (y, -1.0)], Cmp::Eq, 1.0);
        for s in both(&lp) {
            assert_eq!(s.status, LpStatus::Optimal, "{}", s.stats.backend);
            assert!((s.objective + 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_bounds_are_reported() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var("x", 1.0, 0.0);
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::NumericalFailure);
        assert!(s.stats.message.unwrap().contains("bad bounds"));
    }
}
