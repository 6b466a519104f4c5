//! Finite linear reformulation of robust Bellman constraints.
//!
//! For an uncertainty-state `s` with successors `t_1..t_n`, the robust
//! constraint `r_s ≤ R(s) + min_{u ∈ U_s} Σ_j u_j·r_{t_j}` quantifies over the
//! polytope `U_s = {u : C u + g ≥ 0}`. LP duality turns the inner minimum
//! into a maximum over multipliers `μ ≥ 0` with `Cᵀμ = q`, `q_j = r_{t_j}`,
//! of `-μᵀg`. Hence the constraint holds iff some `μ ≥ 0` satisfies
//!
//! ```text
//! r_s + μᵀg ≤ R(s),    Cᵀμ = q.
//! ```
//!
//! Both are linear in `(r, μ)`.

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, Sense, VarId};
use crate::model::{Interval, ROW_SUM_TOL};
use crate::transform::SimpleForm;

/// `{u : C u + g ≥ 0}` for one interval row, with `C` stored by rows.
///
/// Row order: `u_j - a_j ≥ 0` for each `j`, then `b_j - u_j ≥ 0` for each
/// `j`, then `Σu - 1 ≥ 0`, then `1 - Σu ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePolytope {
    succ: Vec<usize>,
    bounds: Vec<Interval>,
    c: Vec<Vec<(usize, f64)>>,
    g: Vec<f64>,
}

pub fn build_polytope(row: &[(usize, Interval)]) -> Result<StatePolytope> {
    let mut row = row.to_vec();
    row.sort_by_key(|&(t, _)| t);
    let lo: f64 = row.iter().map(|(_, i)| i.lower).sum();
    let hi: f64 = row.iter().map(|(_, i)| i.upper).sum();
    if row.is_empty() || lo > 1.0 + ROW_SUM_TOL || hi < 1.0 - ROW_SUM_TOL {
        return Err(Error::EmptyPolytope {
            lower_sum: lo,
            upper_sum: hi,
        });
    }
    let n = row.len();
    let mut c = Vec::with_capacity(2 * n + 2);
    let mut g = Vec::with_capacity(2 * n + 2);
    for (j, (_, iv)) in row.iter().enumerate() {
        c.push(vec![(j, 1.0)]);
        g.push(-iv.lower);
    }
    for (j, (_, iv)) in row.iter().enumerate() {
        c.push(vec![(j, -1.0)]);
        g.push(iv.upper);
    }
    c.push((0..n).map(|j| (j, 1.0)).collect());
    g.push(-1.0);
    c.push((0..n).map(|j| (j, -1.0)).collect());
    g.push(1.0);
    Ok(StatePolytope {
        succ: row.iter().map(|&(t, _)| t).collect(),
        bounds: row.iter().map(|&(_, i)| i).collect(),
        c,
        g,
    })
}

impl StatePolytope {
    /// Number of successors `n`.
    pub fn dim(&self) -> usize {
        self.succ.len()
    }

    /// Number of rows `m = 2n + 2`.
    pub fn num_rows(&self) -> usize {
        self.g.len()
    }

    /// Successor ids in ascending order; column `j` of `C` refers to `succ()[j]`.
    pub fn succ(&self) -> &[usize] {
        &self.succ
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Sparse row `i` of `C`.
    pub fn c_row(&self, i: usize) -> &[(usize, f64)] {
        &self.c[i]
    }

    /// Dense `C` (for tests and small instances).
    pub fn c_dense(&self) -> Vec<Vec<f64>> {
        self.c
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.dim()];
                for &(j, v) in r {
                    d[j] = v;
                }
                d
            })
            .collect()
    }

    /// Column `j` of `C` as `(row, coefficient)` pairs.
    pub fn c_column(&self, j: usize) -> Vec<(usize, f64)> {
        let n = self.dim();
        vec![(j, 1.0), (n + j, -1.0), (2 * n, 1.0), (2 * n + 1, -1.0)]
    }

    /// `C u + g ≥ -tol` componentwise.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.c
            .iter()
            .zip(&self.g)
            .all(|(r, &gi)| r.iter().map(|&(j, v)| v * u[j]).sum::<f64>() + gi >= -tol)
    }
}

/// Dual rows of one uncertainty-state.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBlock {
    pub state: usize,
    pub reward: f64,
    pub polytope: StatePolytope,
}

impl DualBlock {
    /// Length of `μ`.
    pub fn num_duals(&self) -> usize {
        self.polytope.num_rows()
    }

    /// Appends `μ ≥ 0`, the bound row `r_s + μᵀg ≤ R(s)` and the equalities
    /// `(Cᵀμ)_j - r_{t_j} = 0`. `r_succ[j]` is the variable of successor `j`.
    /// Returns the `μ` variables.
    pub fn emit(&self, lp: &mut LinearProgram, r_state: VarId, r_succ: &[VarId]) -> Vec<VarId> {
        let s = self.state;
        let mu: Vec<VarId> = (0..self.num_duals())
            .map(|i| lp.add_var(format!("mu_{s}_{i}"), 0.0, f64::INFINITY))
            .collect();
        let mut bound = vec![(r_state, 1.0)];
        bound.extend(
            mu.iter()
                .zip(self.polytope.g())
                .filter(|(_, &g)| g != 0.0)
                .map(|(&v, &g)| (v, g)),
        );
        lp.add_row(format!("dual_bound_{s}"), bound, Cmp::Le, self.reward);
        for (j, &rv) in r_succ.iter().enumerate() {
            let mut terms: Vec<(VarId, f64)> = self
                .polytope
                .c_column(j)
                .into_iter()
                .map(|(i, c)| (mu[i], c))
                .collect();
            terms.push((rv, -1.0));
            lp.add_row(format!("dual_eq_{s}_{j}"), terms, Cmp::Eq, 0.0);
        }
        mu
    }

    /// Whether `(r_s, μ)` satisfies the block for successor values `q`.
    pub fn is_satisfied(&self, r_state: f64, mu: &[f64], q: &[f64], tol: f64) -> bool {
        if mu.iter().any(|&m| m < -tol) {
            return false;
        }
        let mg: f64 = mu.iter().zip(self.polytope.g()).map(|(m, g)| m * g).sum();
        if r_state + mg > self.reward + tol {
            return false;
        }
        (0..self.polytope.dim()).all(|j| {
            let ct: f64 = self
                .polytope
                .c_column(j)
                .into_iter()
                .map(|(i, c)| c * mu[i])
                .sum();
            (ct - q[j]).abs() <= tol
        })
    }
}

/// Dual blocks of every non-goal uncertainty-state of a simple form. Goal
/// states need none: their value is fixed to zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DualSystem {
    pub blocks: Vec<DualBlock>,
}

impl DualSystem {
    pub fn num_dual_vars(&self) -> usize {
        self.blocks.iter().map(DualBlock::num_duals).sum()
    }

    pub fn num_equalities(&self) -> usize {
        self.blocks.iter().map(|b| b.polytope.dim()).sum()
    }

    pub fn num_bound_rows(&self) -> usize {
        self.blocks.len()
    }
}

pub fn dual_constraints(sf: &SimpleForm) -> Result<DualSystem> {
    let m = &sf.simple;
    let blocks = sf
        .uncertainty_states()
        .filter(|&s| !m.is_goal(s))
        .map(|s| {
            let c = &m.choices(s)[0];
            Ok(DualBlock {
                state: s,
                reward: c.reward,
                polytope: build_polytope(&c.successors)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DualSystem { blocks })
}

/// LP `max t  s.t.  t + μᵀg ≤ R(s),  Cᵀμ = v,  μ ≥ 0` for fixed successor
/// values `v`. Its optimum is `R(s)` plus nature's minimum of `Σ u_j v_j`.
pub fn dual_bound_lp(block: &DualBlock, values: &[f64]) -> (LinearProgram, VarId) {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let t = lp.add_var("t", f64::NEG_INFINITY, f64::INFINITY);
    lp.set_objective(t, 1.0);
    let q: Vec<VarId> = values
        .iter()
        .enumerate()
        .map(|(j, &v)| lp.add_var(format!("q_{j}"), v, v))
        .collect();
    block.emit(&mut lp, t, &q);
    (lp, t)
}
