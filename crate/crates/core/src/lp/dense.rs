//! Dense bounded-variable simplex on a full tableau.
//!
//! Each row `i` gets a slack `w_i = a_i·x` bounded by the row sense, so the
//! system is `A x - w = 0` with bounds on every column. Rows whose slack
//! starts out of bounds receive an artificial column; phase one drives the
//! artificials to zero, phase two optimizes the real objective. Pricing is
//! Dantzig's rule, switching to Bland's rule after a run of degenerate pivots.

use super::{Cmp, LinearProgram, LpBackend, LpSolution, LpStatus, Sense};

#[derive(Clone, Copy, Debug, Default)]
pub struct DenseBackend;

const NAME: &str = "dense";
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const PRIMAL_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 200_000;

impl LpBackend for DenseBackend {
    fn name(&self) -> &'static str {
        NAME
    }

    fn solve(&self, lp: &LinearProgram) -> LpSolution {
        let mut t = Tableau::build(lp);
        let phase1: Vec<f64> = (0..t.cols)
            .map(|j| if j >= t.first_art { 1.0 } else { 0.0 })
            .collect();
        match t.optimize(&phase1) {
            Outcome::Optimal => {}
            Outcome::Unbounded => unreachable!("phase one is bounded below by zero"),
            Outcome::Stalled => {
                return LpSolution::failed(
                    LpStatus::NumericalFailure,
                    NAME,
                    t.pivots,
                    Some("pivot limit".into()),
                )
            }
        }
        let infeas: f64 = (t.first_art..t.cols).map(|j| t.value[j]).sum();
        if infeas > PRIMAL_TOL * (1.0 + t.rows as f64) {
            return LpSolution::failed(LpStatus::Infeasible, NAME, t.pivots, None);
        }
        for j in t.first_art..t.cols {
            t.upper[j] = 0.0;
            t.value[j] = 0.0;
        }
        let sign = match lp.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut phase2 = vec![0.0; t.cols];
        for (j, &c) in lp.objective().iter().enumerate() {
            phase2[j] = sign * c;
        }
        match t.optimize(&phase2) {
            Outcome::Optimal => {
                LpSolution::checked(lp, t.value[..lp.num_vars()].to_vec(), NAME, t.pivots)
            }
            Outcome::Unbounded => LpSolution::failed(LpStatus::Unbounded, NAME, t.pivots, None),
            Outcome::Stalled => LpSolution::failed(
                LpStatus::NumericalFailure,
                NAME,
                t.pivots,
                Some("pivot limit".into()),
            ),
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
    Stalled,
}

struct Tableau {
    rows: usize,
    cols: usize,
    first_art: usize,
    /// `B⁻¹ A'`, row-major `rows × cols`.
    t: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    pivots: usize,
}

fn resting_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut lower: Vec<f64> = lp.vars().iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = lp.vars().iter().map(|v| v.upper).collect();
        for r in lp.rows() {
            let (lo, hi) = match r.cmp {
                Cmp::Le => (f64::NEG_INFINITY, r.rhs),
                Cmp::Ge => (r.rhs, f64::INFINITY),
                Cmp::Eq => (r.rhs, r.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let mut value: Vec<f64> = (0..n).map(|j| resting_value(lower[j], upper[j])).collect();
        // row activities at the resting point decide slack vs artificial
        let mut arts: Vec<(usize, f64)> = Vec::new();
        let mut slack_val = vec![0.0; m];
        for (i, r) in lp.rows().iter().enumerate() {
            let a = r.activity(&value);
            let (lo, hi) = (lower[n + i], upper[n + i]);
            if a < lo - PRIMAL_TOL {
                slack_val[i] = lo;
                arts.push((i, 1.0));
            } else if a > hi + PRIMAL_TOL {
                slack_val[i] = hi;
                arts.push((i, -1.0));
            } else {
                slack_val[i] = a;
            }
        }
        value.extend_from_slice(&slack_val);
        let first_art = n + m;
        let cols = first_art + arts.len();
        let mut art_of_row = vec![None; m];
        for (k, &(i, s)) in arts.iter().enumerate() {
            art_of_row[i] = Some((first_art + k, s));
            lower.push(0.0);
            upper.push(f64::INFINITY);
        }
        let mut t = vec![0.0; m * cols];
        let mut basis = vec![0; m];
        let mut is_basic = vec![false; cols];
        for (i, r) in lp.rows().iter().enumerate() {
            // row i reads  a_i·x - w_i + s·art_i = 0 ; divide by the basic column's coefficient
            let (bcol, bcoef) = match art_of_row[i] {
                Some((j, s)) => (j, s),
                None => (n + i, -1.0),
            };
            let row = &mut t[i * cols..(i + 1) * cols];
            for &(v, c) in &r.terms {
                row[v.0] = c / bcoef;
            }
            row[n + i] = -1.0 / bcoef;
            if let Some((j, s)) = art_of_row[i] {
                row[j] = s / bcoef;
            }
            basis[i] = bcol;
            is_basic[bcol] = true;
        }
        for &(i, s) in &arts {
            let a = lp.rows()[i].activity(&value);
            // s·art = w - a·x
            value.push((slack_val[i] - a) / s);
        }
        Self {
            rows: m,
            cols,
            first_art,
            t,
            lower,
            upper,
            value,
            basis,
            is_basic,
            pivots: 0,
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Direction (+1 increase, -1 decrease) in which nonbasic `j` improves.
    fn improving_direction(&self, j: usize, dj: f64) -> Option<f64> {
        if self.is_basic[j] || self.upper[j] - self.lower[j] <= 0.0 {
            return None;
        }
        let v = self.value[j];
        if dj < -COST_TOL && v < self.upper[j] {
            Some(1.0)
        } else if dj > COST_TOL && v > self.lower[j] {
            Some(-1.0)
        } else {
            None
        }
    }

    fn optimize(&mut self, cost: &[f64]) -> Outcome {
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Outcome::Stalled;
            }
            let d = self.reduced_costs(cost);
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if let Some(dir) = self.improving_direction(j, d[j]) {
                    if bland {
                        enter = Some((j, dir));
                        break;
                    }
                    if enter.map_or(true, |(k, _)| d[j].abs() > d[k].abs()) {
                        enter = Some((j, dir));
                    }
                }
            }
            let Some((j, dir)) = enter else {
                return Outcome::Optimal;
            };
            // x_B moves by -dir·t·T_j
            let mut step = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let alpha = -dir * self.entry(i, j);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let (limit, bound) = if alpha > 0.0 {
                    ((self.upper[b] - self.value[b]) / alpha, self.upper[b])
                } else {
                    ((self.lower[b] - self.value[b]) / alpha, self.lower[b])
                };
                if !limit.is_finite() {
                    continue;
                }
                let limit = limit.max(0.0);
                let better = match leave {
                    None => limit < step,
                    Some((k, _)) => {
                        if limit < step - PIVOT_TOL {
                            true
                        } else if limit <= step + PIVOT_TOL {
                            if bland {
                                b < self.basis[k]
                            } else {
                                self.entry(i, j).abs() > self.entry(k, j).abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = step.min(limit);
                    leave = Some((i, bound));
                }
            }
            if !step.is_finite() {
                return Outcome::Unbounded;
            }
            degenerate = if step <= PIVOT_TOL { degenerate + 1 } else { 0 };
            self.pivots += 1;
            for i in 0..self.rows {
                let b = self.basis[i];
                self.value[b] -= dir * step * self.entry(i, j);
            }
            self.value[j] += dir * step;
            if let Some((r, bound)) = leave {
                let out = self.basis[r];
                self.value[out] = bound;
                self.pivot(r, j);
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.entry(r, j);
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + j];
            if f != 0.0 {
                for (v, &pr) in self.t[i * cols..(i + 1) * cols].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.t[i * cols + j] = 0.0;
            }
        }
        let out = self.basis[r];
        self.is_basic[out] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }
}
