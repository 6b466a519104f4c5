//! Exact robust evaluation of policies.
//!
//! Nature resolves every interval row adversarially. For a fixed value vector
//! the inner problem is a linear program over a box intersected with the
//! probability simplex, solved exactly by [`inner_opt`]'s greedy allocation.
//! [`robust_value_iteration`] iterates it to a fixpoint. The brute-force and
//! grid-search routines at the bottom are oracles for small instances.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    induce_imc, Interval, IntervalMC, Objective, Policy, SpecThreshold, UPomdp, ROW_SUM_TOL,
};

/// Which extremum nature takes over a row polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extremum {
    Min,
    Max,
}

impl Objective {
    /// Nature works against the controller.
    pub fn nature(&self) -> Extremum {
        match self {
            Objective::MaximizeReward => Extremum::Min,
            Objective::MinimizeCost => Extremum::Max,
        }
    }
}

/// Extremal distribution inside one interval row and the value it attains.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerSolution {
    /// Probability per successor, aligned with the input row.
    pub dist: Vec<(usize, f64)>,
    pub value: f64,
}

fn check_polytope(row: &[(usize, Interval)]) -> Result<(f64, f64)> {
    let lo: f64 = row.iter().map(|(_, i)| i.lower).sum();
    let hi: f64 = row.iter().map(|(_, i)| i.upper).sum();
    if lo > 1.0 + ROW_SUM_TOL || hi < 1.0 - ROW_SUM_TOL {
        return Err(Error::EmptyPolytope {
            lower_sum: lo,
            upper_sum: hi,
        });
    }
    Ok((lo, hi))
}

/// Optimizes `Σ u(t)·values[t]` over `{u : lower ≤ u ≤ upper, Σ u = 1}`.
///
/// Starts from the lower bounds and pours the remaining mass into successors
/// in order of increasing value (`Min`) or decreasing value (`Max`), each up
/// to its upper bound. Ties go to the smaller state id.
pub fn inner_opt(
    values: &[f64],
    row: &[(usize, Interval)],
    ext: Extremum,
) -> Result<InnerSolution> {
    let (lo_sum, _) = check_polytope(row)?;
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (values[row[a].0], values[row[b].0]);
        let c = match ext {
            Extremum::Min => va.total_cmp(&vb),
            Extremum::Max => vb.total_cmp(&va),
        };
        c.then(row[a].0.cmp(&row[b].0))
    });
    let mut dist: Vec<(usize, f64)> = row.iter().map(|&(t, i)| (t, i.lower)).collect();
    let mut rest = (1.0 - lo_sum).max(0.0);
    for k in order {
        if rest <= 0.0 {
            break;
        }
        let add = row[k].1.width().min(rest);
        dist[k].1 += add;
        rest -= add;
    }
    let value = dist.iter().map(|&(t, p)| p * values[t]).sum();
    Ok(InnerSolution { dist, value })
}

/// Stopping rule for value iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViOptions {
    /// Sup-norm change between sweeps below which iteration stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ViOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 1_000_000,
        }
    }
}

/// Robust values of an interval Markov chain.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustResult {
    pub values: Vec<f64>,
    /// Value at the initial state.
    pub beta: f64,
    /// Nature's extremal distribution per state at the final values.
    pub witness: Vec<Vec<(usize, f64)>>,
    pub iterations: usize,
    pub residual: f64,
}

/// Fails with the first state (ascending id) that cannot reach the goal set
/// through edges whose lower bound is positive.
pub fn check_reaches_goal(imc: &IntervalMC) -> Result<()> {
    let n = imc.num_states();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for &(t, iv) in imc.row(s) {
            if iv.lower > 0.0 {
                preds[t].push(s);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&s| imc.is_goal(s)).collect();
    for &g in &stack {
        seen[g] = true;
    }
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    match seen.iter().position(|&r| !r) {
        Some(s) => Err(Error::DeadEnd(s)),
        None => Ok(()),
    }
}

/// Jacobi-style robust Bellman sweeps, exposed step by step.
pub struct ValueIteration<'a> {
    imc: &'a IntervalMC,
    ext: Extremum,
    values: Vec<f64>,
    next: Vec<f64>,
    sweeps: usize,
}

const PARALLEL_THRESHOLD: usize = 4096;

impl<'a> ValueIteration<'a> {
    /// Starts from `v ≡ 0` after checking polytopes and goal reachability.
    pub fn new(imc: &'a IntervalMC, ext: Extremum) -> Result<Self> {
        for s in 0..imc.num_states() {
            check_polytope(imc.row(s))?;
        }
        check_reaches_goal(imc)?;
        let n = imc.num_states();
        Ok(Self {
            imc,
            ext,
            values: vec![0.0; n],
            next: vec![0.0; n],
            sweeps: 0,
        })
    }

    fn backup(imc: &IntervalMC, ext: Extremum, values: &[f64], s: usize) -> f64 {
        if imc.is_goal(s) {
            return 0.0;
        }
        let inner = inner_opt(values, imc.row(s), ext).expect("polytopes checked at construction");
        imc.reward(s) + inner.value
    }

    /// Performs one sweep and returns the sup-norm change.
    pub fn sweep(&mut self) -> f64 {
        let (imc, ext, values) = (self.imc, self.ext, &self.values);
        if self.next.len() >= PARALLEL_THRESHOLD {
            self.next
                .par_iter_mut()
                .enumerate()
                .for_each(|(s, v)| *v = Self::backup(imc, ext, values, s));
        } else {
            for (s, v) in self.next.iter_mut().enumerate() {
                *v = Self::backup(imc, ext, values, s);
            }
        }
        let residual = self
            .values
            .iter()
            .zip(&self.next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut self.values, &mut self.next);
        self.sweeps += 1;
        residual
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    fn finish(self, residual: f64) -> RobustResult {
        let witness = (0..self.imc.num_states())
            .map(|s| {
                inner_opt(&self.values, self.imc.row(s), self.ext)
                    .expect("polytopes checked at construction")
                    .dist
            })
            .collect();
        RobustResult {
            beta: self.values[self.imc.initial()],
            values: self.values,
            witness,
            iterations: self.sweeps,
            residual,
        }
    }
}

/// Robust value iteration from `v ≡ 0` until the sup-norm residual drops
/// below `opts.tol`.
pub fn robust_value_iteration(
    imc: &IntervalMC,
    spec: &SpecThreshold,
    opts: ViOptions,
) -> Result<RobustResult> {
    robust_value_iteration_observed(imc, spec, opts, |_, _| {})
}

/// As [`robust_value_iteration`], calling `observe(sweep, values)` after
/// every sweep.
pub fn robust_value_iteration_observed<F>(
    imc: &IntervalMC,
    spec: &SpecThreshold,
    opts: ViOptions,
    mut observe: F,
) -> Result<RobustResult>
where
    F: FnMut(usize, &[f64]),
{
    let mut vi = ValueIteration::new(imc, spec.direction.nature())?;
    let mut residual = f64::INFINITY;
    while vi.sweeps() < opts.max_iters {
        residual = vi.sweep();
        observe(vi.sweeps(), vi.values());
        if residual < opts.tol {
            return Ok(vi.finish(residual));
        }
    }
    Err(Error::NotConverged {
        iterations: vi.sweeps(),
        residual,
    })
}

/// Expected total reward to the goal of a point-valued chain, by a direct
/// linear solve of `(I - P) v = R` over the non-goal states.
pub fn markov_chain_values(imc: &IntervalMC) -> Result<Vec<f64>> {
    for s in 0..imc.num_states() {
        if let Some(&(t, _)) = imc.row(s).iter().find(|(_, i)| !i.is_point()) {
            return Err(Error::Unsupported(format!(
                "chain solve needs point intervals, state {s} → {t} is not"
            )));
        }
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..imc.num_states())
        .map(|s| imc.row(s).iter().map(|&(t, i)| (t, i.lower)).collect())
        .collect();
    check_reaches_goal(imc)?;
    solve_chain(&rows, imc)
}

fn solve_chain(rows: &[Vec<(usize, f64)>], imc: &IntervalMC) -> Result<Vec<f64>> {
    let n = imc.num_states();
    let mut index = vec![usize::MAX; n];
    let transient: Vec<usize> = (0..n).filter(|&s| !imc.is_goal(s)).collect();
    for (k, &s) in transient.iter().enumerate() {
        index[s] = k;
    }
    let m = transient.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (k, &s) in transient.iter().enumerate() {
        b[k] = imc.reward(s);
        for &(t, p) in &rows[s] {
            if index[t] != usize::MAX {
                a[(k, index[t])] -= p;
            }
        }
    }
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Unsupported("singular chain system".into()))?;
    let mut v = vec![0.0; n];
    for (k, &s) in transient.iter().enumerate() {
        v[s] = x[k];
    }
    Ok(v)
}

/// Vertices of `{u : lower ≤ u ≤ upper, Σ u = 1}`: all coordinates at a
/// bound except at most one.
pub fn row_vertices(row: &[(usize, Interval)]) -> Vec<Vec<f64>> {
    let n = row.len();
    let free_candidates: Vec<usize> = (0..n).filter(|&k| !row[k].1.is_point()).collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut push = |u: Vec<f64>| {
        if !out
            .iter()
            .any(|w| w.iter().zip(&u).all(|(a, b)| (a - b).abs() <= 1e-12))
        {
            out.push(u);
        }
    };
    // `None` as the free coordinate covers vertices where every entry sits at a bound.
    let frees: Vec<Option<usize>> = std::iter::once(None)
        .chain(free_candidates.iter().map(|&k| Some(k)))
        .collect();
    for free in frees {
        let others: Vec<usize> = free_candidates
            .iter()
            .copied()
            .filter(|&k| Some(k) != free)
            .collect();
        for mask in 0u64..(1u64 << others.len()) {
            let mut u: Vec<f64> = row.iter().map(|(_, i)| i.lower).collect();
            for (bit, &k) in others.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    u[k] = row[k].1.upper;
                }
            }
            match free {
                Some(f) => {
                    let rest: f64 = (0..n).filter(|&k| k != f).map(|k| u[k]).sum();
                    let uf = 1.0 - rest;
                    if row[f].1.contains(uf, 1e-12) {
                        u[f] = uf.clamp(row[f].1.lower, row[f].1.upper);
                        push(u);
                    }
                }
                None => {
                    if (u.iter().sum::<f64>() - 1.0).abs() <= 1e-12 {
                        push(u);
                    }
                }
            }
        }
    }
    out
}

/// Largest number of uncertain transitions [`brute_force_robust_value`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Robust value at the initial state by enumerating every combination of
/// row-polytope vertices of the induced chain and solving each exactly.
pub fn brute_force_robust_value(
    model: &UPomdp,
    policy: &Policy,
    spec: &SpecThreshold,
) -> Result<f64> {
    let imc = induce_imc(model, policy)?;
    let count = imc.num_uncertain_transitions();
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "vertex enumeration",
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    for s in 0..imc.num_states() {
        check_polytope(imc.row(s))?;
    }
    check_reaches_goal(&imc)?;
    let n = imc.num_states();
    let vertex_sets: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|s| {
            if imc.is_goal(s) {
                vec![imc.row(s).iter().map(|(_, i)| i.lower).collect()]
            } else {
                row_vertices(imc.row(s))
            }
        })
        .collect();
    let mut pick = vec![0usize; n];
    let mut best: Option<f64> = None;
    loop {
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|s| {
                imc.row(s)
                    .iter()
                    .zip(&vertex_sets[s][pick[s]])
                    .map(|(&(t, _), &p)| (t, p))
                    .collect()
            })
            .collect();
        let v = solve_chain(&rows, &imc)?[imc.initial()];
        best = Some(match (best, spec.direction.nature()) {
            (None, _) => v,
            (Some(b), Extremum::Min) => b.min(v),
            (Some(b), Extremum::Max) => b.max(v),
        });
        // odometer over vertex choices
        let mut k = 0;
        loop {
            if k == n {
                return Ok(best.expect("at least one combination"));
            }
            pick[k] += 1;
            if pick[k] < vertex_sets[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Floor applied to grid probabilities so policies keep full support.
pub const GRID_FLOOR: f64 = 1e-6;

/// Exhaustive search over the simplex grid of observation-based policies
/// with step `1/resolution`, each point evaluated by robust value iteration.
///
/// Limited to at most three observations with a choice, three actions per
/// observation, and `resolution ≤ 20`.
pub fn grid_search_policy(
    model: &UPomdp,
    spec: &SpecThreshold,
    resolution: usize,
) -> Result<(Policy, f64)> {
    if resolution == 0 || resolution > 20 {
        return Err(Error::TooLarge {
            what: "grid resolution",
            count: resolution,
            limit: 20,
        });
    }
    let mut obs_actions: Vec<(usize, Vec<usize>)> = Vec::new();
    for z in 0..model.num_observations() {
        if let Some(acts) = model.observation_actions(z) {
            obs_actions.push((z, acts));
        }
    }
    let deciding: Vec<&(usize, Vec<usize>)> =
        obs_actions.iter().filter(|(_, a)| a.len() > 1).collect();
    if deciding.len() > 3 {
        return Err(Error::TooLarge {
            what: "grid search observations",
            count: deciding.len(),
            limit: 3,
        });
    }
    if let Some(m) = deciding
        .iter()
        .map(|(_, a)| a.len())
        .max()
        .filter(|&m| m > 3)
    {
        return Err(Error::TooLarge {
            what: "grid search actions",
            count: m,
            limit: 3,
        });
    }
    let per_obs: Vec<Vec<Vec<(usize, f64)>>> = deciding
        .iter()
        .map(|(_, acts)| {
            compositions(resolution, acts.len())
                .into_iter()
                .map(|c| {
                    let raw: Vec<f64> = c
                        .iter()
                        .map(|&k| (k as f64 / resolution as f64).max(GRID_FLOOR))
                        .collect();
                    let sum: f64 = raw.iter().sum();
                    acts.iter().zip(raw).map(|(&a, p)| (a, p / sum)).collect()
                })
                .collect()
        })
        .collect();
    let total: usize = per_obs.iter().map(Vec::len).product();
    let build = |mut idx: usize| -> Policy {
        let mut dists = std::collections::BTreeMap::new();
        for (z, acts) in &obs_actions {
            if acts.len() == 1 {
                dists.insert(*z, vec![(acts[0], 1.0)]);
            }
        }
        for (k, (z, _)) in deciding.iter().enumerate() {
            let choices = &per_obs[k];
            dists.insert(*z, choices[idx % choices.len()].clone());
            idx /= choices.len();
        }
        Policy::new(dists).expect("grid points are normalized")
    };
    let opts = ViOptions::default();
    let values: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let imc = induce_imc(model, &build(i))?;
            Ok(robust_value_iteration(&imc, spec, opts)?.beta)
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        let better = match (best, spec.direction) {
            (None, _) => true,
            (Some((_, b)), Objective::MaximizeReward) => v > b,
            (Some((_, b)), Objective::MinimizeCost) => v < b,
        };
        if better {
            best = Some((i, v));
        }
    }
    let (i, v) = best.expect("grid is nonempty");
    Ok((build(i), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Choice;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    /// Independent oracle: best objective over all polytope vertices.
    fn vertex_opt(values: &[f64], row: &[(usize, Interval)], ext: Extremum) -> f64 {
        let vals = row_vertices(row).into_iter().map(|u| {
            u.iter()
                .zip(row)
                .map(|(p, (t, _))| p * values[*t])
                .sum::<f64>()
        });
        match ext {
            Extremum::Min => vals.fold(f64::INFINITY, f64::min),
            Extremum::Max => vals.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    #[test]
    fn inner_opt_two_successors() {
        let row = [(0, iv(0.2, 0.8)), (1, iv(0.2, 0.8))];
        let sol = inner_opt(&[0.0, 10.0], &row, Extremum::Min).unwrap();
        assert_eq!(sol.dist, vec![(0, 0.8), (1, 0.2)]);
        assert!((sol.value - 2.0).abs() < 1e-12);
        assert!((vertex_opt(&[0.0, 10.0], &row, Extremum::Min) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inner_opt_three_successors() {
        let row = [(0, iv(0.1, 0.5)), (1, iv(0.2, 0.6)), (2, iv(0.3, 0.7))];
        let sol = inner_opt(&[1.0, 2.0, 3.0], &row, Extremum::Min).unwrap();
        let expect = [0.5, 0.2, 0.3];
        for ((_, p), e) in sol.dist.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((sol.value - 1.8).abs() < 1e-12);
        assert!((vertex_opt(&[1.0, 2.0, 3.0], &row, Extremum::Min) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn inner_opt_point_row_is_dot_product() {
        let row = [(0, Interval::point(0.25)), (1, Interval::point(0.75))];
        let sol = inner_opt(&[4.0, 8.0], &row, Extremum::Max).unwrap();
        assert_eq!(sol.dist, vec![(0, 0.25), (1, 0.75)]);
        assert_eq!(sol.value, 7.0);
    }

    #[test]
    fn inner_opt_rejects_empty_polytope() {
        let row = [(0, iv(0.6, 0.7)), (1, iv(0.6, 0.7))];
        assert!(matches!(
            inner_opt(&[0.0, 0.0], &row, Extremum::Min),
            Err(Error::EmptyPolytope { .. })
        ));
    }

    #[test]
    fn inner_opt_ties_prefer_lower_ids() {
        let row = [(3, iv(0.0, 1.0)), (1, iv(0.0, 1.0))];
        // both successors have value 0: mass goes to state 1 first
        let sol = inner_opt(&[0.0; 4], &row, Extremum::Min).unwrap();
        assert_eq!(sol.dist, vec![(3, 0.0), (1, 1.0)]);
    }

    fn chain(rows: Vec<Vec<(usize, Interval)>>, reward: Vec<f64>, goal: Vec<bool>) -> IntervalMC {
        IntervalMC::new(rows, reward, goal, 0).unwrap()
    }

    #[test]
    fn vi_single_step() {
        let imc = chain(
            vec![vec![(1, Interval::ONE)], vec![(1, Interval::ONE)]],
            vec![5.0, 0.0],
            vec![false, true],
        );
        let r = robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
            .unwrap();
        assert_eq!(r.beta, 5.0);
        assert_eq!(r.values[1], 0.0);
    }

    #[test]
    fn vi_self_loop_closed_form() {
        let imc = chain(
            vec![
                vec![(0, iv(0.2, 0.8)), (1, iv(0.2, 0.8))],
                vec![(1, Interval::ONE)],
            ],
            vec![1.0, 0.0],
            vec![false, true],
        );
        // cost direction: nature slows the exit, v = 1 + 0.8 v
        let r = robust_value_iteration(&imc, &SpecThreshold::at_most(0.0), ViOptions::default())
            .unwrap();
        assert!((r.beta - 5.0).abs() < 1e-7);
        assert!((r.witness[0][1].1 - 0.2).abs() < 1e-12);
        // reward direction: nature hurries the exit, v = 1 + 0.2 v
        let r = robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
            .unwrap();
        assert!((r.beta - 1.25).abs() < 1e-9);
        assert!((r.witness[0][1].1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn vi_matches_linear_solve_on_point_chain() {
        let imc = chain(
            vec![
                vec![
                    (0, Interval::point(0.3)),
                    (1, Interval::point(0.5)),
                    (2, Interval::point(0.2)),
                ],
                vec![(0, Interval::point(0.4)), (2, Interval::point(0.6))],
                vec![(2, Interval::ONE)],
            ],
            vec![1.0, 2.0, 0.0],
            vec![false, false, true],
        );
        let exact = markov_chain_values(&imc).unwrap();
        let r = robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
            .unwrap();
        for (a, b) in exact.iter().zip(&r.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn vi_detects_dead_end() {
        let imc = chain(
            vec![
                vec![(1, Interval::ONE)],
                vec![(1, Interval::ONE)],
                vec![(2, Interval::ONE)],
            ],
            vec![1.0, 0.0, 0.0],
            vec![false, false, true],
        );
        let err = robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::DeadEnd(0)));
    }

    #[test]
    fn vi_reports_non_convergence() {
        let imc = chain(
            vec![
                vec![(0, iv(0.5, 0.99)), (1, iv(0.01, 0.5))],
                vec![(1, Interval::ONE)],
            ],
            vec![1.0, 0.0],
            vec![false, true],
        );
        let opts = ViOptions {
            tol: 1e-12,
            max_iters: 10,
        };
        assert!(matches!(
            robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), opts),
            Err(Error::NotConverged { iterations: 10, .. })
        ));
    }

    fn three_state_model() -> UPomdp {
        UPomdp::from_parts(
            1,
            2,
            0,
            &[2],
            vec![0, 0, 1],
            vec![
                vec![Choice::new(
                    0,
                    1.0,
                    vec![(1, iv(0.2, 0.8)), (2, iv(0.2, 0.8))],
                )],
                vec![Choice::new(0, 10.0, vec![(2, Interval::ONE)])],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn brute_force_agrees_with_vi() {
        let m = three_state_model();
        let p = Policy::uniform(&m);
        let spec = SpecThreshold::at_least(0.0);
        let bf = brute_force_robust_value(&m, &p, &spec).unwrap();
        let imc = induce_imc(&m, &p).unwrap();
        let vi = robust_value_iteration(&imc, &spec, ViOptions::default()).unwrap();
        assert!((bf - 3.0).abs() < 1e-12);
        assert!((bf - vi.beta).abs() < 1e-6);
        let hi = brute_force_robust_value(&m, &p, &SpecThreshold::at_most(0.0)).unwrap();
        assert!(hi >= bf);
        assert!((hi - 9.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_point_model_is_linear_solve() {
        let m = crate::model::nominal(&three_state_model()).unwrap();
        let p = Policy::uniform(&m);
        let bf = brute_force_robust_value(&m, &p, &SpecThreshold::at_least(0.0)).unwrap();
        let exact = markov_chain_values(&induce_imc(&m, &p).unwrap()).unwrap();
        assert!((bf - exact[0]).abs() < 1e-12);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let n = 14;
        let w = 1.0 / 13.0;
        let mut choices = vec![vec![Choice::new(
            0,
            1.0,
            (1..n).map(|t| (t, iv(w * 0.5, w * 1.5))).collect(),
        )]];
        for t in 1..n {
            choices.push(vec![Choice::new(0, 0.0, vec![(t, Interval::ONE)])]);
        }
        let m =
            UPomdp::from_parts(1, 1, 0, &(1..n).collect::<Vec<_>>(), vec![0; n], choices).unwrap();
        let err = brute_force_robust_value(&m, &Policy::uniform(&m), &SpecThreshold::at_least(0.0))
            .unwrap_err();
        assert!(matches!(err, Error::TooLarge { count: 13, .. }));
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(20, 3).len(), 231);
        assert_eq!(compositions(4, 2).len(), 5);
    }

    #[test]
    fn grid_search_finds_dominant_action() {
        // action 1 earns more under every instantiation
        let m = UPomdp::from_parts(
            2,
            2,
            0,
            &[1],
            vec![0, 1],
            vec![
                vec![
                    Choice::new(0, 1.0, vec![(1, Interval::ONE)]),
                    Choice::new(1, 3.0, vec![(1, Interval::ONE)]),
                ],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
            ],
        )
        .unwrap();
        let (p, v) = grid_search_policy(&m, &SpecThreshold::at_least(0.0), 10).unwrap();
        assert!(p.prob(0, 1) > 1.0 - 1e-5);
        assert!((v - 3.0).abs() < 1e-5);
    }

    #[test]
    fn grid_search_symmetric_actions_all_equal() {
        let row = vec![(1, iv(0.3, 0.7)), (2, iv(0.3, 0.7))];
        let m = UPomdp::from_parts(
            2,
            2,
            0,
            &[1, 2],
            vec![0, 1, 1],
            vec![
                vec![Choice::new(0, 1.0, row.clone()), Choice::new(1, 1.0, row)],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap();
        let spec = SpecThreshold::at_least(0.0);
        for k in 0..=4 {
            let p = (k as f64 / 4.0).clamp(GRID_FLOOR, 1.0 - GRID_FLOOR);
            let mut d = std::collections::BTreeMap::new();
            d.insert(0, vec![(0, p), (1, 1.0 - p)]);
            d.insert(1, vec![(0, 1.0)]);
            let pol = Policy::normalized(d).unwrap();
            let imc = induce_imc(&m, &pol).unwrap();
            let v = robust_value_iteration(&imc, &spec, ViOptions::default())
                .unwrap()
                .beta;
            assert!((v - 1.0).abs() < 1e-12);
        }
        let (_, v) = grid_search_policy(&m, &spec, 4).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
