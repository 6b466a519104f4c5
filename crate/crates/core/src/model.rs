//! Uncertain POMDPs with interval transition probabilities, observation-based
//! policies and the interval Markov chains they induce.
//!
//! A [`UPomdp`] is immutable once built. Structural problems (indices out of
//! range, duplicate transitions) are rejected by [`UPomdp::from_parts`];
//! semantic problems are reported as data by [`validate`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance used when checking that probability rows sum to one.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Tolerance for policy distributions summing to one.
pub const POLICY_SUM_TOL: f64 = 1e-12;

/// A closed probability interval `[lower, upper]`.
///
/// The type itself accepts any pair of floats so that malformed input can be
/// reported by [`validate`] instead of failing at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval {
        lower: 0.0,
        upper: 0.0,
    };
    pub const ONE: Interval = Interval {
        lower: 1.0,
        upper: 1.0,
    };

    pub const fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub const fn point(p: f64) -> Self {
        Self { lower: p, upper: p }
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// `0 <= lower <= upper <= 1`, all finite.
    pub fn is_well_formed(&self) -> bool {
        self.lower.is_finite()
            && self.upper.is_finite()
            && 0.0 <= self.lower
            && self.lower <= self.upper
            && self.upper <= 1.0
    }

    /// Either the transition is present in every instantiation (`lower > 0`)
    /// or in none (`[0, 0]`).
    pub fn preserves_graph(&self) -> bool {
        self.lower > 0.0 || (self.lower == 0.0 && self.upper == 0.0)
    }

    pub fn contains(&self, p: f64, tol: f64) -> bool {
        p >= self.lower - tol && p <= self.upper + tol
    }

    /// Endpoint-wise scaling by a nonnegative weight.
    pub fn scale(&self, w: f64) -> Interval {
        Interval::new(w * self.lower, w * self.upper)
    }

    /// Endpoint-wise product, used when two independent uncertain events
    /// must both happen.
    pub fn mul(&self, other: &Interval) -> Interval {
        Interval::new(self.lower * other.lower, self.upper * other.upper)
    }

    /// Interval of the complementary event.
    pub fn complement(&self) -> Interval {
        Interval::new(1.0 - self.upper, 1.0 - self.lower)
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lower + rhs.lower, self.upper + rhs.upper)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// One available action of a state: its reward and interval successor row.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub action: usize,
    pub reward: f64,
    /// Successors in ascending state order, each listed once.
    pub successors: Vec<(usize, Interval)>,
}

impl Choice {
    pub fn new(action: usize, reward: f64, mut successors: Vec<(usize, Interval)>) -> Self {
        successors.sort_by_key(|&(t, _)| t);
        Self {
            action,
            reward,
            successors,
        }
    }

    pub fn lower_sum(&self) -> f64 {
        self.successors.iter().map(|(_, i)| i.lower).sum()
    }

    pub fn upper_sum(&self) -> f64 {
        self.successors.iter().map(|(_, i)| i.upper).sum()
    }

    /// True when every successor interval is a point.
    pub fn is_point_row(&self) -> bool {
        self.successors.iter().all(|(_, i)| i.is_point())
    }
}

/// An uncertain POMDP with deterministic observations.
///
/// Actions live in a global namespace `0..num_actions`; each state lists the
/// subset it offers, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct UPomdp {
    num_actions: usize,
    num_observations: usize,
    initial: usize,
    goal: Vec<bool>,
    observation: Vec<usize>,
    choices: Vec<Vec<Choice>>,
}

impl UPomdp {
    /// Assembles a model, rejecting structural defects: indices out of range,
    /// duplicate successors within a row, or duplicate actions within a state.
    pub fn from_parts(
        num_actions: usize,
        num_observations: usize,
        initial: usize,
        goal_states: &[usize],
        observation: Vec<usize>,
        choices: Vec<Vec<Choice>>,
    ) -> Result<Self> {
        let n = observation.len();
        let mut violations = Vec::new();
        if n == 0 {
            violations.push(Violation::new(
                ViolationKind::IndexOutOfRange,
                None,
                None,
                None,
            ));
        }
        if choices.len() != n {
            violations.push(Violation::new(
                ViolationKind::IndexOutOfRange,
                None,
                None,
                None,
            ));
        }
        if initial >= n {
            violations.push(Violation::new(
                ViolationKind::IndexOutOfRange,
                Some(initial),
                None,
                None,
            ));
        }
        let mut goal = vec![false; n];
        for &g in goal_states {
            if g < n {
                goal[g] = true;
            } else {
                violations.push(Violation::new(
                    ViolationKind::IndexOutOfRange,
                    Some(g),
                    None,
                    None,
                ));
            }
        }
        for (s, &z) in observation.iter().enumerate() {
            if z >= num_observations {
                violations.push(Violation::new(
                    ViolationKind::IndexOutOfRange,
                    Some(s),
                    None,
                    None,
                ));
            }
        }
        let mut choices = choices;
        for (s, row) in choices.iter_mut().enumerate() {
            let mut seen = Vec::with_capacity(row.len());
            for c in row.iter_mut() {
                if c.action >= num_actions {
                    violations.push(Violation::new(
                        ViolationKind::IndexOutOfRange,
                        Some(s),
                        Some(c.action),
                        None,
                    ));
                }
                if seen.contains(&c.action) {
                    violations.push(Violation::new(
                        ViolationKind::DuplicateAction,
                        Some(s),
                        Some(c.action),
                        None,
                    ));
                }
                seen.push(c.action);
                c.successors.sort_by_key(|&(t, _)| t);
                for w in c.successors.windows(2) {
                    if w[0].0 == w[1].0 {
                        violations.push(Violation::new(
                            ViolationKind::DuplicateTransition,
                            Some(s),
                            Some(c.action),
                            Some(w[0].0),
                        ));
                    }
                }
                for &(t, _) in &c.successors {
                    if t >= n {
                        violations.push(Violation::new(
                            ViolationKind::IndexOutOfRange,
                            Some(s),
                            Some(c.action),
                            Some(t),
                        ));
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        Ok(Self {
            num_actions,
            num_observations,
            initial,
            goal,
            observation,
            choices,
        })
    }

    pub fn num_states(&self) -> usize {
        self.observation.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_goal(&self, s: usize) -> bool {
        self.goal[s]
    }

    pub fn goal_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.goal
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .map(|(s, _)| s)
    }

    pub fn observation(&self, s: usize) -> usize {
        self.observation[s]
    }

    pub fn observations(&self) -> &[usize] {
        &self.observation
    }

    pub fn choices(&self, s: usize) -> &[Choice] {
        &self.choices[s]
    }

    pub fn choice(&self, s: usize, action: usize) -> Option<&Choice> {
        self.choices[s].iter().find(|c| c.action == action)
    }

    pub fn actions(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.choices[s].iter().map(|c| c.action)
    }

    /// Ordered action list offered under observation `z`, taken from the
    /// first state carrying it. `None` if no state has that observation.
    pub fn observation_actions(&self, z: usize) -> Option<Vec<usize>> {
        let s = self.observation.iter().position(|&o| o == z)?;
        Some(self.actions(s).collect())
    }

    /// Number of transitions (state, action, successor) with a nonzero upper bound.
    pub fn num_transitions(&self) -> usize {
        self.choices
            .iter()
            .flatten()
            .map(|c| c.successors.iter().filter(|(_, i)| i.upper > 0.0).count())
            .sum()
    }

    /// True if every interval in the model is a point.
    pub fn is_point_model(&self) -> bool {
        self.choices.iter().flatten().all(Choice::is_point_row)
    }
}

/// What a validation finding is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    IndexOutOfRange,
    DuplicateAction,
    DuplicateTransition,
    MalformedInterval,
    GraphPreservation,
    EmptyPolytope,
    NoActions,
    NegativeReward,
    ObservationActionMismatch,
    GoalNotAbsorbing,
}

impl ViolationKind {
    pub fn label(&self) -> &'static str {
        match self {
            ViolationKind::IndexOutOfRange => "index out of range",
            ViolationKind::DuplicateAction => "duplicate action",
            ViolationKind::DuplicateTransition => "duplicate transition",
            ViolationKind::MalformedInterval => "malformed interval",
            ViolationKind::GraphPreservation => "graph preservation",
            ViolationKind::EmptyPolytope => "empty polytope",
            ViolationKind::NoActions => "no actions",
            ViolationKind::NegativeReward => "negative reward",
            ViolationKind::ObservationActionMismatch => "observation action mismatch",
            ViolationKind::GoalNotAbsorbing => "goal not absorbing",
        }
    }
}

/// A single invariant violation with the coordinates it was found at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub state: Option<usize>,
    pub action: Option<usize>,
    pub successor: Option<usize>,
}

impl Violation {
    pub fn new(
        kind: ViolationKind,
        state: Option<usize>,
        action: Option<usize>,
        successor: Option<usize>,
    ) -> Self {
        Self {
            kind,
            state,
            action,
            successor,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.label())?;
        if let Some(s) = self.state {
            write!(f, " at state {s}")?;
        }
        if let Some(a) = self.action {
            write!(f, ", action {a}")?;
        }
        if let Some(t) = self.successor {
            write!(f, ", successor {t}")?;
        }
        Ok(())
    }
}

fn check_row(
    s: usize,
    action: Option<usize>,
    successors: &[(usize, Interval)],
    out: &mut Vec<Violation>,
) {
    for &(t, iv) in successors {
        if !iv.is_well_formed() {
            out.push(Violation::new(
                ViolationKind::MalformedInterval,
                Some(s),
                action,
                Some(t),
            ));
        } else if !iv.preserves_graph() {
            out.push(Violation::new(
                ViolationKind::GraphPreservation,
                Some(s),
                action,
                Some(t),
            ));
        }
    }
    let lo: f64 = successors.iter().map(|(_, i)| i.lower).sum();
    let hi: f64 = successors.iter().map(|(_, i)| i.upper).sum();
    if lo > 1.0 + ROW_SUM_TOL || hi < 1.0 - ROW_SUM_TOL {
        out.push(Violation::new(
            ViolationKind::EmptyPolytope,
            Some(s),
            action,
            None,
        ));
    }
}

/// Lists every invariant violation of `model`; an empty list means valid.
pub fn validate(model: &UPomdp) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut obs_actions: BTreeMap<usize, (usize, Vec<usize>)> = BTreeMap::new();
    for s in 0..model.num_states() {
        let row = model.choices(s);
        if row.is_empty() {
            out.push(Violation::new(
                ViolationKind::NoActions,
                Some(s),
                None,
                None,
            ));
        }
        for c in row {
            if !(c.reward.is_finite() && c.reward >= 0.0) {
                out.push(Violation::new(
                    ViolationKind::NegativeReward,
                    Some(s),
                    Some(c.action),
                    None,
                ));
            }
            check_row(s, Some(c.action), &c.successors, &mut out);
        }
        let acts: Vec<usize> = model.actions(s).collect();
        match obs_actions.get(&model.observation(s)) {
            Some((_, first)) if *first != acts => {
                out.push(Violation::new(
                    ViolationKind::ObservationActionMismatch,
                    Some(s),
                    None,
                    None,
                ));
            }
            Some(_) => {}
            None => {
                obs_actions.insert(model.observation(s), (s, acts));
            }
        }
        if model.is_goal(s) {
            let absorbing = row.len() == 1
                && row[0].reward == 0.0
                && row[0].successors.len() == 1
                && row[0].successors[0].0 == s
                && row[0].successors[0].1 == Interval::ONE;
            if !absorbing {
                out.push(Violation::new(
                    ViolationKind::GoalNotAbsorbing,
                    Some(s),
                    None,
                    None,
                ));
            }
        }
    }
    out
}

/// Returns `Err(InvalidModel)` unless `validate` finds nothing.
pub fn ensure_valid(model: &UPomdp) -> Result<()> {
    let v = validate(model);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidModel(v))
    }
}

/// Picks one probability from every interval, producing a point-valued model
/// with the same topology.
///
/// `pick(s, action, successor, interval)` must lie in the interval and every
/// row of picks must sum to one within [`ROW_SUM_TOL`].
pub fn instantiate<F>(model: &UPomdp, mut pick: F) -> Result<UPomdp>
where
    F: FnMut(usize, usize, usize, Interval) -> f64,
{
    let mut choices = Vec::with_capacity(model.num_states());
    for s in 0..model.num_states() {
        let mut row = Vec::with_capacity(model.choices(s).len());
        for c in model.choices(s) {
            let mut succ = Vec::with_capacity(c.successors.len());
            let mut sum = 0.0;
            for &(t, iv) in &c.successors {
                let p = pick(s, c.action, t, iv);
                if !p.is_finite() || !iv.contains(p, 1e-12) {
                    return Err(Error::Instantiate {
                        state: s,
                        action: c.action,
                        reason: format!("{p} not in {iv} for successor {t}"),
                    });
                }
                sum += p;
                succ.push((t, Interval::point(p)));
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Instantiate {
                    state: s,
                    action: c.action,
                    reason: format!("row sums to {sum}"),
                });
            }
            row.push(Choice {
                action: c.action,
                reward: c.reward,
                successors: succ,
            });
        }
        choices.push(row);
    }
    UPomdp::from_parts(
        model.num_actions,
        model.num_observations,
        model.initial,
        &model.goal_states().collect::<Vec<_>>(),
        model.observation.clone(),
        choices,
    )
}

/// Point row for a single interval row: midpoints, then the excess or
/// deficit is spread proportionally to each entry's remaining room.
pub fn nominal_row(row: &[(usize, Interval)]) -> Vec<f64> {
    let mut p: Vec<f64> = row.iter().map(|(_, i)| i.midpoint()).collect();
    let sum: f64 = p.iter().sum();
    if sum > 1.0 {
        let room: f64 = row.iter().zip(&p).map(|((_, i), &m)| m - i.lower).sum();
        let excess = sum - 1.0;
        assert!(
            room >= excess - ROW_SUM_TOL,
            "empty polytope in nominal_row"
        );
        for ((_, i), m) in row.iter().zip(p.iter_mut()) {
            if room > 0.0 {
                *m -= excess * (*m - i.lower) / room;
            }
        }
    } else if sum < 1.0 {
        let room: f64 = row.iter().zip(&p).map(|((_, i), &m)| i.upper - m).sum();
        let deficit = 1.0 - sum;
        assert!(
            room >= deficit - ROW_SUM_TOL,
            "empty polytope in nominal_row"
        );
        for ((_, i), m) in row.iter().zip(p.iter_mut()) {
            if room > 0.0 {
                *m += deficit * (i.upper - *m) / room;
            }
        }
    }
    for ((_, i), m) in row.iter().zip(p.iter_mut()) {
        *m = m.clamp(i.lower, i.upper);
    }
    p
}

/// The nominal instantiation: interval midpoints, renormalized within bounds.
pub fn nominal(model: &UPomdp) -> Result<UPomdp> {
    ensure_valid(model)?;
    let choices = (0..model.num_states())
        .map(|s| {
            model
                .choices(s)
                .iter()
                .map(|c| {
                    let p = nominal_row(&c.successors);
                    Choice {
                        action: c.action,
                        reward: c.reward,
                        successors: c
                            .successors
                            .iter()
                            .zip(p)
                            .map(|(&(t, _), p)| (t, Interval::point(p)))
                            .collect(),
                    }
                })
                .collect()
        })
        .collect();
    UPomdp::from_parts(
        model.num_actions,
        model.num_observations,
        model.initial,
        &model.goal_states().collect::<Vec<_>>(),
        model.observation.clone(),
        choices,
    )
}

/// Optimization direction of the specification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Expected reward must be at least `kappa`; nature minimizes.
    MaximizeReward,
    /// Expected cost must be at most `kappa`; nature maximizes.
    MinimizeCost,
}

/// Expected-reward threshold `kappa` with its direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecThreshold {
    pub kappa: f64,
    pub direction: Objective,
}

impl SpecThreshold {
    pub fn at_least(kappa: f64) -> Self {
        Self {
            kappa,
            direction: Objective::MaximizeReward,
        }
    }

    pub fn at_most(kappa: f64) -> Self {
        Self {
            kappa,
            direction: Objective::MinimizeCost,
        }
    }

    pub fn is_satisfied_by(&self, value: f64) -> bool {
        match self.direction {
            Objective::MaximizeReward => value >= self.kappa,
            Objective::MinimizeCost => value <= self.kappa,
        }
    }
}

/// Observation-based memoryless stochastic policy.
///
/// Each observation maps to a distribution over action ids. Actions with
/// probability zero are simply absent; every listed probability is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    dists: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl Policy {
    pub fn new(dists: BTreeMap<usize, Vec<(usize, f64)>>) -> Result<Self> {
        for (&z, d) in &dists {
            if d.is_empty() {
                return Err(Error::InvalidPolicy {
                    observation: z,
                    reason: "empty distribution".into(),
                });
            }
            let mut sum = 0.0;
            for (i, &(a, p)) in d.iter().enumerate() {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::InvalidPolicy {
                        observation: z,
                        reason: format!("probability {p} for action {a} is not positive"),
                    });
                }
                if d[..i].iter().any(|&(b, _)| b == a) {
                    return Err(Error::InvalidPolicy {
                        observation: z,
                        reason: format!("action {a} listed twice"),
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > POLICY_SUM_TOL {
                return Err(Error::InvalidPolicy {
                    observation: z,
                    reason: format!("probabilities sum to {sum}"),
                });
            }
        }
        Ok(Self { dists })
    }

    /// Like [`Policy::new`], but first drops nonpositive entries and rescales
    /// each distribution to sum to one.
    pub fn normalized(dists: BTreeMap<usize, Vec<(usize, f64)>>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (z, d) in dists {
            let d: Vec<(usize, f64)> = d.into_iter().filter(|&(_, p)| p > 0.0).collect();
            let sum: f64 = d.iter().map(|(_, p)| p).sum();
            out.insert(z, d.into_iter().map(|(a, p)| (a, p / sum)).collect());
        }
        Self::new(out)
    }

    /// Uniform distribution over the available actions of each observation
    /// that occurs in `model`.
    pub fn uniform(model: &UPomdp) -> Self {
        let mut dists = BTreeMap::new();
        for s in 0..model.num_states() {
            dists.entry(model.observation(s)).or_insert_with(|| {
                let acts: Vec<usize> = model.actions(s).collect();
                let p = 1.0 / acts.len() as f64;
                acts.into_iter().map(|a| (a, p)).collect()
            });
        }
        Self { dists }
    }

    /// Dirac policy from an observation → action map.
    pub fn deterministic(choice: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            dists: choice
                .into_iter()
                .map(|(z, a)| (z, vec![(a, 1.0)]))
                .collect(),
        }
    }

    pub fn get(&self, z: usize) -> Option<&[(usize, f64)]> {
        self.dists.get(&z).map(Vec::as_slice)
    }

    pub fn prob(&self, z: usize, action: usize) -> f64 {
        self.get(z)
            .and_then(|d| d.iter().find(|&&(a, _)| a == action))
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn observations(&self) -> impl Iterator<Item = usize> + '_ {
        self.dists.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[(usize, f64)])> {
        self.dists.iter().map(|(&z, d)| (z, d.as_slice()))
    }

    pub fn into_inner(self) -> BTreeMap<usize, Vec<(usize, f64)>> {
        self.dists
    }
}

/// Interval Markov chain: a policy applied to a [`UPomdp`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMC {
    rows: Vec<Vec<(usize, Interval)>>,
    reward: Vec<f64>,
    goal: Vec<bool>,
    initial: usize,
}

impl IntervalMC {
    /// Rows are sorted by successor; duplicate successors are merged.
    pub fn new(
        rows: Vec<Vec<(usize, Interval)>>,
        reward: Vec<f64>,
        goal: Vec<bool>,
        initial: usize,
    ) -> Result<Self> {
        let n = rows.len();
        if reward.len() != n || goal.len() != n || initial >= n {
            return Err(Error::InvalidModel(vec![Violation::new(
                ViolationKind::IndexOutOfRange,
                None,
                None,
                None,
            )]));
        }
        let mut merged = Vec::with_capacity(n);
        for (s, row) in rows.into_iter().enumerate() {
            let mut m: BTreeMap<usize, Interval> = BTreeMap::new();
            for (t, iv) in row {
                if t >= n {
                    return Err(Error::InvalidModel(vec![Violation::new(
                        ViolationKind::IndexOutOfRange,
                        Some(s),
                        None,
                        Some(t),
                    )]));
                }
                let e = m.entry(t).or_insert(Interval::ZERO);
                *e = *e + iv;
            }
            merged.push(m.into_iter().collect());
        }
        Ok(Self {
            rows: merged,
            reward,
            goal,
            initial,
        })
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, s: usize) -> &[(usize, Interval)] {
        &self.rows[s]
    }

    pub fn reward(&self, s: usize) -> f64 {
        self.reward[s]
    }

    pub fn is_goal(&self, s: usize) -> bool {
        self.goal[s]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Same checks as [`validate`] applies to model rows.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (s, row) in self.rows.iter().enumerate() {
            check_row(s, None, row, &mut out);
            if !(self.reward[s].is_finite() && self.reward[s] >= 0.0) {
                out.push(Violation::new(
                    ViolationKind::NegativeReward,
                    Some(s),
                    None,
                    None,
                ));
            }
        }
        out
    }

    /// Number of entries with `lower < upper`.
    pub fn num_uncertain_transitions(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .filter(|(_, i)| !i.is_point())
            .count()
    }

    /// Relabels states: state `s` becomes `perm[s]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.num_states();
        let mut rows = vec![Vec::new(); n];
        let mut reward = vec![0.0; n];
        let mut goal = vec![false; n];
        for s in 0..n {
            rows[perm[s]] = self.rows[s].iter().map(|&(t, i)| (perm[t], i)).collect();
            reward[perm[s]] = self.reward[s];
            goal[perm[s]] = self.goal[s];
        }
        Self::new(rows, reward, goal, perm[self.initial]).expect("permutation of a valid chain")
    }
}

/// Applies `policy` to `model`: each row becomes the policy-weighted
/// endpoint-wise mixture of the action rows, and the state reward the
/// policy-weighted action reward.
pub fn induce_imc(model: &UPomdp, policy: &Policy) -> Result<IntervalMC> {
    let n = model.num_states();
    let mut rows = Vec::with_capacity(n);
    let mut reward = Vec::with_capacity(n);
    for s in 0..n {
        let z = model.observation(s);
        let dist = policy.get(z).ok_or(Error::MissingObservation(z))?;
        let mut row: Vec<(usize, Interval)> = Vec::new();
        let mut r = 0.0;
        for &(a, p) in dist {
            let c = model.choice(s, a).ok_or_else(|| Error::InvalidPolicy {
                observation: z,
                reason: format!("action {a} is not available in state {s}"),
            })?;
            r += p * c.reward;
            row.extend(c.successors.iter().map(|&(t, iv)| (t, iv.scale(p))));
        }
        rows.push(row);
        reward.push(r);
    }
    IntervalMC::new(rows, reward, model.goal.clone(), model.initial)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_state(iv: Interval) -> UPomdp {
        UPomdp::from_parts(
            1,
            2,
            0,
            &[1],
            vec![0, 1],
            vec![
                vec![Choice::new(
                    0,
                    1.0,
                    vec![(1, iv), (0, Interval::new(1.0 - iv.upper, 1.0 - iv.lower))],
                )],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn wide_interval_is_valid() {
        let m = two_state(Interval::new(0.5, 0.95));
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn zero_interval_is_not_a_violation() {
        let m = UPomdp::from_parts(
            1,
            1,
            0,
            &[1],
            vec![0, 0],
            vec![
                vec![Choice::new(
                    0,
                    0.0,
                    vec![(0, Interval::ZERO), (1, Interval::ONE)],
                )],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
            ],
        )
        .unwrap();
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn zero_lower_bound_breaks_graph_preservation() {
        let m = UPomdp::from_parts(
            1,
            2,
            0,
            &[1],
            vec![0, 1],
            vec![
                vec![Choice::new(
                    0,
                    0.0,
                    vec![(1, Interval::new(0.0, 0.3)), (0, Interval::new(0.7, 1.0))],
                )],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
            ],
        )
        .unwrap();
        let v = validate(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::GraphPreservation);
        assert_eq!(
            (v[0].state, v[0].action, v[0].successor),
            (Some(0), Some(0), Some(1))
        );
        assert_eq!(
            v[0].to_string(),
            "graph preservation at state 0, action 0, successor 1"
        );
    }

    #[test]
    fn observation_sharing_requires_equal_action_lists() {
        let m = UPomdp::from_parts(
            2,
            1,
            0,
            &[],
            vec![0, 0],
            vec![
                vec![
                    Choice::new(0, 0.0, vec![(1, Interval::ONE)]),
                    Choice::new(1, 0.0, vec![(1, Interval::ONE)]),
                ],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
            ],
        )
        .unwrap();
        assert!(validate(&m)
            .iter()
            .any(|v| v.kind == ViolationKind::ObservationActionMismatch && v.state == Some(1)));
    }

    #[test]
    fn goal_must_be_a_zero_reward_self_loop() {
        let m = UPomdp::from_parts(
            1,
            1,
            0,
            &[0],
            vec![0],
            vec![vec![Choice::new(0, 2.0, vec![(0, Interval::ONE)])]],
        )
        .unwrap();
        assert_eq!(validate(&m)[0].kind, ViolationKind::GoalNotAbsorbing);
    }

    #[test]
    fn structural_errors_are_rejected() {
        let dup = UPomdp::from_parts(
            1,
            1,
            0,
            &[],
            vec![0],
            vec![vec![Choice::new(
                0,
                0.0,
                vec![(0, Interval::ONE), (0, Interval::ONE)],
            )]],
        );
        assert!(
            matches!(dup, Err(Error::InvalidModel(v)) if v[0].kind == ViolationKind::DuplicateTransition)
        );
    }

    fn symmetric_row() -> UPomdp {
        let iv = Interval::new(0.2, 0.8);
        UPomdp::from_parts(
            1,
            1,
            0,
            &[1, 2],
            vec![0, 0, 0],
            vec![
                vec![Choice::new(0, 0.0, vec![(1, iv), (2, iv)])],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn instantiate_at_midpoints() {
        let m = symmetric_row();
        let p = instantiate(&m, |_, _, _, iv| iv.midpoint()).unwrap();
        assert_eq!(
            p.choices(0)[0].successors,
            vec![(1, Interval::point(0.5)), (2, Interval::point(0.5))]
        );
    }

    #[test]
    fn instantiate_at_degenerate_vertex() {
        let m = UPomdp::from_parts(
            1,
            1,
            0,
            &[1],
            vec![0, 0],
            vec![
                vec![Choice::new(
                    0,
                    0.0,
                    vec![(0, Interval::new(0.4, 0.9)), (1, Interval::new(0.6, 0.9))],
                )],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
            ],
        )
        .unwrap();
        assert!(instantiate(&m, |_, _, _, iv| iv.lower)
            .unwrap()
            .is_point_model());
    }

    #[test]
    fn instantiate_rejects_out_of_interval_pick() {
        let m = symmetric_row();
        let err = instantiate(&m, |s, _, t, iv| {
            if s == 0 {
                if t == 1 {
                    0.9
                } else {
                    0.2
                }
            } else {
                iv.lower
            }
        })
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Instantiate {
                state: 0,
                action: 0,
                ..
            }
        ));
    }

    #[test]
    fn instantiate_rejects_unnormalized_row() {
        let m = symmetric_row();
        let err = instantiate(&m, |_, _, _, iv| iv.lower).unwrap_err();
        assert!(matches!(err, Error::Instantiate { state: 0, .. }));
    }

    #[test]
    fn nominal_examples() {
        let r = nominal_row(&[(1, Interval::new(0.2, 0.8)), (2, Interval::new(0.2, 0.8))]);
        assert_eq!(r, vec![0.5, 0.5]);
        let r = nominal_row(&[
            (0, Interval::new(0.9, 0.95)),
            (1, Interval::ZERO),
            (2, Interval::new(0.05, 0.1)),
        ]);
        assert!((r[0] - 0.925).abs() < 1e-15 && r[1] == 0.0 && (r[2] - 0.075).abs() < 1e-15);
        let r = nominal_row(&[(0, Interval::point(0.3)), (1, Interval::point(0.7))]);
        assert_eq!(r, vec![0.3, 0.7]);
    }

    #[test]
    fn nominal_renormalizes_within_bounds() {
        let row = [
            (0, Interval::new(0.5, 0.95)),
            (1, Interval::new(0.025, 0.25)),
            (2, Interval::new(0.025, 0.25)),
        ];
        let r = nominal_row(&row);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for ((_, iv), p) in row.iter().zip(&r) {
            assert!(iv.contains(*p, 0.0));
        }
    }

    #[test]
    fn induce_uniform_mixture_of_dirac_rows() {
        let m = UPomdp::from_parts(
            2,
            2,
            0,
            &[1, 2],
            vec![0, 1, 1],
            vec![
                vec![
                    Choice::new(0, 2.0, vec![(1, Interval::ONE)]),
                    Choice::new(1, 4.0, vec![(2, Interval::ONE)]),
                ],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap();
        let imc = induce_imc(&m, &Policy::uniform(&m)).unwrap();
        assert_eq!(
            imc.row(0),
            &[(1, Interval::point(0.5)), (2, Interval::point(0.5))]
        );
        assert_eq!(imc.reward(0), 3.0);
    }

    #[test]
    fn induce_endpoint_mixture() {
        let iv = Interval::new(0.2, 0.8);
        let m = UPomdp::from_parts(
            2,
            2,
            0,
            &[1, 2],
            vec![0, 1, 1],
            vec![
                vec![
                    Choice::new(0, 0.0, vec![(1, iv), (2, iv)]),
                    Choice::new(1, 0.0, vec![(1, Interval::ONE)]),
                ],
                vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap();
        let imc = induce_imc(&m, &Policy::uniform(&m)).unwrap();
        let row = imc.row(0);
        assert!((row[0].1.lower - 0.6).abs() < 1e-15 && (row[0].1.upper - 0.9).abs() < 1e-15);
        assert!((row[1].1.lower - 0.1).abs() < 1e-15 && (row[1].1.upper - 0.4).abs() < 1e-15);

        let dirac = Policy::deterministic([(0, 1), (1, 0)]);
        let imc = induce_imc(&m, &dirac).unwrap();
        assert_eq!(imc.row(0), &[(1, Interval::ONE)]);
    }

    #[test]
    fn induce_reports_missing_observation() {
        let m = symmetric_row();
        let p = Policy::new(BTreeMap::new()).unwrap();
        assert!(matches!(
            induce_imc(&m, &p),
            Err(Error::MissingObservation(0))
        ));
    }

    #[test]
    fn policy_rejects_bad_distributions() {
        let mut d = BTreeMap::new();
        d.insert(0, vec![(0, 0.5), (1, 0.4)]);
        assert!(Policy::new(d).is_err());
        let mut d = BTreeMap::new();
        d.insert(0, vec![(0, 1.0), (1, 0.0)]);
        assert!(Policy::new(d.clone()).is_err());
        assert_eq!(Policy::normalized(d).unwrap().get(0), Some(&[(0, 1.0)][..]));
    }
}
