//! Seeded random models for tests and benchmarks.
//!
//! Every non-goal state offers all actions, and every action row moves to
//! the goal with positive probability, so every policy reaches the goal
//! almost surely. The goal is the last state and has its own observation.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Choice, Interval, Policy, UPomdp};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    /// Including the goal.
    pub states: usize,
    pub actions: usize,
    /// Including the goal's observation.
    pub observations: usize,
    /// Non-goal successors per row, drawn from `1..=max_successors`.
    pub max_successors: usize,
    /// Upper bound on non-point intervals in the whole model.
    pub max_uncertain: usize,
    /// Largest distance from the nominal probability to an interval end.
    pub width: f64,
    /// Rewards are drawn from `[0, max_reward)`.
    pub max_reward: f64,
    pub seed: u64,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            states: 5,
            actions: 2,
            observations: 3,
            max_successors: 2,
            max_uncertain: 8,
            width: 0.2,
            max_reward: 1.0,
            seed: 0,
        }
    }
}

/// Smallest interval lower bound, keeping every edge present.
const EDGE_FLOOR: f64 = 0.01;

pub fn gen_random(p: &RandomParams) -> Result<UPomdp> {
    if p.states < 2 || p.actions == 0 || p.observations < 2 || p.max_successors == 0 {
        return Err(Error::InvalidParams(
            "random models need ≥ 2 states, ≥ 1 action, ≥ 2 observations and ≥ 1 successor".into(),
        ));
    }
    if !(p.width >= 0.0 && p.width <= 1.0) || !(p.max_reward >= 0.0 && p.max_reward.is_finite()) {
        return Err(Error::InvalidParams(
            "width must lie in [0, 1] and max_reward be nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let goal = p.states - 1;
    let inner = p.states - 1;
    let mut observation: Vec<usize> = (0..inner)
        .map(|_| rng.gen_range(0..p.observations - 1))
        .collect();
    observation.push(p.observations - 1);

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for _ in 0..inner * p.actions {
        let k = rng.gen_range(1..=p.max_successors.min(inner));
        let mut succ: Vec<usize> = sample(&mut rng, inner, k).into_vec();
        succ.sort_unstable();
        succ.push(goal);
        let weights: Vec<f64> = succ.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        rows.push(
            succ.into_iter()
                .zip(weights)
                .map(|(t, w)| (t, w / total))
                .collect(),
        );
    }

    let slots: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| (0..row.len()).map(move |j| (r, j)))
        .collect();
    let budget = p.max_uncertain.min(slots.len());
    let widened: std::collections::BTreeSet<(usize, usize)> = sample(&mut rng, slots.len(), budget)
        .into_iter()
        .map(|i| slots[i])
        .collect();

    let mut choices = Vec::with_capacity(p.states);
    for s in 0..inner {
        let mut acts = Vec::with_capacity(p.actions);
        for a in 0..p.actions {
            let r = s * p.actions + a;
            let succ = rows[r]
                .iter()
                .enumerate()
                .map(|(j, &(t, q))| {
                    let iv = if widened.contains(&(r, j)) && p.width > 0.0 {
                        let lo = (q - p.width * rng.gen::<f64>()).max(EDGE_FLOOR).min(q);
                        let hi = (q + p.width * rng.gen::<f64>()).min(1.0).max(q);
                        Interval::new(lo, hi)
                    } else {
                        Interval::new(q, q)
                    };
                    (t, iv)
                })
                .collect();
            let reward = if p.max_reward > 0.0 {
                rng.gen_range(0.0..p.max_reward)
            } else {
                0.0
            };
            acts.push(Choice::new(a, reward, succ));
        }
        choices.push(acts);
    }
    choices.push(vec![Choice::new(0, 0.0, vec![(goal, Interval::ONE)])]);
    UPomdp::from_parts(p.actions, p.observations, 0, &[goal], observation, choices)
}

/// A policy with full support drawn from `rng`, probabilities at least `0.01`.
pub fn random_policy(model: &UPomdp, rng: &mut impl Rng) -> Policy {
    let mut dists = std::collections::BTreeMap::new();
    for s in 0..model.num_states() {
        let z = model.observation(s);
        if dists.contains_key(&z) {
            continue;
        }
        let acts: Vec<usize> = model.actions(s).collect();
        let w: Vec<f64> = acts.iter().map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = w.iter().sum();
        dists.insert(
            z,
            acts.into_iter()
                .zip(w)
                .map(|(a, x)| (a, x / total))
                .collect(),
        );
    }
    Policy::new(dists).expect("rows are normalized")
}
