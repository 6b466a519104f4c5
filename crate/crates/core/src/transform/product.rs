use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Choice, Policy, UPomdp};

/// A model with `k` memory cells folded into its states, observations and
/// actions.
///
/// Ids are laid out arithmetically: state `(s, n)` is `s·k + n`, observation
/// `(z, n)` is `z·k + n`, and action `(α, n')` (take `α`, move to memory
/// `n'`) is `α·k + n'`.
///
/// Observations that some goal state carries are *memory-frozen*: the only
/// product actions there are `(α, n)`, keeping memory unchanged. This keeps
/// goal states absorbing while all states sharing an observation still share
/// their action sets.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryProduct {
    pub product: UPomdp,
    memory: usize,
    frozen: Vec<bool>,
}

impl MemoryProduct {
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn state(&self, s: usize, n: usize) -> usize {
        s * self.memory + n
    }

    pub fn observation(&self, z: usize, n: usize) -> usize {
        z * self.memory + n
    }

    pub fn action(&self, a: usize, next: usize) -> usize {
        a * self.memory + next
    }

    /// `(s, n)` of a product state.
    pub fn split_state(&self, p: usize) -> (usize, usize) {
        (p / self.memory, p % self.memory)
    }

    pub fn split_observation(&self, p: usize) -> (usize, usize) {
        (p / self.memory, p % self.memory)
    }

    /// `(α, n')` of a product action.
    pub fn split_action(&self, p: usize) -> (usize, usize) {
        (p / self.memory, p % self.memory)
    }

    /// Whether memory is held fixed under source observation `z`.
    pub fn is_frozen(&self, z: usize) -> bool {
        self.frozen.get(z).copied().unwrap_or(false)
    }

    /// Reads a memoryless product policy as a finite-state controller.
    pub fn map_policy_back(&self, policy: &Policy) -> Result<Fsc> {
        let mut action = BTreeMap::new();
        let mut update = BTreeMap::new();
        for (pz, dist) in policy.iter() {
            if pz >= self.product.num_observations() {
                return Err(Error::MissingObservation(pz));
            }
            let (z, n) = self.split_observation(pz);
            let mut gamma: BTreeMap<usize, f64> = BTreeMap::new();
            for &(pa, p) in dist {
                *gamma.entry(self.split_action(pa).0).or_insert(0.0) += p;
            }
            for &(pa, p) in dist {
                let (a, next) = self.split_action(pa);
                update
                    .entry((n, z, a))
                    .or_insert_with(Vec::new)
                    .push((next, p / gamma[&a]));
            }
            action.insert((n, z), gamma.into_iter().collect());
        }
        Fsc::new(self.memory, action, update)
    }

    /// The memoryless product policy of a controller:
    /// `σ((z,n))((α,n')) = γ(n,z)(α)·η(n,z,α)(n')`.
    pub fn policy_from_fsc(&self, fsc: &Fsc) -> Result<Policy> {
        if fsc.memory() != self.memory {
            return Err(Error::InvalidParams(format!(
                "controller has {} memory states, product has {}",
                fsc.memory(),
                self.memory
            )));
        }
        let mut dists = BTreeMap::new();
        for (&(n, z), gamma) in &fsc.action {
            let mut d = Vec::new();
            for &(a, pa) in gamma {
                let eta = fsc
                    .update
                    .get(&(n, z, a))
                    .ok_or_else(|| Error::InvalidPolicy {
                        observation: self.observation(z, n),
                        reason: format!("no memory update for action {a}"),
                    })?;
                for &(next, pn) in eta {
                    d.push((self.action(a, next), pa * pn));
                }
            }
            dists.insert(self.observation(z, n), d);
        }
        Policy::normalized(dists)
    }
}

/// Builds the product of `model` with `k` memory cells. The initial state is
/// `(s_I, 0)` and every `(g, n)` with `g` a goal is a goal.
pub fn memory_product(model: &UPomdp, k: usize) -> Result<MemoryProduct> {
    if k == 0 {
        return Err(Error::InvalidParams("memory size must be positive".into()));
    }
    let mut frozen = vec![false; model.num_observations()];
    for g in model.goal_states() {
        frozen[model.observation(g)] = true;
    }
    let n = model.num_states();
    let mut observation = Vec::with_capacity(n * k);
    let mut choices = Vec::with_capacity(n * k);
    let mut goals = Vec::new();
    for s in 0..n {
        let z = model.observation(s);
        for mem in 0..k {
            observation.push(z * k + mem);
            if model.is_goal(s) {
                goals.push(s * k + mem);
            }
            let nexts: Vec<usize> = if frozen[z] {
                vec![mem]
            } else {
                (0..k).collect()
            };
            let mut row = Vec::with_capacity(model.choices(s).len() * nexts.len());
            for c in model.choices(s) {
                for &next in &nexts {
                    let succ = c
                        .successors
                        .iter()
                        .map(|&(t, iv)| (t * k + next, iv))
                        .collect();
                    row.push(Choice::new(c.action * k + next, c.reward, succ));
                }
            }
            choices.push(row);
        }
    }
    let product = UPomdp::from_parts(
        model.num_actions() * k,
        model.num_observations() * k,
        model.initial() * k,
        &goals,
        observation,
        choices,
    )?;
    Ok(MemoryProduct {
        product,
        memory: k,
        frozen,
    })
}

/// Finite-state controller with stochastic action choice `γ(n, z)` and
/// stochastic memory update `η(n, z, α)`. Memory starts in cell 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Fsc {
    memory: usize,
    action: BTreeMap<(usize, usize), Vec<(usize, f64)>>,
    update: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>>,
}

fn check_dist(d: &[(usize, f64)], what: &str) -> Result<()> {
    let sum: f64 = d.iter().map(|(_, p)| p).sum();
    if d.is_empty() || d.iter().any(|&(_, p)| !(p > 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "{what} is not a positive distribution"
        )));
    }
    Ok(())
}

impl Fsc {
    /// `action` is keyed by `(memory, observation)`, `update` by
    /// `(memory, observation, action)`.
    pub fn new(
        memory: usize,
        action: BTreeMap<(usize, usize), Vec<(usize, f64)>>,
        update: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>>,
    ) -> Result<Self> {
        for (&(n, z), d) in &action {
            if n >= memory {
                return Err(Error::InvalidParams(format!(
                    "memory cell {n} out of range"
                )));
            }
            check_dist(d, &format!("action choice at ({n}, {z})"))?;
        }
        for (&(n, z, a), d) in &update {
            check_dist(d, &format!("memory update at ({n}, {z}, {a})"))?;
            if let Some(&(bad, _)) = d.iter().find(|(m, _)| *m >= memory) {
                return Err(Error::InvalidParams(format!(
                    "memory cell {bad} out of range"
                )));
            }
        }
        Ok(Self {
            memory,
            action,
            update,
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// `γ(n, z)`.
    pub fn action_dist(&self, n: usize, z: usize) -> Option<&[(usize, f64)]> {
        self.action.get(&(n, z)).map(Vec::as_slice)
    }

    /// `η(n, z, α)`.
    pub fn update_dist(&self, n: usize, z: usize, a: usize) -> Option<&[(usize, f64)]> {
        self.update.get(&(n, z, a)).map(Vec::as_slice)
    }

    /// Wraps a memoryless policy as a one-cell controller.
    pub fn memoryless(policy: &Policy) -> Self {
        let mut action = BTreeMap::new();
        let mut update = BTreeMap::new();
        for (z, d) in policy.iter() {
            action.insert((0, z), d.to_vec());
            for &(a, _) in d {
                update.insert((0, z, a), vec![(0, 1.0)]);
            }
        }
        Self {
            memory: 1,
            action,
            update,
        }
    }
}
