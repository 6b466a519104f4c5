use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Choice, Interval, Policy, UPomdp};

/// Action ids of the simple form.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const ACT: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// Two Dirac choices, [`LEFT`] and [`RIGHT`], no reward.
    Action,
    /// One choice, [`ACT`], carrying a source action's reward and interval row.
    Uncertainty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TreeNode {
    Internal { left: usize, right: usize },
    Leaf { position: usize },
}

/// Preorder tree over action positions `lo..hi`; the left subtree takes
/// `ceil(m/2)` actions.
fn build_tree(lo: usize, hi: usize, out: &mut Vec<TreeNode>) -> usize {
    let id = out.len();
    if hi - lo == 1 {
        out.push(TreeNode::Leaf { position: lo });
        return id;
    }
    out.push(TreeNode::Leaf {
        position: usize::MAX,
    });
    let mid = lo + (hi - lo).div_ceil(2);
    let left = build_tree(lo, mid, out);
    let right = build_tree(mid, hi, out);
    out[id] = TreeNode::Internal { left, right };
    id
}

fn tree(m: usize) -> Vec<TreeNode> {
    let mut out = Vec::with_capacity(2 * m - 1);
    build_tree(0, m, &mut out);
    out
}

/// Where a simple state came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Origin {
    pub source: usize,
    /// Preorder index in the source state's tree; 0 is the root.
    pub node: usize,
    /// Source action of a leaf.
    pub action: Option<usize>,
}

/// A model whose states are split into action-states (binary Dirac choice)
/// and uncertainty-states (single action with an interval row).
///
/// Each source state `s` with `m` actions becomes a left-leaning balanced
/// binary tree of `2m - 1` simple states with consecutive ids, root first.
/// Leaves are uncertainty-states holding one source action's reward and its
/// interval row redirected to successor roots. Observation `(z, node)` is
/// shared by every tree of a state observed as `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleForm {
    pub simple: UPomdp,
    kind: Vec<NodeKind>,
    origin: Vec<Origin>,
    root: Vec<usize>,
    /// First simple observation id of each source observation's tree.
    obs_base: Vec<Option<usize>>,
    /// Source action order and tree shape per source observation.
    shapes: Vec<Option<(Vec<usize>, Vec<TreeNode>)>>,
}

/// Splits every state of `model` into a binary decision tree over its actions.
pub fn to_simple(model: &UPomdp) -> Result<SimpleForm> {
    let zn = model.num_observations();
    let mut shapes: Vec<Option<(Vec<usize>, Vec<TreeNode>)>> = vec![None; zn];
    let mut obs_base = vec![None; zn];
    let mut next_obs = 0;
    for z in 0..zn {
        if let Some(acts) = model.observation_actions(z) {
            if acts.is_empty() {
                return Err(Error::Unsupported(format!(
                    "observation {z} offers no actions"
                )));
            }
            let t = tree(acts.len());
            obs_base[z] = Some(next_obs);
            next_obs += t.len();
            shapes[z] = Some((acts, t));
        }
    }
    let n = model.num_states();
    let mut root = Vec::with_capacity(n);
    let mut total = 0;
    for s in 0..n {
        root.push(total);
        let m = model.choices(s).len();
        if m == 0 {
            return Err(Error::Unsupported(format!("state {s} offers no actions")));
        }
        total += 2 * m - 1;
    }
    let mut kind = Vec::with_capacity(total);
    let mut origin = Vec::with_capacity(total);
    let mut observation = Vec::with_capacity(total);
    let mut choices: Vec<Vec<Choice>> = Vec::with_capacity(total);
    for s in 0..n {
        let z = model.observation(s);
        let (acts, shape) = shapes[z]
            .as_ref()
            .expect("observation of an existing state");
        let own: Vec<usize> = model.actions(s).collect();
        if &own != acts {
            return Err(Error::InvalidModel(vec![crate::model::Violation::new(
                crate::model::ViolationKind::ObservationActionMismatch,
                Some(s),
                None,
                None,
            )]));
        }
        let base = root[s];
        for (k, node) in shape.iter().enumerate() {
            observation.push(obs_base[z].expect("assigned above") + k);
            match *node {
                TreeNode::Internal { left, right } => {
                    kind.push(NodeKind::Action);
                    origin.push(Origin {
                        source: s,
                        node: k,
                        action: None,
                    });
                    choices.push(vec![
                        Choice::new(LEFT, 0.0, vec![(base + left, Interval::ONE)]),
                        Choice::new(RIGHT, 0.0, vec![(base + right, Interval::ONE)]),
                    ]);
                }
                TreeNode::Leaf { position } => {
                    let c = &model.choices(s)[position];
                    kind.push(NodeKind::Uncertainty);
                    origin.push(Origin {
                        source: s,
                        node: k,
                        action: Some(c.action),
                    });
                    let succ = c.successors.iter().map(|&(t, iv)| (root[t], iv)).collect();
                    choices.push(vec![Choice::new(ACT, c.reward, succ)]);
                }
            }
        }
    }
    let goals: Vec<usize> = model.goal_states().map(|g| root[g]).collect();
    let simple = UPomdp::from_parts(
        3,
        next_obs,
        root[model.initial()],
        &goals,
        observation,
        choices,
    )?;
    Ok(SimpleForm {
        simple,
        kind,
        origin,
        root,
        obs_base,
        shapes,
    })
}

impl SimpleForm {
    pub fn kind(&self, s: usize) -> NodeKind {
        self.kind[s]
    }

    pub fn origin(&self, s: usize) -> Origin {
        self.origin[s]
    }

    /// Simple state standing for source state `s`.
    pub fn root(&self, s: usize) -> usize {
        self.root[s]
    }

    pub fn action_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kind.len()).filter(|&s| self.kind[s] == NodeKind::Action)
    }

    pub fn uncertainty_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kind.len()).filter(|&s| self.kind[s] == NodeKind::Uncertainty)
    }

    /// Left and right children of an action-state.
    pub fn children(&self, s: usize) -> Option<(usize, usize)> {
        match self.kind[s] {
            NodeKind::Action => {
                let c = self.simple.choices(s);
                Some((c[0].successors[0].0, c[1].successors[0].0))
            }
            NodeKind::Uncertainty => None,
        }
    }

    /// Checks the partition: action-states have exactly the two Dirac
    /// choices, uncertainty-states exactly one choice.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for s in 0..self.simple.num_states() {
            let cs = self.simple.choices(s);
            match self.kind[s] {
                NodeKind::Action => {
                    let ok = cs.len() == 2
                        && cs.iter().all(|c| {
                            c.successors.len() == 1
                                && c.successors[0].1 == Interval::ONE
                                && c.reward == 0.0
                        });
                    if !ok {
                        return Err(format!("action-state {s} is not a binary Dirac choice"));
                    }
                }
                NodeKind::Uncertainty => {
                    if cs.len() != 1 {
                        return Err(format!("uncertainty-state {s} has {} actions", cs.len()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Branch probabilities reproducing a source policy: at each internal
    /// node, `σ(LEFT)` is the left subtree's share of the node's mass.
    pub fn map_policy_forward(&self, policy: &Policy) -> Result<Policy> {
        let mut dists = BTreeMap::new();
        for (z, shape) in self.shapes.iter().enumerate() {
            let Some((acts, t)) = shape else { continue };
            let src = policy.get(z).ok_or(Error::MissingObservation(z))?;
            let weights: Vec<f64> = acts
                .iter()
                .map(|a| src.iter().find(|(b, _)| b == a).map_or(0.0, |&(_, p)| p))
                .collect();
            let base = self.obs_base[z].expect("shape implies base");
            let mut mass = vec![0.0; t.len()];
            for k in (0..t.len()).rev() {
                mass[k] = match t[k] {
                    TreeNode::Leaf { position } => weights[position],
                    TreeNode::Internal { left, right } => mass[left] + mass[right],
                };
            }
            for (k, node) in t.iter().enumerate() {
                let d = match *node {
                    TreeNode::Leaf { .. } => vec![(ACT, 1.0)],
                    TreeNode::Internal { left, right } => {
                        if mass[k] > 0.0 {
                            vec![(LEFT, mass[left] / mass[k]), (RIGHT, mass[right] / mass[k])]
                        } else {
                            vec![(LEFT, 0.5), (RIGHT, 0.5)]
                        }
                    }
                };
                dists.insert(base + k, d);
            }
        }
        Policy::normalized(dists)
    }

    /// Source policy whose action probabilities are the products of branch
    /// probabilities along each root-to-leaf path.
    pub fn map_policy_back(&self, policy: &Policy) -> Result<Policy> {
        let mut dists = BTreeMap::new();
        for (z, shape) in self.shapes.iter().enumerate() {
            let Some((acts, t)) = shape else { continue };
            let base = self.obs_base[z].expect("shape implies base");
            let mut reach = vec![0.0; t.len()];
            reach[0] = 1.0;
            let mut d = Vec::with_capacity(acts.len());
            for (k, node) in t.iter().enumerate() {
                match *node {
                    TreeNode::Internal { left, right } => {
                        let sz = base + k;
                        if policy.get(sz).is_none() {
                            return Err(Error::MissingObservation(sz));
                        }
                        reach[left] = reach[k] * policy.prob(sz, LEFT);
                        reach[right] = reach[k] * policy.prob(sz, RIGHT);
                    }
                    TreeNode::Leaf { position } => d.push((acts[position], reach[k])),
                }
            }
            dists.insert(z, d);
        }
        Policy::normalized(dists)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state_m(m: usize) -> UPomdp {
        let choices = vec![
            (0..m)
                .map(|a| Choice::new(a, a as f64, vec![(1, Interval::ONE)]))
                .collect(),
            vec![Choice::new(0, 0.0, vec![(1, Interval::ONE)])],
        ];
        UPomdp::from_parts(m, 2, 0, &[1], vec![0, 1], choices).unwrap()
    }

    #[test]
    fn three_actions_give_two_action_states() {
        let sf = to_simple(&one_state_m(3)).unwrap();
        // 5 nodes for the decision state, 1 for the goal
        assert_eq!(sf.simple.num_states(), 6);
        assert_eq!(sf.action_states().count(), 2);
        assert_eq!(sf.uncertainty_states().count(), 4);
        sf.check_invariants().unwrap();
        assert!(crate::model::validate(&sf.simple).is_empty());
        // preorder: root, internal(0,1), leaf 0, leaf 1, leaf 2
        assert_eq!(sf.children(0), Some((1, 4)));
        assert_eq!(sf.children(1), Some((2, 3)));
        assert_eq!(sf.origin(4).action, Some(2));
        assert_eq!(sf.simple.choices(4)[0].reward, 2.0);
    }

    #[test]
    fn single_action_is_one_uncertainty_state() {
        let sf = to_simple(&one_state_m(1)).unwrap();
        assert_eq!(sf.simple.num_states(), 2);
        assert_eq!(sf.action_states().count(), 0);
    }

    #[test]
    fn dirac_path_maps_to_dirac() {
        let sf = to_simple(&one_state_m(3)).unwrap();
        let mut d = BTreeMap::new();
        d.insert(0, vec![(RIGHT, 1.0)]);
        d.insert(1, vec![(LEFT, 1.0)]);
        for z in 2..sf.simple.num_observations() {
            d.insert(z, vec![(ACT, 1.0)]);
        }
        let back = sf.map_policy_back(&Policy::new(d).unwrap()).unwrap();
        assert_eq!(back.get(0).unwrap(), &[(2, 1.0)]);
    }

    #[test]
    fn branch_products_over_four_actions() {
        let sf = to_simple(&one_state_m(4)).unwrap();
        let mut d = BTreeMap::new();
        for z in 0..sf.simple.num_observations() {
            let dist = match sf
                .simple
                .choices(
                    sf.simple
                        .observations()
                        .iter()
                        .position(|&o| o == z)
                        .unwrap(),
                )
                .len()
            {
                2 => vec![(LEFT, 0.5), (RIGHT, 0.5)],
                _ => vec![(ACT, 1.0)],
            };
            d.insert(z, dist);
        }
        let back = sf.map_policy_back(&Policy::new(d).unwrap()).unwrap();
        assert_eq!(back.prob(0, 0), 0.25);
    }

    #[test]
    fn forward_then_back_is_identity() {
        let m = one_state_m(3);
        let sf = to_simple(&m).unwrap();
        let mut d = BTreeMap::new();
        d.insert(0, vec![(0, 0.2), (1, 0.3), (2, 0.5)]);
        d.insert(1, vec![(0, 1.0)]);
        let p = Policy::new(d).unwrap();
        let back = sf
            .map_policy_back(&sf.map_policy_forward(&p).unwrap())
            .unwrap();
        for a in 0..3 {
            assert!((back.prob(0, a) - p.prob(0, a)).abs() < 1e-15);
        }
    }
}
