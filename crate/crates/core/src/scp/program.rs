use std::collections::BTreeMap;

use crate::dualize::DualSystem;
use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpSolution, Sense, VarId};
use crate::model::{Policy, SpecThreshold};
use crate::transform::{SimpleForm, ACT, LEFT, RIGHT};

use super::linearize::linearize_h;

/// Additive floor of the value trust region: `r̂ = 0` still allows
/// `r ∈ [0, TRUST_FLOOR·δ']`.
pub const TRUST_FLOOR: f64 = 1e-6;

/// Smallest branch probability kept when reading a policy off an LP.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// Expansion point of the linearized program, on the simple form.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationPoint {
    /// `(σ̂(LEFT), σ̂(RIGHT))` per observation of an action-state.
    pub sigma_hat: BTreeMap<usize, [f64; 2]>,
    /// `r̂` per simple state.
    pub r_hat: Vec<f64>,
}

impl LinearizationPoint {
    /// Branch probabilities of a simple-form policy, with reward estimates.
    pub fn new(sf: &SimpleForm, policy: &Policy, r_hat: Vec<f64>) -> Result<Self> {
        let mut sigma_hat = BTreeMap::new();
        for s in sf.action_states() {
            let z = sf.simple.observation(s);
            if policy.get(z).is_none() {
                return Err(Error::MissingObservation(z));
            }
            sigma_hat.insert(z, [policy.prob(z, LEFT), policy.prob(z, RIGHT)]);
        }
        Ok(Self { sigma_hat, r_hat })
    }
}

/// The assembled program with handles to its variables.
#[derive(Clone, Debug)]
pub struct ScpProgram {
    pub lp: LinearProgram,
    pub r: Vec<VarId>,
    pub sigma: BTreeMap<usize, [VarId; 2]>,
    pub penalties: Vec<VarId>,
}

/// Linearized, penalized, trust-region-bounded program around `point`.
///
/// Maximizes `r_init - τ·Σk`. Action-states carry
/// `r_s ≤ k_s + Σ_b h_aff(σ_b, r_{child_b})`, uncertainty-states the dual rows
/// of `duals`, and `r_init + k_spec ≥ κ` the specification.
pub fn build_scp_lp(
    sf: &SimpleForm,
    duals: &DualSystem,
    point: &LinearizationPoint,
    delta: f64,
    tau: f64,
    spec: &SpecThreshold,
) -> Result<ScpProgram> {
    let m = &sf.simple;
    let n = m.num_states();
    if point.r_hat.len() != n {
        return Err(Error::InvalidParams(format!(
            "{} value estimates for {n} states",
            point.r_hat.len()
        )));
    }
    let dp = delta + 1.0;
    let mut lp = LinearProgram::new(Sense::Maximize);
    let r: Vec<VarId> = (0..n)
        .map(|s| {
            let (lo, hi) = if m.is_goal(s) {
                (0.0, 0.0)
            } else {
                let rh = point.r_hat[s].max(0.0);
                (rh / dp, (rh * dp).max(TRUST_FLOOR * dp))
            };
            lp.add_var(format!("r_{s}"), lo, hi)
        })
        .collect();
    lp.set_objective(r[m.initial()], 1.0);
    let mut penalties = Vec::new();
    let k_spec = lp.add_var("k_spec", 0.0, f64::INFINITY);
    lp.set_objective(k_spec, -tau);
    penalties.push(k_spec);
    lp.add_row(
        "spec",
        [(r[m.initial()], 1.0), (k_spec, 1.0)],
        Cmp::Ge,
        spec.kappa,
    );

    let mut sigma = BTreeMap::new();
    for (&z, hat) in &point.sigma_hat {
        if hat.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidPolicy {
                observation: z,
                reason: "linearization point has a zero branch".into(),
            });
        }
        let vars = [
            lp.add_var(format!("sigma_{z}_L"), hat[0] / dp, hat[0] * dp),
            lp.add_var(format!("sigma_{z}_R"), hat[1] / dp, hat[1] * dp),
        ];
        lp.add_row(
            format!("simplex_{z}"),
            [(vars[0], 1.0), (vars[1], 1.0)],
            Cmp::Eq,
            1.0,
        );
        sigma.insert(z, vars);
    }

    for s in sf.action_states() {
        let z = m.observation(s);
        let (left, right) = sf.children(s).expect("action-state");
        let vars = sigma.get(&z).ok_or(Error::MissingObservation(z))?;
        let hat = point.sigma_hat[&z];
        let k = lp.add_var(format!("k_{s}"), 0.0, f64::INFINITY);
        lp.set_objective(k, -tau);
        penalties.push(k);
        let mut terms = vec![(r[s], 1.0), (k, -1.0)];
        let mut rhs = 0.0;
        for (b, child) in [(0, left), (1, right)] {
            // transitions out of action-states are Dirac, so d = 1
            let f = linearize_h(1.0, hat[b], point.r_hat[child]);
            terms.push((vars[b], -f.coeff_y));
            terms.push((r[child], -f.coeff_z));
            rhs += f.constant;
        }
        lp.add_row(format!("bellman_{s}"), terms, Cmp::Le, rhs);
    }

    for block in &duals.blocks {
        let succ: Vec<VarId> = block.polytope.succ().iter().map(|&t| r[t]).collect();
        block.emit(&mut lp, r[block.state], &succ);
    }
    Ok(ScpProgram {
        lp,
        r,
        sigma,
        penalties,
    })
}

impl ScpProgram {
    pub fn penalty_sum(&self, sol: &LpSolution) -> f64 {
        self.penalties.iter().map(|&k| sol.value(k)).sum()
    }

    /// Simple-form policy read from a solution: branch probabilities floored
    /// at [`SIGMA_FLOOR`] and renormalized; leaves take [`ACT`].
    pub fn extract_policy(&self, sf: &SimpleForm, sol: &LpSolution) -> Result<Policy> {
        let mut dists = BTreeMap::new();
        for s in 0..sf.simple.num_states() {
            let z = sf.simple.observation(s);
            dists.entry(z).or_insert_with(|| match self.sigma.get(&z) {
                Some(v) => {
                    let l = sol.value(v[0]).max(SIGMA_FLOOR);
                    let r = sol.value(v[1]).max(SIGMA_FLOOR);
                    vec![(LEFT, l / (l + r)), (RIGHT, r / (l + r))]
                }
                None => vec![(ACT, 1.0)],
            });
        }
        Policy::new(dists)
    }
}
