//! Sequential convex programming with exact robust verification.
//!
//! Each iteration verifies the current policy on the memory product, then
//! either accepts it (growing the trust region) or rejects it (shrinking the
//! trust region and going back to the last accepted point), and finally
//! solves the linearized program around the accepted point to propose the
//! next policy.

mod linearize;
mod program;
mod trace;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dualize::dual_constraints;
use crate::error::{Error, Result};
use crate::lp::{solve_with, BackendKind, LpStatus};
use crate::model::{induce_imc, Objective, Policy, SpecThreshold, UPomdp};
use crate::robustcheck::{inner_opt, robust_value_iteration, Extremum, RobustResult, ViOptions};
use crate::transform::{memory_product, to_simple, Fsc, MemoryProduct, NodeKind, SimpleForm};

pub use linearize::{linearize_h, AffineForm};
pub use program::{build_scp_lp, LinearizationPoint, ScpProgram, SIGMA_FLOOR, TRUST_FLOOR};
pub use trace::{LpRecord, ScpTrace, TraceRow, TRACE_HEADER};

#[derive(Clone, Debug, PartialEq)]
pub struct ScpConfig {
    /// Penalty weight on constraint violations.
    pub tau: f64,
    /// Initial trust-region size.
    pub delta0: f64,
    /// Trust-region growth and shrink factor, `> 1`.
    pub gamma: f64,
    /// The loop stops once the trust region is at most this size.
    pub omega: f64,
    /// Upper bound on verifications.
    pub max_iters: usize,
    pub vi: ViOptions,
    /// 0 starts from the uniform policy; any other value from a uniform
    /// policy with seeded multiplicative jitter.
    pub seed: u64,
    pub backend: BackendKind,
    /// Record wall-clock seconds in the trace. Off by default so traces are
    /// reproducible byte for byte.
    pub wall_clock: bool,
}

impl Default for ScpConfig {
    fn default() -> Self {
        Self {
            tau: 1e4,
            delta0: 1.5,
            gamma: 1.5,
            omega: 1e-4,
            max_iters: 200,
            vi: ViOptions::default(),
            seed: 0,
            backend: BackendKind::Sparse,
            wall_clock: false,
        }
    }
}

impl ScpConfig {
    pub fn check(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tau) || !positive(self.delta0) || !positive(self.omega) {
            return Err(Error::InvalidParams(
                "tau, delta0 and omega must be positive".into(),
            ));
        }
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::InvalidParams("gamma must exceed 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScpStatus {
    /// The returned policy robustly meets the threshold.
    Satisfied,
    /// Trust region or iteration budget exhausted; best verified policy returned.
    NotSatisfied,
    /// The linearized program failed twice in a row; best verified policy returned.
    LpFailure,
}

#[derive(Clone, Debug)]
pub struct ScpOutcome {
    pub status: ScpStatus,
    pub fsc: Fsc,
    /// The returned policy as a memoryless policy on the product.
    pub product_policy: Policy,
    pub product: MemoryProduct,
    /// Verification of the returned policy on the product.
    pub result: RobustResult,
    pub trace: ScpTrace,
}

impl ScpOutcome {
    pub fn beta(&self) -> f64 {
        self.result.beta
    }

    pub fn is_satisfied(&self) -> bool {
        self.status == ScpStatus::Satisfied
    }
}

struct Verified {
    simple_policy: Policy,
    product_policy: Policy,
    result: RobustResult,
    r_hat: Vec<f64>,
}

/// Robust values of the product under the policy, then value estimates for
/// every simple state: leaves evaluate their own interval row against the
/// product values, internal nodes mix their children.
fn verify(
    sf: &SimpleForm,
    product: &UPomdp,
    simple_policy: Policy,
    vi: ViOptions,
) -> Result<Verified> {
    let product_policy = sf.map_policy_back(&simple_policy)?;
    let imc = induce_imc(product, &product_policy)?;
    let result = robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), vi)?;
    let m = &sf.simple;
    let n = m.num_states();
    let mut root_values = vec![0.0; n];
    for p in 0..product.num_states() {
        root_values[sf.root(p)] = result.values[p];
    }
    let mut r_hat = vec![0.0; n];
    // children have larger ids than their parents
    for s in (0..n).rev() {
        if m.is_goal(s) {
            continue;
        }
        r_hat[s] = match sf.kind(s) {
            NodeKind::Uncertainty => {
                let c = &m.choices(s)[0];
                c.reward + inner_opt(&root_values, &c.successors, Extremum::Min)?.value
            }
            NodeKind::Action => {
                let z = m.observation(s);
                let (l, r) = sf.children(s).expect("action-state");
                simple_policy.prob(z, crate::transform::LEFT) * r_hat[l]
                    + simple_policy.prob(z, crate::transform::RIGHT) * r_hat[r]
            }
        };
    }
    Ok(Verified {
        simple_policy,
        product_policy,
        result,
        r_hat,
    })
}

fn initial_policy(product: &UPomdp, seed: u64) -> Result<Policy> {
    if seed == 0 {
        return Ok(Policy::uniform(product));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dists = std::collections::BTreeMap::new();
    for z in 0..product.num_observations() {
        if let Some(acts) = product.observation_actions(z) {
            dists.insert(
                z,
                acts.into_iter()
                    .map(|a| (a, rng.gen_range(0.5..1.5)))
                    .collect(),
            );
        }
    }
    Policy::normalized(dists)
}

/// Searches for a `k`-memory controller whose robust expected reward on
/// `model` is at least `spec.kappa`.
pub fn scp_solve(
    model: &UPomdp,
    spec: &SpecThreshold,
    k: usize,
    cfg: &ScpConfig,
) -> Result<ScpOutcome> {
    cfg.check()?;
    if spec.direction != Objective::MaximizeReward {
        return Err(Error::Unsupported(
            "the SCP driver maximizes reward only".into(),
        ));
    }
    if !spec.kappa.is_finite() {
        return Err(Error::InvalidParams("threshold must be finite".into()));
    }
    crate::model::ensure_valid(model)?;
    let started = Instant::now();
    let elapsed = || {
        if cfg.wall_clock {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        }
    };

    let product = memory_product(model, k)?;
    let sf = to_simple(&product.product)?;
    let duals = dual_constraints(&sf)?;

    let mut trace = ScpTrace::default();
    let mut delta = cfg.delta0;
    let mut beta_old = 0.0;
    let mut accepted_point: Option<Verified> = None;
    let mut candidate = sf.map_policy_forward(&initial_policy(&product.product, cfg.seed)?)?;
    let mut status = ScpStatus::NotSatisfied;

    for iter in 0..cfg.max_iters {
        let v = verify(&sf, &product.product, candidate, cfg.vi)?;
        let beta = v.result.beta;
        log::debug!("iteration {iter}: beta {beta}, delta {delta}");
        if spec.is_satisfied_by(beta) {
            trace
                .rows
                .push(TraceRow::new(iter, elapsed(), beta, delta, true));
            accepted_point = Some(v);
            status = ScpStatus::Satisfied;
            break;
        }
        let accepted = beta > beta_old;
        let guard = delta <= cfg.omega || iter + 1 == cfg.max_iters;
        if guard {
            trace
                .rows
                .push(TraceRow::new(iter, elapsed(), beta, delta, accepted));
            if accepted || accepted_point.is_none() {
                accepted_point = Some(v);
            }
            break;
        }
        if accepted {
            beta_old = beta;
            delta *= cfg.gamma;
            accepted_point = Some(v);
        } else {
            delta /= cfg.gamma;
            if accepted_point.is_none() {
                accepted_point = Some(v);
            }
        }
        let base = accepted_point.as_ref().expect("set above");
        let point = LinearizationPoint::new(&sf, &base.simple_policy, base.r_hat.clone())?;

        let mut row = TraceRow::new(iter, 0.0, beta, delta, accepted);
        let mut solved = None;
        for attempt in 0..2 {
            if attempt == 1 {
                delta /= cfg.gamma;
                row.delta = delta;
            }
            let prog = build_scp_lp(&sf, &duals, &point, delta, cfg.tau, spec)?;
            let sol = solve_with(&prog.lp, cfg.backend);
            if sol.status == LpStatus::Optimal {
                row.lp = Some(LpRecord {
                    objective: sol.objective,
                    penalty_sum: prog.penalty_sum(&sol),
                    status: sol.status,
                });
                solved = Some((prog, sol));
                break;
            }
            log::warn!(
                "iteration {iter}: LP {} ({:?})",
                sol.status,
                sol.stats.message
            );
            row.lp = Some(LpRecord {
                objective: f64::NAN,
                penalty_sum: f64::NAN,
                status: sol.status,
            });
        }
        row.time_s = elapsed();
        trace.rows.push(row);
        match solved {
            Some((prog, sol)) => candidate = prog.extract_policy(&sf, &sol)?,
            None => {
                status = ScpStatus::LpFailure;
                break;
            }
        }
    }

    let best = accepted_point.expect("at least one verification ran");
    Ok(ScpOutcome {
        status,
        fsc: product.map_policy_back(&best.product_policy)?,
        product_policy: best.product_policy,
        result: best.result,
        product,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Choice, Interval};

    /// Two decisions: action 1 at the start is better, and at the second
    /// state action 0 is better.
    fn two_decision_model() -> UPomdp {
        let iv = Interval::new(0.3, 0.7);
        UPomdp::from_parts(
            2,
            3,
            0,
            &[2],
            vec![0, 1, 2],
            vec![
                vec![
                    Choice::new(0, 0.0, vec![(1, iv), (2, iv)]),
                    Choice::new(1, 1.0, vec![(1, Interval::ONE)]),
                ],
                vec![
                    Choice::new(0, 2.0, vec![(2, Interval::ONE)]),
                    Choice::new(1, 0.5, vec![(2, Interval::ONE)]),
                ],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn already_satisfied_returns_after_one_verification() {
        let m = two_decision_model();
        let out = scp_solve(&m, &SpecThreshold::at_least(0.0), 1, &ScpConfig::default()).unwrap();
        assert_eq!(out.status, ScpStatus::Satisfied);
        assert_eq!(out.trace.rows.len(), 1);
        assert!(out.trace.rows[0].lp.is_none());
    }

    #[test]
    fn tight_omega_stops_immediately() {
        let m = two_decision_model();
        let cfg = ScpConfig {
            omega: 2.0,
            ..ScpConfig::default()
        };
        let out = scp_solve(&m, &SpecThreshold::at_least(10.0), 1, &cfg).unwrap();
        assert_eq!(out.status, ScpStatus::NotSatisfied);
        assert_eq!(out.trace.rows.len(), 1);
    }

    #[test]
    fn climbs_to_the_optimum() {
        let m = two_decision_model();
        // optimum: action 1 then action 0, value 1 + 2 = 3
        let out = scp_solve(&m, &SpecThreshold::at_least(2.99), 1, &ScpConfig::default()).unwrap();
        assert_eq!(out.status, ScpStatus::Satisfied, "{}", out.trace.to_csv());
        assert!(out.beta() >= 2.99);
        let mut last = f64::NEG_INFINITY;
        for r in out.trace.rows.iter().filter(|r| r.accepted) {
            assert!(r.beta > last);
            last = r.beta;
        }
    }

    #[test]
    fn unreachable_threshold_is_best_effort() {
        let m = two_decision_model();
        let out = scp_solve(
            &m,
            &SpecThreshold::at_least(100.0),
            1,
            &ScpConfig::default(),
        )
        .unwrap();
        assert_eq!(out.status, ScpStatus::NotSatisfied);
        assert!(
            out.beta() > 2.9 && out.beta() <= 3.0 + 1e-9,
            "{}",
            out.trace.to_csv()
        );
    }

    #[test]
    fn cost_direction_is_rejected() {
        let m = two_decision_model();
        assert!(matches!(
            scp_solve(&m, &SpecThreshold::at_most(1.0), 1, &ScpConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn trace_is_deterministic() {
        let m = two_decision_model();
        let cfg = ScpConfig {
            seed: 7,
            ..ScpConfig::default()
        };
        let a = scp_solve(&m, &SpecThreshold::at_least(100.0), 2, &cfg).unwrap();
        let b = scp_solve(&m, &SpecThreshold::at_least(100.0), 2, &cfg).unwrap();
        assert_eq!(a.trace.to_csv(), b.trace.to_csv());
        assert_eq!(a.product_policy, b.product_policy);
    }
}
