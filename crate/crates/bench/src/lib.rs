//! Benchmark fixtures.

use robfsc::ingest::{gen_random, gen_spacecraft, RandomParams, SpacecraftParams};
use robfsc::lp::{Cmp, LinearProgram, Sense};
use robfsc::UPomdp;

/// Spacecraft model with `nmts` orbits, `res` time cells and `objects`
/// seeded random objects.
pub fn spacecraft(nmts: usize, res: usize, objects: usize) -> UPomdp {
    gen_spacecraft(&SpacecraftParams {
        nmt_count: nmts,
        time_resolution: res,
        random_objects: objects,
        seed: 7,
        ..SpacecraftParams::default()
    })
    .expect("valid parameters")
}

pub fn tiny(seed: u64) -> UPomdp {
    gen_random(&RandomParams {
        states: 5,
        actions: 3,
        observations: 3,
        max_successors: 3,
        max_uncertain: 8,
        width: 0.3,
        max_reward: 1.0,
        seed,
    })
    .expect("valid parameters")
}

/// Sparse banded LP with `n` variables in `[0, 1]`: each row caps the sum
/// of three neighbouring variables.
pub fn banded_lp(n: usize) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let vars: Vec<_> = (0..n)
        .map(|j| lp.add_var(format!("x{j}"), 0.0, 1.0))
        .collect();
    for (j, &v) in vars.iter().enumerate() {
        lp.set_objective(v, 1.0 + (j % 7) as f64 / 7.0);
    }
    for j in 0..n.saturating_sub(2) {
        let terms = (0..3).map(|d| (vars[j + d], 1.0 + d as f64));
        lp.add_row(format!("r{j}"), terms, Cmp::Le, 2.0 + (j % 3) as f64);
    }
    lp
}
