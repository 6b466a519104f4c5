//! Orbit-switching spacecraft benchmark.
//!
//! A spacecraft moves through `nmt_count` orbits arranged in a ring, each cut
//! into `time_resolution` cells. State `(n, i)` has id `n·I + i`; the
//! collision sink is `N·I` and the goal `N·I + 1`.
//!
//! Every step advances the time index by one. Action 0 stays in the orbit.
//! Actions `1..` switch by the ring offsets `+1, -1, +2, -2, ..` up to
//! `switch_radius`, skipping offsets that reach the own orbit or repeat a
//! target. A switch lands in the intended orbit with probability in
//! `switch_success` and otherwise diverts to either ring neighbor of the
//! target with half of the complementary interval each. Landing in an object
//! cell is survived with probability in `detect_success` and otherwise ends
//! in the collision sink. From the last time index every action completes
//! the cycle: reward 1 and the goal.
//!
//! Observations are `(n, i div q)` with `q = ceil(I / obs_cells)`, or just
//! `i div q` when the orbit is hidden.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{validate, Choice, Interval, UPomdp};

#[derive(Clone, Debug, PartialEq)]
pub struct SpacecraftParams {
    pub nmt_count: usize,
    pub time_resolution: usize,
    pub switch_radius: usize,
    pub switch_success: Interval,
    pub detect_success: Interval,
    pub object_cells: Vec<(usize, usize)>,
    /// Extra object cells drawn from `seed`, never at time index 0.
    pub random_objects: usize,
    /// Observation cells per orbit; `None` means `min(I, 40)`.
    pub obs_cells: Option<usize>,
    pub orbit_observable: bool,
    pub seed: u64,
}

impl Default for SpacecraftParams {
    fn default() -> Self {
        Self {
            nmt_count: 6,
            time_resolution: 20,
            switch_radius: 1,
            switch_success: Interval::new(0.5, 0.95),
            detect_success: Interval::new(0.5, 0.95),
            object_cells: Vec::new(),
            random_objects: 0,
            obs_cells: None,
            orbit_observable: true,
            seed: 0,
        }
    }
}

impl SpacecraftParams {
    pub fn state(&self, n: usize, i: usize) -> usize {
        n * self.time_resolution + i
    }

    pub fn collision_state(&self) -> usize {
        self.nmt_count * self.time_resolution
    }

    pub fn goal_state(&self) -> usize {
        self.nmt_count * self.time_resolution + 1
    }

    /// `N·I + 2`.
    pub fn num_states(&self) -> usize {
        self.nmt_count * self.time_resolution + 2
    }

    /// Ring offsets of the switch actions, in action order starting at 1.
    pub fn switch_offsets(&self) -> Vec<isize> {
        let n = self.nmt_count as isize;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for d in 1..=self.switch_radius as isize {
            for off in [d, -d] {
                let target = off.rem_euclid(n);
                if target != 0 && seen.insert(target) {
                    out.push(off);
                }
            }
        }
        out
    }

    /// Time cells merged into one observation.
    pub fn obs_stride(&self) -> usize {
        let cells = self
            .obs_cells
            .unwrap_or(self.time_resolution.min(40))
            .clamp(1, self.time_resolution.max(1));
        self.time_resolution.div_ceil(cells)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.nmt_count == 0 || self.time_resolution == 0 {
            return bad("nmt_count and time_resolution must be positive".into());
        }
        for (name, iv) in [
            ("switch_success", self.switch_success),
            ("detect_success", self.detect_success),
        ] {
            if !iv.is_well_formed() || !iv.preserves_graph() {
                return bad(format!("{name} {iv} is not a valid probability interval"));
            }
        }
        if let Some(&(n, i)) = self
            .object_cells
            .iter()
            .find(|&&(n, i)| n >= self.nmt_count || i >= self.time_resolution)
        {
            return bad(format!("object cell ({n}, {i}) out of range"));
        }
        if self.obs_cells == Some(0) {
            return bad("obs_cells must be positive".into());
        }
        let free = self.nmt_count * (self.time_resolution - 1);
        if self.random_objects > free {
            return bad(format!(
                "{} random objects exceed {free} free cells",
                self.random_objects
            ));
        }
        Ok(())
    }

    /// Given object cells plus the seeded random ones, sorted.
    pub fn objects(&self) -> BTreeSet<(usize, usize)> {
        let mut cells: BTreeSet<(usize, usize)> = self.object_cells.iter().copied().collect();
        if self.random_objects > 0 && self.time_resolution > 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let per = self.time_resolution - 1;
            for k in sample(&mut rng, self.nmt_count * per, self.random_objects) {
                cells.insert((k / per, 1 + k % per));
            }
        }
        cells
    }
}

fn push(row: &mut Vec<(usize, Interval)>, t: usize, iv: Interval) {
    if iv.upper == 0.0 {
        return;
    }
    match row.iter_mut().find(|(u, _)| *u == t) {
        Some((_, acc)) => {
            let sum = *acc + iv;
            *acc = Interval::new(sum.lower, sum.upper.min(1.0));
        }
        None => row.push((t, iv)),
    }
}

pub fn gen_spacecraft(p: &SpacecraftParams) -> Result<UPomdp> {
    p.check()?;
    let big_n = p.nmt_count;
    let big_i = p.time_resolution;
    let objects = p.objects();
    let collision = p.collision_state();
    let goal = p.goal_state();
    let offsets = p.switch_offsets();
    let fail = p.switch_success.complement().scale(0.5);

    let land = |row: &mut Vec<(usize, Interval)>, n: usize, i: usize, iv: Interval| {
        if objects.contains(&(n, i)) {
            push(row, p.state(n, i), iv.mul(&p.detect_success));
            push(row, collision, iv.mul(&p.detect_success.complement()));
        } else {
            push(row, p.state(n, i), iv);
        }
    };

    let stride = p.obs_stride();
    let cells = big_i.div_ceil(stride);
    let grid_obs = if p.orbit_observable {
        big_n * cells
    } else {
        cells
    };
    let mut observation = Vec::with_capacity(p.num_states());
    let mut choices = Vec::with_capacity(p.num_states());
    for n in 0..big_n {
        for i in 0..big_i {
            observation.push(if p.orbit_observable {
                n * cells + i / stride
            } else {
                i / stride
            });
            let row_of = |target: Option<isize>| {
                if i + 1 == big_i {
                    return (1.0, vec![(goal, Interval::ONE)]);
                }
                let mut row = Vec::new();
                match target {
                    None => land(&mut row, n, i + 1, Interval::ONE),
                    Some(off) => {
                        let m = (n as isize + off).rem_euclid(big_n as isize) as usize;
                        land(&mut row, m, i + 1, p.switch_success);
                        land(&mut row, (m + 1) % big_n, i + 1, fail);
                        land(&mut row, (m + big_n - 1) % big_n, i + 1, fail);
                    }
                }
                (0.0, row)
            };
            let mut cs = Vec::with_capacity(1 + offsets.len());
            let (r, row) = row_of(None);
            cs.push(Choice::new(0, r, row));
            for (k, &off) in offsets.iter().enumerate() {
                let (r, row) = row_of(Some(off));
                cs.push(Choice::new(k + 1, r, row));
            }
            choices.push(cs);
        }
    }
    observation.push(grid_obs);
    choices.push(vec![Choice::new(0, 0.0, vec![(goal, Interval::ONE)])]);
    observation.push(grid_obs + 1);
    choices.push(vec![Choice::new(0, 0.0, vec![(goal, Interval::ONE)])]);

    let model = UPomdp::from_parts(
        1 + offsets.len(),
        grid_obs + 2,
        p.state(0, 0),
        &[goal],
        observation,
        choices,
    )?;
    let v = validate(&model);
    if !v.is_empty() {
        return Err(Error::InvalidParams(format!(
            "generated model is invalid: {}",
            v[0]
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::write_model;
    use crate::model::{induce_imc, Policy, SpecThreshold};
    use crate::robustcheck::{robust_value_iteration, ViOptions};

    fn value(model: &UPomdp, policy: &Policy) -> f64 {
        let imc = induce_imc(model, policy).unwrap();
        robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
            .unwrap()
            .beta
    }

    #[test]
    fn hazard_free_value_is_one() {
        let p = SpacecraftParams::default();
        let m = gen_spacecraft(&p).unwrap();
        assert_eq!(m.num_states(), 6 * 20 + 2);
        assert!((value(&m, &Policy::uniform(&m)) - 1.0).abs() < 1e-12);
        let stay = Policy::deterministic((0..m.num_observations()).map(|z| (z, 0)));
        assert!((value(&m, &stay) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_count_with_objects() {
        let p = SpacecraftParams {
            object_cells: vec![(0, 5), (1, 7), (3, 2), (5, 19)],
            ..Default::default()
        };
        let m = gen_spacecraft(&p).unwrap();
        assert_eq!(m.num_states(), 6 * 20 + 2);
        assert_eq!(m.num_actions(), 3);
    }

    #[test]
    fn zero_radius_has_no_switches() {
        let p = SpacecraftParams {
            switch_radius: 0,
            ..Default::default()
        };
        let m = gen_spacecraft(&p).unwrap();
        assert_eq!(m.num_actions(), 1);
        assert!((0..m.num_states()).all(|s| m.choices(s).len() == 1));
    }

    #[test]
    fn switch_row_shape() {
        let p = SpacecraftParams {
            object_cells: vec![(2, 1)],
            ..Default::default()
        };
        let m = gen_spacecraft(&p).unwrap();
        // from (1, 0), switch +1 targets orbit 2, diverting to 3 or 1
        let c = m.choice(p.state(1, 0), 1).unwrap();
        let row: Vec<(usize, Interval)> = c.successors.clone();
        assert_eq!(row.len(), 4);
        let get = |t| row.iter().find(|(u, _)| *u == t).unwrap().1;
        let s = get(p.state(2, 1));
        assert!((s.lower - 0.25).abs() < 1e-15 && (s.upper - 0.9025).abs() < 1e-15);
        let d = get(p.state(3, 1));
        assert!((d.lower - 0.025).abs() < 1e-15 && (d.upper - 0.25).abs() < 1e-15);
        assert!(row.iter().any(|&(t, _)| t == p.collision_state()));
    }

    #[test]
    fn observations_and_aliasing() {
        let p = SpacecraftParams {
            obs_cells: Some(5),
            ..Default::default()
        };
        assert_eq!(p.obs_stride(), 4);
        let m = gen_spacecraft(&p).unwrap();
        assert_eq!(m.num_observations(), 6 * 5 + 2);
        assert_eq!(m.observation(p.state(1, 7)), 5 + 1);
        let hidden = SpacecraftParams {
            orbit_observable: false,
            ..p
        };
        let m = gen_spacecraft(&hidden).unwrap();
        assert_eq!(m.num_observations(), 5 + 2);
    }

    #[test]
    fn small_rings_merge_diversions() {
        let p = SpacecraftParams {
            nmt_count: 2,
            switch_radius: 3,
            ..Default::default()
        };
        assert_eq!(p.switch_offsets(), vec![1]);
        let m = gen_spacecraft(&p).unwrap();
        let c = m.choice(p.state(0, 0), 1).unwrap();
        // both neighbors of orbit 1 are orbit 0
        assert_eq!(c.successors.len(), 2);
    }

    #[test]
    fn seeded_objects_are_deterministic() {
        let p = SpacecraftParams {
            random_objects: 6,
            seed: 7,
            ..Default::default()
        };
        assert_eq!(p.objects().len(), 6);
        assert!(p.objects().iter().all(|&(_, i)| i > 0));
        let a = write_model(&gen_spacecraft(&p).unwrap()).unwrap();
        let b = write_model(&gen_spacecraft(&p).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = SpacecraftParams { seed: 8, ..p };
        assert_ne!(
            other.objects(),
            SpacecraftParams {
                seed: 7,
                ..other.clone()
            }
            .objects()
        );
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = SpacecraftParams {
            switch_success: Interval::new(0.0, 0.5),
            ..Default::default()
        };
        assert!(matches!(gen_spacecraft(&p), Err(Error::InvalidParams(_))));
        let p = SpacecraftParams {
            object_cells: vec![(6, 0)],
            ..Default::default()
        };
        assert!(matches!(gen_spacecraft(&p), Err(Error::InvalidParams(_))));
    }
}
