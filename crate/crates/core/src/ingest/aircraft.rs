//! Aircraft collision-avoidance benchmark.
//!
//! The state is the intruder's position and velocity relative to the own
//! aircraft on a `position_cells × position_cells` grid with
//! `speed_cells × speed_cells` velocities. Coordinates are centered: index
//! `k` of `c` cells is `k - (c - 1) / 2`.
//!
//! Each step the intruder accelerates by `+1` on each axis with probability
//! in `intruder_accel`, else by `-1`. Action 0 holds, actions 1 and 2 climb
//! and descend, which changes the relative vertical velocity by `∓1` when
//! the pilot responds, with probability in `pilot_responsive`. Velocities
//! are clamped to the grid, then added to the position. Leaving the grid
//! clears the encounter; landing within `unsafe_radius` of the origin on
//! both axes is a collision.
//!
//! State `((x·P + y)·V + vx)·V + vy` is a grid state; `P²V²` is the
//! collision sink, `P²V² + 1` the clear state (reward 1) and `P²V² + 2` the
//! goal. The start is `(min x, 0)` with velocity `(1, 0)`, clamped. The
//! observation is the position divided by `sensor_quantization` per axis;
//! velocity is not observed.

use crate::error::{Error, Result};
use crate::model::{validate, Choice, Interval, UPomdp};

#[derive(Clone, Debug, PartialEq)]
pub struct AircraftParams {
    pub position_cells: usize,
    pub speed_cells: usize,
    pub intruder_accel: Interval,
    pub pilot_responsive: Interval,
    pub sensor_quantization: usize,
    pub unsafe_radius: usize,
    /// Recorded for reproducibility; the construction itself has no random
    /// choices.
    pub seed: u64,
}

impl Default for AircraftParams {
    fn default() -> Self {
        Self {
            position_cells: 5,
            speed_cells: 3,
            intruder_accel: Interval::new(0.2, 0.8),
            pilot_responsive: Interval::new(0.7, 0.9),
            sensor_quantization: 1,
            unsafe_radius: 0,
            seed: 0,
        }
    }
}

fn range(cells: usize) -> (i64, i64) {
    let lo = -((cells as i64 - 1) / 2);
    (lo, lo + cells as i64 - 1)
}

impl AircraftParams {
    pub fn num_grid_states(&self) -> usize {
        self.position_cells.pow(2) * self.speed_cells.pow(2)
    }

    /// `P²V² + 3`.
    pub fn num_states(&self) -> usize {
        self.num_grid_states() + 3
    }

    pub fn collision_state(&self) -> usize {
        self.num_grid_states()
    }

    pub fn clear_state(&self) -> usize {
        self.num_grid_states() + 1
    }

    pub fn goal_state(&self) -> usize {
        self.num_grid_states() + 2
    }

    /// Id of the grid state at centered coordinates.
    pub fn state(&self, x: i64, y: i64, vx: i64, vy: i64) -> usize {
        let (plo, _) = range(self.position_cells);
        let (vlo, _) = range(self.speed_cells);
        let (p, v) = (self.position_cells, self.speed_cells);
        let ix = (x - plo) as usize;
        let iy = (y - plo) as usize;
        ((ix * p + iy) * v + (vx - vlo) as usize) * v + (vy - vlo) as usize
    }

    pub fn initial_state(&self) -> usize {
        let (plo, phi) = range(self.position_cells);
        let (vlo, vhi) = range(self.speed_cells);
        self.state(
            plo,
            0i64.clamp(plo, phi),
            1i64.clamp(vlo, vhi),
            0i64.clamp(vlo, vhi),
        )
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.position_cells == 0 || self.speed_cells == 0 || self.sensor_quantization == 0 {
            return bad("grid sizes and sensor_quantization must be positive".into());
        }
        if self.speed_cells == 1 && self.position_cells > 1 {
            return bad("a single speed cell freezes the encounter; use at least 2".into());
        }
        for (name, iv) in [
            ("intruder_accel", self.intruder_accel),
            ("pilot_responsive", self.pilot_responsive),
        ] {
            let complement = iv.complement();
            if !iv.is_well_formed() || !iv.preserves_graph() || !complement.preserves_graph() {
                return bad(format!(
                    "{name} {iv} must have both outcomes possible or be a point"
                ));
            }
        }
        Ok(())
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

pub fn gen_aircraft(p: &AircraftParams) -> Result<UPomdp> {
    p.check()?;
    let (plo, phi) = range(p.position_cells);
    let (vlo, vhi) = range(p.speed_cells);
    let u = p.unsafe_radius as i64;
    let q = p.sensor_quantization;
    let per_axis = p.position_cells.div_ceil(q);
    let grid_obs = per_axis * per_axis;
    let accel = [
        (1i64, p.intruder_accel),
        (-1, p.intruder_accel.complement()),
    ];

    let mut observation = vec![0; p.num_states()];
    let mut choices = vec![Vec::new(); p.num_states()];
    for x in plo..=phi {
        for y in plo..=phi {
            for vx in vlo..=vhi {
                for vy in vlo..=vhi {
                    let s = p.state(x, y, vx, vy);
                    observation[s] = ((x - plo) as usize / q) * per_axis + (y - plo) as usize / q;
                    for (action, own) in [(0usize, 0i64), (1, 1), (2, -1)] {
                        let pilot: Vec<(i64, Interval)> = if own == 0 {
                            vec![(0, Interval::ONE)]
                        } else {
                            vec![
                                (own, p.pilot_responsive),
                                (0, p.pilot_responsive.complement()),
                            ]
                        };
                        let mut row = Vec::new();
                        for &(o, po) in &pilot {
                            for &(ax, px) in &accel {
                                for &(ay, py) in &accel {
                                    let nvx = (vx + ax).clamp(vlo, vhi);
                                    let nvy = (vy + ay - o).clamp(vlo, vhi);
                                    let (nx, ny) = (x + nvx, y + nvy);
                                    let t = if nx < plo || nx > phi || ny < plo || ny > phi {
                                        p.clear_state()
                                    } else if nx.abs() <= u && ny.abs() <= u {
                                        p.collision_state()
                                    } else {
                                        p.state(nx, ny, nvx, nvy)
                                    };
                                    push(&mut row, t, po.mul(&px).mul(&py));
                                }
                            }
                        }
                        choices[s].push(Choice::new(action, 0.0, row));
                    }
                }
            }
        }
    }
    let goal = p.goal_state();
    observation[p.collision_state()] = grid_obs;
    choices[p.collision_state()] = vec![Choice::new(0, 0.0, vec![(goal, Interval::ONE)])];
    observation[p.clear_state()] = grid_obs + 1;
    choices[p.clear_state()] = vec![Choice::new(0, 1.0, vec![(goal, Interval::ONE)])];
    observation[goal] = grid_obs + 2;
    choices[goal] = vec![Choice::new(0, 0.0, vec![(goal, Interval::ONE)])];

    let model = UPomdp::from_parts(
        3,
        grid_obs + 3,
        p.initial_state(),
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
    use crate::robustcheck::{check_reaches_goal, robust_value_iteration, ViOptions};

    #[test]
    fn degenerate_grid_ends_in_one_step() {
        let p = AircraftParams {
            position_cells: 1,
            speed_cells: 1,
            ..Default::default()
        };
        let m = gen_aircraft(&p).unwrap();
        assert_eq!(m.num_states(), 4);
        for c in m.choices(m.initial()) {
            assert!(c
                .successors
                .iter()
                .all(|&(t, _)| t == p.collision_state() || t == p.clear_state()));
        }
    }

    #[test]
    fn point_intruder_adds_no_uncertainty_on_hold() {
        let p = AircraftParams {
            intruder_accel: Interval::point(0.5),
            ..Default::default()
        };
        let m = gen_aircraft(&p).unwrap();
        for s in 0..p.num_grid_states() {
            assert!(m.choice(s, 0).unwrap().is_point_row());
        }
    }

    #[test]
    fn controlled_transitions_carry_pilot_interval() {
        let p = AircraftParams {
            intruder_accel: Interval::point(0.5),
            ..Default::default()
        };
        let m = gen_aircraft(&p).unwrap();
        let c = m.choice(p.state(-2, 0, 1, 0), 1).unwrap();
        // responsive outcomes scale [0.7, 0.9] by the point intruder factor
        let responsive = Interval::new(0.7 * 0.25, 0.9 * 0.25);
        let hit = c.successors.iter().filter(|(_, iv)| {
            (iv.lower - responsive.lower).abs() < 1e-15
                && (iv.upper - responsive.upper).abs() < 1e-15
        });
        assert!(hit.count() >= 1);
        assert!(!c.is_point_row());
    }

    #[test]
    fn counts_and_reachability() {
        let p = AircraftParams::default();
        let m = gen_aircraft(&p).unwrap();
        assert_eq!(m.num_states(), 25 * 9 + 3);
        assert_eq!(m.num_observations(), 25 + 3);
        let imc = induce_imc(&m, &Policy::uniform(&m)).unwrap();
        check_reaches_goal(&imc).unwrap();
        let r = robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
            .unwrap();
        assert!(r.beta > 0.0 && r.beta < 1.0);
        assert_eq!(
            write_model(&m).unwrap(),
            write_model(&gen_aircraft(&p).unwrap()).unwrap()
        );
    }

    #[test]
    fn narrower_intervals_never_lower_the_value() {
        let mut prev = 0.0;
        for (lo, hi) in [(0.2, 0.8), (0.3, 0.7), (0.4, 0.6)] {
            let p = AircraftParams {
                intruder_accel: Interval::new(lo, hi),
                ..Default::default()
            };
            let m = gen_aircraft(&p).unwrap();
            let imc = induce_imc(&m, &Policy::uniform(&m)).unwrap();
            let beta =
                robust_value_iteration(&imc, &SpecThreshold::at_least(0.0), ViOptions::default())
                    .unwrap()
                    .beta;
            assert!(beta >= prev - 1e-12);
            prev = beta;
        }
    }

    #[test]
    fn quantized_observations() {
        let p = AircraftParams {
            sensor_quantization: 2,
            ..Default::default()
        };
        let m = gen_aircraft(&p).unwrap();
        assert_eq!(m.num_observations(), 9 + 3);
        assert_eq!(
            m.observation(p.state(-2, -2, 0, 0)),
            m.observation(p.state(-1, -1, 1, 1))
        );
    }

    #[test]
    fn frozen_encounter_is_rejected() {
        let p = AircraftParams {
            speed_cells: 1,
            ..Default::default()
        };
        assert!(matches!(gen_aircraft(&p), Err(Error::InvalidParams(_))));
    }
}
