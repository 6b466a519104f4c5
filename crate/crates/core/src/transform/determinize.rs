use crate::error::{Error, Result};
use crate::model::{ensure_valid, Choice, Interval, UPomdp};

/// Result of [`determinize_observations`].
#[derive(Clone, Debug, PartialEq)]
pub struct Determinized {
    pub model: UPomdp,
    /// `(source state, observation)` of every new state; `None` for the
    /// fresh initial state added when the source initial state splits.
    pub copies: Vec<Option<(usize, usize)>>,
}

/// Replaces stochastic observations by deterministic ones.
///
/// `obs_rows[s]` is the observation distribution of state `s` (point
/// intervals only). Each state splits into one copy per observation it emits
/// with positive probability; incoming intervals to a copy are scaled by that
/// probability. The observation labels stored in `model` are ignored. If the
/// initial state splits, a fresh initial state with its own observation and
/// a single zero-reward action (id 0) moves into the copies.
pub fn determinize_observations(
    model: &UPomdp,
    obs_rows: &[Vec<(usize, Interval)>],
) -> Result<Determinized> {
    let n = model.num_states();
    if obs_rows.len() != n {
        return Err(Error::InvalidParams(format!(
            "{} observation rows for {n} states",
            obs_rows.len()
        )));
    }
    let mut copies = Vec::new();
    let mut split: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for (s, row) in obs_rows.iter().enumerate() {
        if let Some((z, iv)) = row.iter().find(|(_, iv)| !iv.is_point()) {
            return Err(Error::Unsupported(format!(
                "interval observation {iv} for state {s}, observation {z}"
            )));
        }
        let sum: f64 = row.iter().map(|(_, iv)| iv.lower).sum();
        if (sum - 1.0).abs() > crate::model::ROW_SUM_TOL {
            return Err(Error::InvalidParams(format!(
                "observation row of state {s} sums to {sum}"
            )));
        }
        let mut ids = Vec::new();
        for &(z, iv) in row {
            if z >= model.num_observations() {
                return Err(Error::InvalidParams(format!(
                    "observation {z} out of range"
                )));
            }
            if iv.lower > 0.0 {
                ids.push((copies.len(), iv.lower));
                copies.push(Some((s, z)));
            }
        }
        split.push(ids);
    }
    let fresh_initial = split[model.initial()].len() > 1;
    let num_obs = model.num_observations() + usize::from(fresh_initial);
    let mut observation: Vec<usize> = copies.iter().map(|c| c.expect("copy").1).collect();
    let mut choices = Vec::with_capacity(copies.len() + 1);
    let mut goals = Vec::new();
    for (id, c) in copies.iter().enumerate() {
        let (s, _) = c.expect("copy");
        if model.is_goal(s) {
            goals.push(id);
            let a = model.choices(s)[0].action;
            choices.push(vec![Choice::new(a, 0.0, vec![(id, Interval::ONE)])]);
            continue;
        }
        let row = model
            .choices(s)
            .iter()
            .map(|c| {
                let succ = c
                    .successors
                    .iter()
                    .flat_map(|&(t, iv)| split[t].iter().map(move |&(tc, q)| (tc, iv.scale(q))))
                    .collect();
                Choice::new(c.action, c.reward, succ)
            })
            .collect();
        choices.push(row);
    }
    let initial = if fresh_initial {
        let id = copies.len();
        copies.push(None);
        observation.push(num_obs - 1);
        let succ = split[model.initial()]
            .iter()
            .map(|&(tc, q)| (tc, Interval::point(q)))
            .collect();
        choices.push(vec![Choice::new(0, 0.0, succ)]);
        id
    } else {
        split[model.initial()][0].0
    };
    let out = UPomdp::from_parts(
        model.num_actions(),
        num_obs,
        initial,
        &goals,
        observation,
        choices,
    )?;
    ensure_valid(&out)?;
    Ok(Determinized { model: out, copies })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> UPomdp {
        UPomdp::from_parts(
            1,
            3,
            0,
            &[2],
            vec![0, 1, 2],
            vec![
                vec![Choice::new(
                    0,
                    1.0,
                    vec![(1, Interval::new(0.4, 0.8)), (2, Interval::new(0.2, 0.6))],
                )],
                vec![Choice::new(0, 3.0, vec![(2, Interval::ONE)])],
                vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_rows_are_identity() {
        let m = chain();
        let rows: Vec<_> = (0..3).map(|s| vec![(s, Interval::ONE)]).collect();
        let d = determinize_observations(&m, &rows).unwrap();
        assert_eq!(d.model, m);
    }

    #[test]
    fn split_scales_incoming_mass() {
        let m = chain();
        let rows = vec![
            vec![(0, Interval::ONE)],
            vec![
                (1, Interval::point(0.5)),
                (2, Interval::point(0.5)),
                (0, Interval::ZERO),
            ],
            vec![(2, Interval::ONE)],
        ];
        let d = determinize_observations(&m, &rows).unwrap();
        assert_eq!(d.model.num_states(), 4);
        assert_eq!(
            d.copies,
            vec![Some((0, 0)), Some((1, 1)), Some((1, 2)), Some((2, 2))]
        );
        let succ = &d.model.choices(0)[0].successors;
        assert_eq!(succ[0], (1, Interval::new(0.2, 0.4)));
        assert_eq!(succ[1], (2, Interval::new(0.2, 0.4)));
    }

    #[test]
    fn interval_observations_are_unsupported() {
        let m = chain();
        let rows = vec![
            vec![(0, Interval::new(0.4, 0.6)), (1, Interval::new(0.4, 0.6))],
            vec![(1, Interval::ONE)],
            vec![(2, Interval::ONE)],
        ];
        assert!(matches!(
            determinize_observations(&m, &rows),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn split_initial_gets_fresh_state() {
        let m = chain();
        let rows = vec![
            vec![(0, Interval::point(0.25)), (1, Interval::point(0.75))],
            vec![(1, Interval::ONE)],
            vec![(2, Interval::ONE)],
        ];
        let d = determinize_observations(&m, &rows).unwrap();
        assert_eq!(d.model.initial(), 4);
        assert_eq!(d.model.num_observations(), 4);
        assert_eq!(d.copies[4], None);
    }
}
