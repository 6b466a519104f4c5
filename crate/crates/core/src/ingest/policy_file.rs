//! Policy text format.
//!
//! ```text
//! memory <k>
//! policy <z> <a>:<p> [<a>:<p> ...]
//! ```
//!
//! A finite-memory controller is stored as the memoryless policy of its
//! memory product, with `k` in the header. `k = 1` is a plain policy.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::model::Policy;

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyFile {
    pub memory: usize,
    pub policy: Policy,
}

pub fn write_policy(memory: usize, policy: &Policy) -> String {
    let mut out = format!("memory {memory}\n");
    for (z, dist) in policy.iter() {
        let _ = write!(out, "policy {z}");
        for &(a, p) in dist {
            let _ = write!(out, " {a}:{p}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_policy(text: &str) -> Result<PolicyFile> {
    let mut memory = None;
    let mut dists: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = tokens(content);
        let Some((col, head)) = tokens.next() else {
            continue;
        };
        match (head, memory) {
            ("memory", None) => {
                let (c, t) = tokens
                    .next()
                    .ok_or_else(|| ParseError::new(line, col + 6, "expected memory size"))?;
                let k: usize = t.parse().ok().filter(|&k| k > 0).ok_or_else(|| {
                    ParseError::new(line, c, format!("expected a positive integer, found `{t}`"))
                })?;
                if let Some((c, t)) = tokens.next() {
                    return Err(ParseError::new(line, c, format!("unexpected token `{t}`")).into());
                }
                memory = Some(k);
            }
            ("policy", Some(_)) => {
                let (c, t) = tokens
                    .next()
                    .ok_or_else(|| ParseError::new(line, col + 6, "expected observation"))?;
                let z: usize = t.parse().map_err(|_| {
                    ParseError::new(line, c, format!("expected an observation id, found `{t}`"))
                })?;
                let mut dist = Vec::new();
                for (c, t) in tokens {
                    let entry = t.split_once(':').and_then(|(a, p)| {
                        Some((a.parse::<usize>().ok()?, p.parse::<f64>().ok()?))
                    });
                    match entry {
                        Some((a, p)) if p.is_finite() => dist.push((a, p)),
                        _ => {
                            return Err(ParseError::new(
                                line,
                                c,
                                format!("expected `<action>:<probability>`, found `{t}`"),
                            )
                            .into())
                        }
                    }
                }
                if dist.is_empty() {
                    return Err(ParseError::new(
                        line,
                        raw.len() + 1,
                        "expected at least one action",
                    )
                    .into());
                }
                if dists.insert(z, dist).is_some() {
                    return Err(ParseError::new(
                        line,
                        c,
                        format!("duplicate policy for observation {z}"),
                    )
                    .into());
                }
            }
            ("memory", Some(_)) => {
                return Err(ParseError::new(line, col, "duplicate `memory` header").into())
            }
            (_, None) => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("expected `memory`, found `{head}`"),
                )
                .into())
            }
            (other, Some(_)) => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("expected `policy`, found `{other}`"),
                )
                .into())
            }
        }
    }
    let memory = memory.ok_or_else(|| {
        Error::from(ParseError::new(
            text.lines().count() + 1,
            1,
            "expected `memory`",
        ))
    })?;
    Ok(PolicyFile {
        memory,
        policy: Policy::new(dists)?,
    })
}

fn tokens(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content.split_whitespace().map(move |t| {
        (
            content[..t.as_ptr() as usize - content.as_ptr() as usize]
                .chars()
                .count()
                + 1,
            t,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let third = 1.0 / 3.0;
        let mut d = BTreeMap::new();
        d.insert(0, vec![(0, third), (2, 1.0 - third)]);
        d.insert(4, vec![(1, 1.0)]);
        let p = Policy::new(d).unwrap();
        let text = write_policy(2, &p);
        assert_eq!(
            text,
            format!(
                "memory 2\npolicy 0 0:{third} 2:{}\npolicy 4 1:1\n",
                1.0 - third
            )
        );
        let back = parse_policy(&text).unwrap();
        assert_eq!(back.memory, 2);
        assert_eq!(back.policy, p);
        assert_eq!(write_policy(back.memory, &back.policy), text);
    }

    #[test]
    fn errors_carry_coordinates() {
        let e = |t: &str| match parse_policy(t) {
            Err(Error::Parse(e)) => (e.line, e.column),
            other => panic!("{other:?}"),
        };
        assert_eq!(e("policy 0 0:1\n"), (1, 1));
        assert_eq!(e("memory 1\npolicy 0 0-1\n"), (2, 10));
        assert_eq!(e("memory 0\n"), (1, 8));
        assert_eq!(e("memory 1\npolicy 0 0:1\npolicy 0 1:1\n"), (3, 8));
    }

    #[test]
    fn unnormalized_rows_are_rejected() {
        assert!(matches!(
            parse_policy("memory 1\npolicy 0 0:0.5 1:0.4\n"),
            Err(Error::InvalidPolicy { observation: 0, .. })
        ));
    }
}
