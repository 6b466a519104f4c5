//! The `upm` text format.
//!
//! ```text
//! upomdp
//! states <N>
//! actions <M>
//! observations <K>
//! initial <s>
//! goal <s> [<s> ...]
//! obs <s> <z>                      # exactly one per state
//! avail <s> <a> [<a> ...]          # omitted: all M actions
//! reward <s> <a> <r>               # omitted: 0
//! trans <s> <a> <s'> <lo> <hi>
//! ```
//!
//! Header directives appear once, in this order. Body directives may repeat
//! but their kinds must not go backwards. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{ParseError, Result};
use crate::model::{ensure_valid, Choice, Interval, UPomdp};

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<UPomdp> {
    let raw = Parser::default().run(text)?;
    let model = raw.build()?;
    ensure_valid(&model)?;
    Ok(model)
}

/// Canonical text of a valid model, sorted by state, action and successor.
/// Numbers use the shortest decimal that
/// parses back to the identical `f64`.
pub fn write_model(model: &UPomdp) -> Result<String> {
    ensure_valid(model)?;
    let n = model.num_states();
    let all: Vec<usize> = (0..model.num_actions()).collect();
    let mut out = String::new();
    out.push_str("upomdp\n");
    let _ = writeln!(out, "states {n}");
    let _ = writeln!(out, "actions {}", model.num_actions());
    let _ = writeln!(out, "observations {}", model.num_observations());
    let _ = writeln!(out, "initial {}", model.initial());
    out.push_str("goal");
    for g in model.goal_states() {
        let _ = write!(out, " {g}");
    }
    out.push('\n');
    for s in 0..n {
        let _ = writeln!(out, "obs {s} {}", model.observation(s));
    }
    for s in 0..n {
        let acts: Vec<usize> = model.actions(s).collect();
        if acts != all {
            let _ = write!(out, "avail {s}");
            for a in acts {
                let _ = write!(out, " {a}");
            }
            out.push('\n');
        }
    }
    let sorted = |s: usize| {
        let mut cs: Vec<_> = model.choices(s).iter().collect();
        cs.sort_by_key(|c| c.action);
        cs
    };
    for s in 0..n {
        for c in sorted(s) {
            if c.reward != 0.0 {
                let _ = writeln!(out, "reward {s} {} {}", c.action, c.reward);
            }
        }
    }
    for s in 0..n {
        for c in sorted(s) {
            for &(t, iv) in &c.successors {
                let _ = writeln!(out, "trans {s} {} {t} {} {}", c.action, iv.lower, iv.upper);
            }
        }
    }
    Ok(out)
}

const HEADER: [&str; 6] = [
    "upomdp",
    "states",
    "actions",
    "observations",
    "initial",
    "goal",
];
const BODY: [&str; 4] = ["obs", "avail", "reward", "trans"];

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn split(number: usize, raw: &'a str) -> Self {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in content
            .char_indices()
            .chain(std::iter::once((content.len(), ' ')))
        {
            match (ch.is_whitespace(), start) {
                (true, Some(b)) => {
                    tokens.push(Token {
                        text: &content[b..i],
                        column: content[..b].chars().count() + 1,
                    });
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        Self { number, tokens }
    }

    fn err(&self, column: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.number, column, msg)
    }

    fn end_column(&self) -> usize {
        self.tokens
            .last()
            .map_or(1, |t| t.column + t.text.chars().count())
    }

    fn arity(&self, min: usize, max: Option<usize>) -> std::result::Result<(), ParseError> {
        let got = self.tokens.len() - 1;
        if got < min {
            return Err(self.err(
                self.end_column(),
                format!(
                    "expected {} argument(s) after `{}`",
                    min, self.tokens[0].text
                ),
            ));
        }
        if let Some(max) = max {
            if got > max {
                let extra = &self.tokens[max + 1];
                return Err(self.err(extra.column, format!("unexpected token `{}`", extra.text)));
            }
        }
        Ok(())
    }

    fn index(
        &self,
        i: usize,
        bound: Option<(usize, &str)>,
    ) -> std::result::Result<usize, ParseError> {
        let t = &self.tokens[i];
        let v: usize = t.text.parse().map_err(|_| {
            self.err(
                t.column,
                format!("expected a nonnegative integer, found `{}`", t.text),
            )
        })?;
        if let Some((n, what)) = bound {
            if v >= n {
                return Err(self.err(t.column, format!("{what} {v} out of range (0..{n})")));
            }
        }
        Ok(v)
    }

    fn number(&self, i: usize) -> std::result::Result<f64, ParseError> {
        let t = &self.tokens[i];
        let ok = t
            .text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        match t.text.parse::<f64>() {
            Ok(v) if ok && v.is_finite() => Ok(v),
            _ => Err(self.err(
                t.column,
                format!("expected a decimal number, found `{}`", t.text),
            )),
        }
    }
}

#[derive(Default)]
struct Parser {
    header: Vec<usize>,
    phase: usize,
    obs: Vec<Option<usize>>,
    avail: BTreeMap<usize, Vec<usize>>,
    reward: BTreeMap<(usize, usize), (usize, f64)>,
    trans: BTreeMap<(usize, usize), Vec<(usize, Interval)>>,
    trans_line: BTreeMap<(usize, usize, usize), usize>,
    goal: Vec<usize>,
    last_line: usize,
}

struct RawModel {
    actions: usize,
    observations: usize,
    initial: usize,
    goal: Vec<usize>,
    obs: Vec<usize>,
    choices: Vec<Vec<Choice>>,
}

impl RawModel {
    fn build(self) -> Result<UPomdp> {
        UPomdp::from_parts(
            self.actions,
            self.observations,
            self.initial,
            &self.goal,
            self.obs,
            self.choices,
        )
    }
}

impl Parser {
    fn run(mut self, text: &str) -> std::result::Result<RawModel, ParseError> {
        for (i, raw) in text.lines().enumerate() {
            self.last_line = i + 1;
            let line = Line::split(i + 1, raw);
            if line.tokens.is_empty() {
                continue;
            }
            self.directive(&line)?;
        }
        let eof = self.last_line + 1;
        if self.header.len() < HEADER.len() {
            return Err(ParseError::new(
                eof,
                1,
                format!("expected `{}`", HEADER[self.header.len()]),
            ));
        }
        let n = self.header[1];
        let mut obs = Vec::with_capacity(n);
        for (s, z) in self.obs.iter().enumerate() {
            obs.push(z.ok_or_else(|| {
                ParseError::new(eof, 1, format!("missing `obs` line for state {s}"))
            })?);
        }
        let m = self.header[2];
        let mut choices: Vec<Vec<Choice>> = Vec::with_capacity(n);
        for s in 0..n {
            let acts: Vec<usize> = self
                .avail
                .get(&s)
                .cloned()
                .unwrap_or_else(|| (0..m).collect());
            choices.push(
                acts.into_iter()
                    .map(|a| {
                        let r = self.reward.get(&(s, a)).map_or(0.0, |&(_, r)| r);
                        Choice::new(a, r, self.trans.remove(&(s, a)).unwrap_or_default())
                    })
                    .collect(),
            );
        }
        // rows and rewards must refer to available actions
        for (&(s, a), &(line, _)) in &self.reward {
            if !choices[s].iter().any(|c| c.action == a) {
                return Err(ParseError::new(
                    line,
                    1,
                    format!("reward for unavailable action {a} at state {s}"),
                ));
            }
        }
        if let Some((&(s, a), _)) = self.trans.iter().next() {
            let line = self
                .trans_line
                .range((s, a, 0)..=(s, a, usize::MAX))
                .next()
                .map_or(eof, |(_, &l)| l);
            return Err(ParseError::new(
                line,
                1,
                format!("transition for unavailable action {a} at state {s}"),
            ));
        }
        Ok(RawModel {
            actions: m,
            observations: self.header[3],
            initial: self.header[4],
            goal: self.goal,
            obs,
            choices,
        })
    }

    fn directive(&mut self, line: &Line) -> std::result::Result<(), ParseError> {
        let head = &line.tokens[0];
        if self.header.len() < HEADER.len() {
            let expected = HEADER[self.header.len()];
            if head.text != expected {
                return Err(line.err(
                    head.column,
                    format!("expected `{expected}`, found `{}`", head.text),
                ));
            }
            return self.header_directive(line);
        }
        let Some(kind) = BODY.iter().position(|&k| k == head.text) else {
            return Err(line.err(head.column, format!("unknown directive `{}`", head.text)));
        };
        if kind < self.phase {
            return Err(line.err(
                head.column,
                format!("`{}` must come before `{}`", head.text, BODY[self.phase]),
            ));
        }
        self.phase = kind;
        let n = self.header[1];
        let m = self.header[2];
        let s_bound = Some((n, "state"));
        let a_bound = Some((m, "action"));
        match kind {
            0 => {
                line.arity(2, Some(2))?;
                let s = line.index(1, s_bound)?;
                let z = line.index(2, Some((self.header[3], "observation")))?;
                if self.obs[s].replace(z).is_some() {
                    return Err(line.err(
                        line.tokens[1].column,
                        format!("duplicate `obs` for state {s}"),
                    ));
                }
            }
            1 => {
                line.arity(2, None)?;
                let s = line.index(1, s_bound)?;
                let mut acts = Vec::new();
                for i in 2..line.tokens.len() {
                    let a = line.index(i, a_bound)?;
                    if acts.contains(&a) {
                        return Err(
                            line.err(line.tokens[i].column, format!("action {a} listed twice"))
                        );
                    }
                    acts.push(a);
                }
                if self.avail.insert(s, acts).is_some() {
                    return Err(line.err(
                        line.tokens[1].column,
                        format!("duplicate `avail` for state {s}"),
                    ));
                }
            }
            2 => {
                line.arity(3, Some(3))?;
                let s = line.index(1, s_bound)?;
                let a = line.index(2, a_bound)?;
                let r = line.number(3)?;
                if self.reward.insert((s, a), (line.number, r)).is_some() {
                    return Err(line.err(
                        line.tokens[1].column,
                        format!("duplicate reward for state {s}, action {a}"),
                    ));
                }
            }
            _ => {
                line.arity(5, Some(5))?;
                let s = line.index(1, s_bound)?;
                let a = line.index(2, a_bound)?;
                let t = line.index(3, s_bound)?;
                let lo = line.number(4)?;
                let hi = line.number(5)?;
                if self.trans_line.insert((s, a, t), line.number).is_some() {
                    return Err(line.err(
                        line.tokens[1].column,
                        format!("duplicate transition ({s}, {a}, {t})"),
                    ));
                }
                self.trans
                    .entry((s, a))
                    .or_default()
                    .push((t, Interval::new(lo, hi)));
            }
        }
        Ok(())
    }

    fn header_directive(&mut self, line: &Line) -> std::result::Result<(), ParseError> {
        match self.header.len() {
            0 => {
                line.arity(0, Some(0))?;
                self.header.push(0);
            }
            1..=3 => {
                line.arity(1, Some(1))?;
                let v = line.index(1, None)?;
                if v == 0 {
                    return Err(line.err(line.tokens[1].column, "count must be positive"));
                }
                if self.header.len() == 1 {
                    self.obs = vec![None; v];
                }
                self.header.push(v);
            }
            4 => {
                line.arity(1, Some(1))?;
                let s = line.index(1, Some((self.header[1], "state")))?;
                self.header.push(s);
            }
            _ => {
                line.arity(1, None)?;
                for i in 1..line.tokens.len() {
                    let g = line.index(i, Some((self.header[1], "state")))?;
                    if self.goal.contains(&g) {
                        return Err(line.err(
                            line.tokens[i].column,
                            format!("goal state {g} listed twice"),
                        ));
                    }
                    self.goal.push(g);
                }
                self.header.push(0);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::ViolationKind;

    const MINIMAL: &str = "upomdp
states 2
actions 1
observations 2
initial 0
goal 1
obs 0 0
obs 1 1
reward 0 0 1
trans 0 0 1 1 1
trans 1 0 1 1 1
";

    fn parse_err(text: &str) -> ParseError {
        match parse_model(text) {
            Err(Error::Parse(e)) => e,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_model() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.num_states(), 2);
        assert!(m.is_goal(1));
        assert_eq!(m.choices(0)[0].reward, 1.0);
    }

    #[test]
    fn canonical_text_is_a_fixpoint() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(write_model(&m).unwrap(), MINIMAL);
    }

    #[test]
    fn interval_transition() {
        let text = MINIMAL.replace(
            "trans 0 0 1 1 1",
            "trans 0 0 1 0.5 0.95\ntrans 0 0 0 0.05 0.5",
        );
        let m = parse_model(&text).unwrap();
        let c = m.choice(0, 0).unwrap();
        assert_eq!(
            c.successors,
            vec![(0, Interval::new(0.05, 0.5)), (1, Interval::new(0.5, 0.95))]
        );
        let out = write_model(&m).unwrap();
        assert!(out.contains("trans 0 0 1 0.5 0.95\n"));
        assert_eq!(parse_model(&out).unwrap(), m);
    }

    #[test]
    fn literal_interval_emission() {
        let text = MINIMAL.replace(
            "trans 0 0 1 1 1",
            "trans 0 0 1 0.2 0.8\ntrans 0 0 0 0.2 0.8",
        );
        let out = write_model(&parse_model(&text).unwrap()).unwrap();
        assert!(out.contains(" 0.2 0.8\n"));
    }

    #[test]
    fn duplicate_transition_is_reported() {
        let text = MINIMAL.replace("trans 0 0 1 1 1", "trans 0 0 1 1 1\ntrans 0 0 1 1 1");
        let e = parse_err(&text);
        assert_eq!(e.line, 11);
        assert!(e.message.contains("duplicate transition"));
    }

    #[test]
    fn syntax_errors_carry_coordinates() {
        let e = parse_err(&MINIMAL.replace("trans 0 0 1 1 1", "trans 0 0 1 x 1"));
        assert_eq!((e.line, e.column), (10, 13));
        let e = parse_err(&MINIMAL.replace("initial 0", "initial 7"));
        assert_eq!((e.line, e.column), (5, 9));
        let e = parse_err(&MINIMAL.replace("states 2", "actions 1"));
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse_err(&MINIMAL.replace("obs 1 1\n", ""));
        assert!(e.message.contains("missing `obs`"));
        let e = parse_err(
            &MINIMAL
                .replace("reward 0 0 1\n", "")
                .replace("trans 1 0 1 1 1", "trans 1 0 1 1 1\nreward 0 0 1"),
        );
        assert!(e.message.contains("must come before"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!(
            "# header\n\n{}",
            MINIMAL.replace("goal 1", "goal 1   # absorbing")
        );
        assert_eq!(parse_model(&text).unwrap(), parse_model(MINIMAL).unwrap());
    }

    #[test]
    fn semantic_errors_come_from_validation() {
        let text = MINIMAL.replace("trans 0 0 1 1 1", "trans 0 0 1 0 0.3\ntrans 0 0 0 0.7 1");
        match parse_model(&text) {
            Err(Error::InvalidModel(v)) => {
                assert!(v.iter().any(|v| v.kind == ViolationKind::GraphPreservation))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn write_refuses_mismatched_action_sets() {
        let text = "upomdp
states 3
actions 2
observations 2
initial 0
goal 2
obs 0 0
obs 1 0
obs 2 1
avail 1 0
avail 2 0
trans 0 0 2 1 1
trans 0 1 2 1 1
trans 1 0 2 1 1
trans 2 0 2 1 1
";
        assert!(matches!(parse_model(text), Err(Error::InvalidModel(_))));
        let choices = vec![
            vec![
                Choice::new(0, 0.0, vec![(2, Interval::ONE)]),
                Choice::new(1, 0.0, vec![(2, Interval::ONE)]),
            ],
            vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
            vec![Choice::new(0, 0.0, vec![(2, Interval::ONE)])],
        ];
        let m = UPomdp::from_parts(2, 2, 0, &[2], vec![0, 0, 1], choices).unwrap();
        assert!(write_model(&m).is_err());
    }

    #[test]
    fn avail_lines_keep_their_order() {
        let text = "upomdp
states 2
actions 3
observations 2
initial 0
goal 1
obs 0 0
obs 1 1
avail 0 2 0
avail 1 1
trans 0 0 1 1 1
trans 0 2 1 1 1
trans 1 1 1 1 1
";
        let m = parse_model(text).unwrap();
        assert_eq!(m.actions(0).collect::<Vec<_>>(), vec![2, 0]);
        assert_eq!(write_model(&m).unwrap(), text);
    }
}
