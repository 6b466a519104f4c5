use std::fmt::Write;

use super::{LinearProgram, Sense};

fn term(out: &mut String, first: bool, c: f64, name: &str) {
    if first {
        let _ = write!(out, " {c} {name}");
    } else if c < 0.0 {
        let _ = write!(out, " - {} {name}", -c);
    } else {
        let _ = write!(out, " + {c} {name}");
    }
}

pub(super) fn write_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense() {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for (v, &c) in lp.vars().iter().zip(lp.objective()) {
        if c != 0.0 {
            term(&mut out, first, c, &v.name);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for row in lp.rows() {
        let _ = write!(out, " {}:", row.name);
        for (k, &(v, c)) in row.terms.iter().enumerate() {
            term(&mut out, k == 0, c, &lp.var(v).name);
        }
        if row.terms.is_empty() {
            out.push_str(" 0");
        }
        let _ = writeln!(out, " {} {}", row.cmp.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for v in lp.vars() {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {} free", v.name);
            }
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {} = {}", v.name, v.lower);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", v.name, v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", v.name, v.upper);
            }
        }
    }
    out.push_str("End\n");
    out
}
