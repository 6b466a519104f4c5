//! Mapping sidecars written next to transformed models.
//!
//! Product mapping:
//!
//! ```text
//! mapping product
//! memory <k>
//! state <product state> <source state> <memory>
//! observation <product observation> <source observation> <memory>
//! action <product action> <source action> <next memory>
//! ```
//!
//! Simple mapping, one line per simple state:
//!
//! ```text
//! mapping simple
//! state <simple state> <source state> <tree node> action
//! state <simple state> <source state> <tree node> uncertainty <source action>
//! ```

use std::fmt::Write as _;

use robfsc::transform::NodeKind;
use robfsc::{MemoryProduct, SimpleForm, UPomdp};

pub fn product_mapping(source: &UPomdp, mp: &MemoryProduct) -> String {
    let k = mp.memory();
    let mut out = format!("mapping product\nmemory {k}\n");
    for p in 0..mp.product.num_states() {
        let (s, n) = mp.split_state(p);
        let _ = writeln!(out, "state {p} {s} {n}");
    }
    for q in 0..source.num_observations() * k {
        let (z, n) = mp.split_observation(q);
        let _ = writeln!(out, "observation {q} {z} {n}");
    }
    for b in 0..mp.product.num_actions() {
        let (a, n) = mp.split_action(b);
        let _ = writeln!(out, "action {b} {a} {n}");
    }
    out
}

pub fn simple_mapping(sf: &SimpleForm) -> String {
    let mut out = String::from("mapping simple\n");
    for s in 0..sf.simple.num_states() {
        let o = sf.origin(s);
        let _ = write!(out, "state {s} {} {}", o.source, o.node);
        match (sf.kind(s), o.action) {
            (NodeKind::Uncertainty, Some(a)) => {
                let _ = writeln!(out, " uncertainty {a}");
            }
            (NodeKind::Uncertainty, None) => out.push_str(" uncertainty\n"),
            (NodeKind::Action, _) => out.push_str(" action\n"),
        }
    }
    out
}
