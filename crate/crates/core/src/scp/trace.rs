use std::fmt::Write;

use crate::lp::LpStatus;

pub const TRACE_HEADER: &str = "iter,time_s,beta,delta,accepted,lp_obj,penalty_sum,lp_status";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpRecord {
    pub objective: f64,
    pub penalty_sum: f64,
    pub status: LpStatus,
}

/// One verification, the trust-region decision it led to, and the LP solved
/// afterwards (if any).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub time_s: f64,
    pub beta: f64,
    /// Trust region the LP of this row was solved with, or the final one.
    pub delta: f64,
    pub accepted: bool,
    pub lp: Option<LpRecord>,
}

impl TraceRow {
    pub fn new(iter: usize, time_s: f64, beta: f64, delta: f64, accepted: bool) -> Self {
        Self {
            iter,
            time_s,
            beta,
            delta,
            accepted,
            lp: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScpTrace {
    pub rows: Vec<TraceRow>,
}

impl ScpTrace {
    /// CSV with [`TRACE_HEADER`]; LP columns are empty when no LP ran.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},",
                r.iter,
                r.time_s,
                r.beta,
                r.delta,
                u8::from(r.accepted)
            );
            match &r.lp {
                Some(lp) => {
                    let _ = writeln!(out, "{},{},{}", lp.objective, lp.penalty_sum, lp.status);
                }
                None => out.push_str(",,\n"),
            }
        }
        out
    }
}
