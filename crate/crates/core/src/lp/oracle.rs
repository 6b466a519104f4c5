use nalgebra::{DMatrix, DVector};

use super::{LinearProgram, Sense};

/// Relative feasibility slack when accepting a candidate vertex.
const VERTEX_TOL: f64 = 1e-9;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Optimum of a small LP by enumerating every basic solution: each choice of
/// `k` tight rows and `n - k` variables held at a bound, solved exactly for
/// the remaining `k` variables and kept if feasible. Equalities are enforced
/// by the feasibility check rather than forced into the tight set, so empty
/// or linearly dependent equality rows still leave their vertices reachable.
/// `None` when no vertex is feasible.
///
/// Every variable must have finite bounds, so the feasible set is a polytope
/// and an optimum (if any) sits at a vertex. Cost grows combinatorially;
/// intended for programs of about ten variables and rows.
pub fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    assert!(
        lp.vars()
            .iter()
            .all(|v| v.lower.is_finite() && v.upper.is_finite()),
        "vertex enumeration needs finite bounds"
    );
    let n = lp.num_vars();
    let rows = lp.rows();
    let m = rows.len();
    let dense: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut d = vec![0.0; n];
            for &(v, c) in &r.terms {
                d[v.0] = c;
            }
            d
        })
        .collect();
    let feasible = |x: &[f64]| {
        lp.vars().iter().zip(x).all(|(v, &xi)| {
            let tol = VERTEX_TOL * (1.0 + xi.abs());
            xi >= v.lower - tol && xi <= v.upper + tol
        }) && rows
            .iter()
            .all(|r| r.violation(x) <= VERTEX_TOL * (1.0 + r.rhs.abs()))
    };
    let better = |a: f64, b: f64| match lp.sense() {
        Sense::Maximize => a > b,
        Sense::Minimize => a < b,
    };

    let mut best: Option<f64> = None;
    let mut x = vec![0.0; n];
    for k in 0..=m.min(n) {
        for tight in &combinations(m, k) {
            for free in combinations(n, k) {
                let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
                let lu = DMatrix::from_fn(k, k, |i, j| dense[tight[i]][free[j]]).lu();
                if k > 0 && !lu.is_invertible() {
                    continue;
                }
                for mask in 0u64..(1u64 << fixed.len()) {
                    let mut duplicate = false;
                    for (b, &j) in fixed.iter().enumerate() {
                        let v = &lp.vars()[j];
                        let at_upper = mask >> b & 1 == 1;
                        // a fixed variable contributes one point, not two
                        duplicate |= at_upper && v.lower == v.upper;
                        x[j] = if at_upper { v.upper } else { v.lower };
                    }
                    if duplicate {
                        continue;
                    }
                    if k > 0 {
                        let rhs = DVector::from_fn(k, |i, _| {
                            let r = tight[i];
                            rows[r].rhs - fixed.iter().map(|&j| dense[r][j] * x[j]).sum::<f64>()
                        });
                        let Some(sol) = lu.solve(&rhs) else { continue };
                        for (i, &j) in free.iter().enumerate() {
                            x[j] = sol[i];
                        }
                    }
                    if feasible(&x) {
                        let obj = lp.objective_value(&x);
                        if best.map_or(true, |b| better(obj, b)) {
                            best = Some(obj);
                        }
                    }
                }
            }
        }
    }
    best
}
