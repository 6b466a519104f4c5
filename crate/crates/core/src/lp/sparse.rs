use highs::{HighsModelStatus, RowProblem, Sense as HighsSense};

use super::{Cmp, LinearProgram, LpBackend, LpSolution, LpStatus, Sense};

/// Sparse dual/primal simplex, backed by HiGHS.
#[derive(Clone, Copy, Debug, Default)]
pub struct SparseBackend;

const NAME: &str = "sparse";

impl LpBackend for SparseBackend {
    fn name(&self) -> &'static str {
        NAME
    }

    fn solve(&self, lp: &LinearProgram) -> LpSolution {
        let mut p = RowProblem::default();
        let cols: Vec<_> = lp
            .vars()
            .iter()
            .zip(lp.objective())
            .map(|(v, &c)| p.add_column(c, v.lower..=v.upper))
            .collect();
        for row in lp.rows() {
            let terms: Vec<_> = row.terms.iter().map(|&(v, c)| (cols[v.0], c)).collect();
            match row.cmp {
                Cmp::Le => p.add_row(..=row.rhs, &terms),
                Cmp::Eq => p.add_row(row.rhs..=row.rhs, &terms),
                Cmp::Ge => p.add_row(row.rhs.., &terms),
            }
        }
        let sense = match lp.sense() {
            Sense::Maximize => HighsSense::Maximise,
            Sense::Minimize => HighsSense::Minimise,
        };
        let mut model = p.optimise(sense);
        model.make_quiet();
        // single-threaded simplex keeps results reproducible
        model.set_option("threads", 1);
        model.set_option("solver", "simplex");
        model.set_option("random_seed", 0);
        let solved = match model.try_solve() {
            Ok(s) => s,
            Err(e) => {
                return LpSolution::failed(
                    LpStatus::NumericalFailure,
                    NAME,
                    0,
                    Some(format!("{e:?}")),
                )
            }
        };
        let iterations = solved.simplex_iteration_count().max(0) as usize;
        match solved.status() {
            HighsModelStatus::Optimal => LpSolution::checked(
                lp,
                solved.get_solution().columns().to_vec(),
                NAME,
                iterations,
            ),
            HighsModelStatus::ModelEmpty if lp.num_vars() == 0 => {
                LpSolution::checked(lp, Vec::new(), NAME, 0)
            }
            HighsModelStatus::Infeasible => {
                LpSolution::failed(LpStatus::Infeasible, NAME, iterations, None)
            }
            HighsModelStatus::Unbounded => {
                LpSolution::failed(LpStatus::Unbounded, NAME, iterations, None)
            }
            HighsModelStatus::UnboundedOrInfeasible => {
                // the dense backend's phase 1 settles which one it is
                let dense = super::dense::DenseBackend.solve(lp);
                match dense.status {
                    LpStatus::Infeasible | LpStatus::Unbounded => {
                        LpSolution::failed(dense.status, NAME, iterations, None)
                    }
                    _ => LpSolution::failed(
                        LpStatus::Infeasible,
                        NAME,
                        iterations,
                        Some("unbounded or infeasible".into()),
                    ),
                }
            }
            other => LpSolution::failed(
                LpStatus::NumericalFailure,
                NAME,
                iterations,
                Some(format!("{other:?}")),
            ),
        }
    }
}
