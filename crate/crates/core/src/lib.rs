//! Robust finite-memory policies for uncertain POMDPs.
//!
//! An uncertain POMDP ([`UPomdp`]) carries interval transition probabilities.
//! The solver looks for an observation-based finite-state controller whose
//! expected reward meets a threshold under *every* admissible instantiation:
//!
//! 1. [`transform::memory_product`] folds `k` memory states into the model,
//! 2. [`transform::to_simple`] splits it into action- and uncertainty-states,
//! 3. [`dualize`] replaces each for-all-distributions constraint by finitely
//!    many linear constraints in dual multipliers,
//! 4. [`scp`] linearizes the remaining bilinear terms and iterates LPs with a
//!    trust region, accepting a step only after exact robust verification
//!    ([`robustcheck`]).
//!
//! [`ingest`] reads and writes the `upm` text format and generates the
//! spacecraft and aircraft benchmark families.

pub mod dualize;
pub mod error;
pub mod ingest;
pub mod lp;
pub mod model;
pub mod robustcheck;
pub mod scp;
pub mod transform;

pub use error::{Error, ParseError, Result};
pub use model::{
    induce_imc, instantiate, nominal, validate, Choice, Interval, IntervalMC, Objective, Policy,
    SpecThreshold, UPomdp, Violation, ViolationKind,
};
pub use robustcheck::{robust_value_iteration, Extremum, RobustResult, ViOptions};
pub use scp::{scp_solve, ScpConfig, ScpOutcome, ScpStatus, ScpTrace};
pub use transform::{memory_product, to_simple, Fsc, MemoryProduct, SimpleForm};
