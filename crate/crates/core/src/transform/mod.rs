//! Model reductions and the policy maps between reduced and source models.

mod determinize;
mod product;
mod simple;

pub use determinize::{determinize_observations, Determinized};
pub use product::{memory_product, Fsc, MemoryProduct};
pub use simple::{to_simple, NodeKind, Origin, SimpleForm, ACT, LEFT, RIGHT};
