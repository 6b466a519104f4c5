//! Model text format and benchmark generators.

mod aircraft;
mod policy_file;
mod random;
mod spacecraft;
mod upm;

pub use aircraft::{gen_aircraft, AircraftParams};
pub use policy_file::{parse_policy, write_policy, PolicyFile};
pub use random::{gen_random, random_policy, RandomParams};
pub use spacecraft::{gen_spacecraft, SpacecraftParams};
pub use upm::{parse_model, write_model};
