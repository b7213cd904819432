//! Continued fractions, thin semigroups of continuant matrices, indefinite
//! quadratic forms and the sieve experiments around square-free traces.

pub mod arith;
pub mod cf;
pub mod dimension;
pub mod error;
pub mod forms;
pub mod geodesic;
pub mod modular;
pub mod semigroup;
pub mod sieve;

pub use cf::{QuadraticIrrational, UnimodularMatrix, Word};
pub use error::{Error, Result};
pub use forms::{FormCycle, IndefiniteForm};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
