pub mod error;
pub mod geometry;
pub mod harness;
pub mod objectives;
pub mod oracle;
pub mod rules;
pub mod solvers;
pub mod vector;

pub use error::{Error, Result};
pub use geometry::{local_lmo, ConstraintSet, LocalBall};
pub use vector::Vector;
