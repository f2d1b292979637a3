pub mod analytic;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod map;
pub mod partition;
pub mod rational;
pub mod sampling;
pub mod schedule;
pub mod shear;
pub mod stage;
pub mod step;
pub mod torus;
pub mod type_a;
pub mod type_b;

pub use error::{Error, Result};
