//! Contact and conformal calculus on the first Heisenberg group.

pub mod cli;
pub mod error;
pub mod exact;
pub mod expr;
pub mod fields;
pub mod group;
pub mod harmonic;
pub mod horizontal;
pub mod jet;
pub mod map;
pub mod schwarzian;
pub mod suites;

pub use error::{Error, Result};

/// Default relative tolerance for numeric identity checks.
pub const TAU_REL: f64 = 1e-8;
/// Default absolute tolerance floor.
pub const TAU_ABS: f64 = 1e-10;
