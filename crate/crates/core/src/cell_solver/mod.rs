//! Periodic unit-cell problems solved by a trigonometric Galerkin method.

mod basis;
mod problem;

pub use basis::{CellBasis, CellEntry, PeriodicField, TrigBasis};
pub use problem::*;
