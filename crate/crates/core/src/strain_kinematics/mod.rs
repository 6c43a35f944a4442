//! Membrane and bending strains of the wrinkled shell, their decomposition
//! into `eps`-orders and the two-scale limit strains.

mod audit;
mod ops;
mod rows;

pub use audit::{default_battery, residual_bound_audit, BoundAudit, BOUND_SPREAD_TOL};
pub use ops::*;
pub use rows::*;
