//! Exact geometry of the wrinkled chart and the audit of its small-`eps`
//! expansions.

mod check;
mod exact;
mod expansion;

pub use check::{geometry_check, GeometryCheck, GEOMETRY_TOL};
pub use exact::{eval_exact_eps, eval_exact_eps_at, EpsGeometryAtPoint};
pub use expansion::{
    audit_printed_displays, eval_expansion_terms, expansion_residuals, reports_to_csv,
    run_expansion_suite, verify_expansion_order, DisplayCheck, ExpansionProtocol,
    ExpansionQuantity, ExpansionReport, ExpansionTerms, EXACTNESS_FLOOR, SLOPE_TOL,
};
