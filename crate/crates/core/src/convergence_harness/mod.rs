//! Numerical two-scale pairings, the deflection-corrector identity and
//! eps-to-limit studies.

mod corrector;
mod pairing;
mod report;
mod study;

pub use corrector::{corrector_check, corrector_check_basis, deflection_corrector, shape_gradient_fields, CorrectorCheck, CORRECTOR_TOL};
pub use pairing::{
    benchmark_quadrature, l2_norm, limit_pairing, pair, pairing_rule, test_battery, two_scale_pairing, weak_pairing, TestFunction, TwoScaleTest,
    XFactor, YFactor,
};
pub use report::{monotone_within_band, ConvergenceReport, Flag, ReportRow, EXACT_FLOOR, MONOTONE_BAND};
pub use study::{eps_to_limit_study, LimitStudyConfig};
