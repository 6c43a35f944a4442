//! Homogenized moderately wrinkled Koiter shells.
//!
//! The crate evaluates the exact geometry of a shell whose mid-surface
//! `psi(x) + eps^2 theta(x/eps) a_3(x)` carries periodic wrinkles, audits the
//! small-`eps` expansions of that geometry, solves the `eps`-dependent Koiter
//! problem together with its homogenized and two-scale limits by Ritz and
//! trigonometric Galerkin methods, and measures the convergence claims that
//! link them.

pub mod cell_solver;
pub mod cli;
pub mod convergence_harness;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod macro_solver;
pub mod quadrature;
pub mod strain_kinematics;
pub mod surface_geometry;
pub mod wrinkle_geometry;

pub use error::{Error, Result};
