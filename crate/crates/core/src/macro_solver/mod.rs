//! Ritz-Galerkin solvers for the wrinkled, classical and homogenized shell
//! problems, and the coupled two-scale system.

mod assembly;
mod classical;
mod coupled;
mod force;
mod output;
mod problems;
mod space;

pub use assembly::{MacroSolution, MacroSystem, ShellParams, SOLVE_TOL};
pub use classical::{assemble_classical_reference, classical_strains_vector_form, solve_classical_reference};
pub use coupled::{
    assemble_coupled, solve_coupled_two_scale, CorrectorField, CorrectorSpace, TwoScaleTriple,
    CORRECTOR_REGULARIZATION, COUPLED_SOLVE_TOL,
};
pub use force::ForceDensity;
pub use output::{grid_csv, solution_csv};
pub use problems::*;
pub use space::*;
