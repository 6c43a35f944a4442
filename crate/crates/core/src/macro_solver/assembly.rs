use nalgebra::{DMatrix, DVector, Matrix4, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, relative_residual};
use crate::quadrature::Rule2d;
use crate::strain_kinematics::StrainRows;
use crate::surface_geometry::check_lame;

use super::space::{AxisTable, BasisEntry, DisplacementField, MacroSpace};

pub type Local12 = SMatrix<f64, 12, 12>;

/// Material and thickness data of the shell; `thickness` is the half-thickness `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellParams {
    pub lambda: f64,
    pub mu: f64,
    pub thickness: f64,
}

impl Default for ShellParams {
    fn default() -> Self {
        ShellParams { lambda: 1.0, mu: 1.0, thickness: 0.05 }
    }
}

impl ShellParams {
    pub fn validate(&self) -> Result<()> {
        check_lame(self.lambda, self.mu)?;
        if !(self.thickness > 0.0) {
            return Err(Error::InvalidConfig(format!("thickness must be positive, got {}", self.thickness)));
        }
        Ok(())
    }

    pub fn bending_factor(&self) -> f64 {
        self.thickness.powi(3) / 3.0
    }
}

/// Galerkin matrix and load vector on a macro space.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroSystem {
    pub space: MacroSpace,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// A solved macro system with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroSolution {
    pub field: DisplacementField,
    /// `|K u - F| / |F|`.
    pub residual: f64,
    /// `B(u, u)`.
    pub energy: f64,
    /// `L(u)`.
    pub work: f64,
}

pub const SOLVE_TOL: f64 = 1e-10;

pub(crate) fn rows_matrix(r: &StrainRows) -> SMatrix<f64, 4, 12> {
    SMatrix::<f64, 4, 12>::from_fn(|i, k| r[i / 2][i % 2][k])
}

/// `w (d R_m^T C R_m + d^3/3 R_b^T C R_b)`.
pub(crate) fn koiter_local(
    membrane: &StrainRows,
    bending: &StrainRows,
    c: &Matrix4<f64>,
    params: &ShellParams,
    w: f64,
) -> Local12 {
    let rm = rows_matrix(membrane);
    let rb = rows_matrix(bending);
    (rm.transpose() * (c * rm)) * (w * params.thickness) + (rb.transpose() * (c * rb)) * (w * params.bending_factor())
}

/// Assembles `K_ab = sum_pts phi_a^T L phi_b` and `F_a = sum_pts f . phi_a`
/// where `local` returns the weighted local matrix and the weighted load on
/// the displacement values at every node.
pub(crate) fn assemble_macro(
    space: &MacroSpace,
    rule: &Rule2d,
    mut local: impl FnMut([f64; 2], f64) -> Result<(Local12, [f64; 3])>,
) -> Result<MacroSystem> {
    let n = space.ndof();
    let t1 = AxisTable::new(space, 0, &rule.x1.nodes);
    let t2 = AxisTable::new(space, 1, &rule.x2.nodes);
    let mut entries = vec![BasisEntry::default(); n];
    let mut k = vec![0.0; n * n];
    let mut f = vec![0.0; n];
    let mut lphi = vec![[0.0; 12]; n];
    for (i, (&x1, &w1)) in rule.x1.nodes.iter().zip(&rule.x1.weights).enumerate() {
        for (j, (&x2, &w2)) in rule.x2.nodes.iter().zip(&rule.x2.weights).enumerate() {
            let (l, load) = local([x1, x2], w1 * w2)?;
            space.entries_at_node(&t1, &t2, i, j, &mut entries);
            for (e, out) in entries.iter().zip(lphi.iter_mut()) {
                *out = [0.0; 12];
                for s in 0..e.len {
                    let col = l.column(e.idx[s]);
                    let v = e.val[s];
                    for r in 0..12 {
                        out[r] += col[r] * v;
                    }
                }
            }
            for (a, ea) in entries.iter().enumerate() {
                let row = &mut k[a * n..(a + 1) * n];
                for b in a..n {
                    let lb = &lphi[b];
                    let mut s = 0.0;
                    for q in 0..ea.len {
                        s += ea.val[q] * lb[ea.idx[q]];
                    }
                    row[b] += s;
                }
                if ea.idx[0] < 3 {
                    f[a] += load[ea.idx[0]] * ea.val[0];
                }
            }
        }
    }
    let mut matrix = DMatrix::from_row_slice(n, n, &k);
    for a in 0..n {
        for b in 0..a {
            matrix[(a, b)] = matrix[(b, a)];
        }
    }
    Ok(MacroSystem { space: *space, matrix, rhs: DVector::from_vec(f) })
}

impl MacroSystem {
    /// Cholesky solve with one step of iterative refinement.
    pub fn solve(&self) -> Result<MacroSolution> {
        let chol = cholesky(&self.matrix, "macro_solver")?;
        let mut u = chol.solve(&self.rhs);
        let r = &self.rhs - &self.matrix * &u;
        u += chol.solve(&r);
        let residual = relative_residual(&self.matrix, &u, &self.rhs);
        if residual > SOLVE_TOL {
            return Err(Error::SingularSystem(format!("macro residual {residual:.3e} above {SOLVE_TOL:.0e}")));
        }
        let energy = u.dot(&(&self.matrix * &u));
        let work = u.dot(&self.rhs);
        Ok(MacroSolution { field: DisplacementField { space: self.space, coeffs: u }, residual, energy, work })
    }

    /// `max_a |K u - F|_a / |F|`, the residual functional on every basis test function.
    pub fn galerkin_defect(&self, u: &DVector<f64>) -> f64 {
        let r = &self.matrix * u - &self.rhs;
        r.amax() / self.rhs.norm().max(f64::MIN_POSITIVE)
    }
}
