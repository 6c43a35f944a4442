use nalgebra::{DMatrix, DVector, SMatrix};

use crate::cell_solver::{CellBasis, CellEntry, PeriodicField};
use crate::error::{Error, Result};
use crate::linalg::relative_residual;
use crate::quadrature::Rule1d;
use crate::strain_kinematics::{
    bending_rows, cell_bending_rows, e_y_rows, m_y_rows, membrane_rows, add_rows, CellData, StrainGeometry,
};
use crate::surface_geometry::{eval_geometry, ElasticityTensor, ShapeFunction, SurfaceChart};

use super::assembly::rows_matrix;
use super::force::ForceDensity;
use super::problems::ShellSetup;
use super::space::{combine, AxisTable, BasisEntry, DisplacementField};

/// Tikhonov weight on the corrector block, relative to the `H`-norm Gram
/// matrix tensored with the macro mass matrix.
pub const CORRECTOR_REGULARIZATION: f64 = 1e-12;
pub const COUPLED_SOLVE_TOL: f64 = 1e-8;

fn legendre_values(deg: usize, s: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(deg + 1);
    p.push(1.0);
    if deg >= 1 {
        p.push(s);
    }
    for n in 1..deg {
        let nf = n as f64;
        p.push(((2.0 * nf + 1.0) * s * p[n] - nf * p[n - 1]) / (nf + 1.0));
    }
    p
}

/// Correctors `(u1_1, u1_2, U)` as `sum_p sum_j c_pj L_p(x) phi_j(y)` with
/// tensor Legendre polynomials `L_p` on the domain and the cell basis `phi_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorField {
    pub lengths: [f64; 2],
    /// Legendre degree per direction.
    pub x_degree: usize,
    pub cell: CellBasis,
    /// Row `p` (macro function), column `j` (cell function).
    pub coeffs: DMatrix<f64>,
}

impl CorrectorField {
    pub fn n_macro(&self) -> usize {
        (self.x_degree + 1) * (self.x_degree + 1)
    }

    pub fn macro_values(&self, x: [f64; 2]) -> Vec<f64> {
        macro_values(self.x_degree, self.lengths, x)
    }

    /// Cell coefficients at the macro point `x`.
    pub fn cell_coeffs_at(&self, x: [f64; 2]) -> DVector<f64> {
        let l = DVector::from_vec(self.macro_values(x));
        self.coeffs.transpose() * l
    }

    /// `(u1_1, u1_2)` and `U` at `x` as periodic fields in `y`.
    pub fn fields_at(&self, x: [f64; 2]) -> ([PeriodicField; 2], PeriodicField) {
        let c = self.cell_coeffs_at(x);
        let nb = self.cell.block();
        let f = |k: usize| PeriodicField { basis: self.cell.trig.clone(), coeffs: c.rows(k * nb, nb).iter().copied().collect() };
        ([f(0), f(1)], f(2))
    }

    /// Cell data of the correctors at `(x, y)`.
    pub fn cell_data(&self, x: [f64; 2], y: [f64; 2]) -> CellData {
        let c = self.cell_coeffs_at(x);
        let mut entries = vec![CellEntry::default(); self.cell.ndof()];
        self.cell.entries_at(y, &mut entries);
        let mut d = [0.0; 9];
        for (e, v) in entries.iter().zip(c.iter()) {
            for s in 0..3 {
                d[e.idx[s]] += v * e.val[s];
            }
        }
        d
    }
}

fn macro_values(deg: usize, lengths: [f64; 2], x: [f64; 2]) -> Vec<f64> {
    let p1 = legendre_values(deg, 2.0 * x[0] / lengths[0] - 1.0);
    let p2 = legendre_values(deg, 2.0 * x[1] / lengths[1] - 1.0);
    let mut out = Vec::with_capacity((deg + 1) * (deg + 1));
    for a in &p1 {
        for b in &p2 {
            out.push(a * b);
        }
    }
    out
}

/// Solution of the coupled two-scale problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleTriple {
    pub u0: DisplacementField,
    pub corrector: CorrectorField,
    /// Relative residual of the regularized linear system.
    pub residual: f64,
    /// Relative residual without the regularization term.
    pub unregularized_residual: f64,
}

/// Discretization of the corrector space.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectorSpace {
    pub x_degree: usize,
    pub truncation: usize,
}

impl Default for CorrectorSpace {
    fn default() -> Self {
        CorrectorSpace { x_degree: 2, truncation: 2 }
    }
}

/// Galerkin system of the two-scale form `B^0` with unknowns
/// `(u0 | corrector)`, regularized on the corrector block.
pub fn assemble_coupled(
    setup: &ShellSetup,
    cs: &CorrectorSpace,
    force: &ForceDensity,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>, CellBasis)> {
    setup.params.validate()?;
    setup.space.validate()?;
    let cell = CellBasis::new(cs.truncation)?;
    let space = setup.space;
    let n0 = space.ndof();
    let nc = cell.ndof();
    let nx = (cs.x_degree + 1) * (cs.x_degree + 1);
    let ntot = n0 + nx * nc;
    let p = setup.params;
    let bf = p.bending_factor();
    let theta = &setup.theta;

    let rule = setup.quadrature.rule(space.lengths, &ShapeFunction::zero(), None)?;
    let yrule = Rule1d::periodic_uniform(4 * cs.truncation + 4 + 2 * theta.max_frequency());
    let mut ys = Vec::new();
    for (&y1, &w1) in yrule.nodes.iter().zip(&yrule.weights) {
        for (&y2, &w2) in yrule.nodes.iter().zip(&yrule.weights) {
            let mut e = vec![CellEntry::default(); nc];
            cell.entries_at([y1, y2], &mut e);
            ys.push((w1 * w2, theta.values([y1, y2]), e));
        }
    }
    let e_rows = SMatrix::<f64, 4, 9>::from_fn(|i, k| e_y_rows()[i / 2][i % 2][k]);
    let constant_geometry = matches!(setup.chart, SurfaceChart::Plate);

    let t1 = AxisTable::new(&space, 0, &rule.x1.nodes);
    let t2 = AxisTable::new(&space, 1, &rule.x2.nodes);
    let mut entries = vec![BasisEntry::default(); n0];
    let mut k = DMatrix::<f64>::zeros(ntot, ntot);
    let mut f = DVector::<f64>::zeros(ntot);
    let mut mass_x = DMatrix::<f64>::zeros(nx, nx);
    let mut kcc_cached: Option<DMatrix<f64>> = None;
    let mut kcc = DMatrix::<f64>::zeros(nc, nc);
    let mut cross = DMatrix::<f64>::zeros(12, nc);

    for (i, (&x1, &w1)) in rule.x1.nodes.iter().zip(&rule.x1.weights).enumerate() {
        for (j, (&x2, &w2)) in rule.x2.nodes.iter().zip(&rule.x2.weights).enumerate() {
            let x = [x1, x2];
            let g = eval_geometry(&setup.chart, x)?;
            let c = ElasticityTensor::new_unchecked(&g.metric_inv, p.lambda, p.mu).as_matrix();
            let wx = w1 * w2 * g.sqrt_a;
            let sg = StrainGeometry::from(&g);
            let rm = rows_matrix(&membrane_rows(&sg));
            let base_bend = bending_rows(&sg);
            let need_kcc = !constant_geometry || kcc_cached.is_none();
            let mut lmm = SMatrix::<f64, 12, 12>::zeros();
            cross.fill(0.0);
            if need_kcc {
                kcc.fill(0.0);
            }
            for (wy, sv, ce) in &ys {
                let rb = rows_matrix(&add_rows(&base_bend, &m_y_rows(&g, sv), 1.0));
                let cbr = cell_bending_rows(&g, sv);
                let cb = SMatrix::<f64, 4, 9>::from_fn(|r, q| cbr[r / 2][r % 2][q]);
                lmm += (rm.transpose() * c * rm) * (wy * p.thickness) + (rb.transpose() * c * rb) * (wy * bf);
                let lmc: SMatrix<f64, 12, 9> =
                    (rm.transpose() * c * e_rows) * (wy * p.thickness) + (rb.transpose() * c * cb) * (wy * bf);
                for (q, e) in ce.iter().enumerate() {
                    let mut col = cross.column_mut(q);
                    for s in 0..3 {
                        col += lmc.column(e.idx[s]) * e.val[s];
                    }
                }
                if need_kcc {
                    let lcc: SMatrix<f64, 9, 9> =
                        (e_rows.transpose() * c * e_rows) * (wy * p.thickness) + (cb.transpose() * c * cb) * (wy * bf);
                    let lphi: Vec<[f64; 9]> = ce
                        .iter()
                        .map(|e| {
                            let mut o = [0.0; 9];
                            for s in 0..3 {
                                for r in 0..9 {
                                    o[r] += lcc[(r, e.idx[s])] * e.val[s];
                                }
                            }
                            o
                        })
                        .collect();
                    for (a, ea) in ce.iter().enumerate() {
                        for b in a..nc {
                            let lb = &lphi[b];
                            kcc[(a, b)] +=
                                ea.val[0] * lb[ea.idx[0]] + ea.val[1] * lb[ea.idx[1]] + ea.val[2] * lb[ea.idx[2]];
                        }
                    }
                }
            }
            if need_kcc {
                for a in 0..nc {
                    for b in 0..a {
                        kcc[(a, b)] = kcc[(b, a)];
                    }
                }
                if constant_geometry {
                    kcc_cached = Some(kcc.clone());
                }
            }

            space.entries_at_node(&t1, &t2, i, j, &mut entries);
            let lx = macro_values(cs.x_degree, space.lengths, x);
            // macro-macro
            let lphi: Vec<[f64; 12]> = entries
                .iter()
                .map(|e| {
                    let mut o = [0.0; 12];
                    for s in 0..e.len {
                        for r in 0..12 {
                            o[r] += lmm[(r, e.idx[s])] * e.val[s];
                        }
                    }
                    o
                })
                .collect();
            let load = setup.force_at(force, x);
            for (a, ea) in entries.iter().enumerate() {
                for b in a..n0 {
                    let mut s = 0.0;
                    for q in 0..ea.len {
                        s += ea.val[q] * lphi[b][ea.idx[q]];
                    }
                    k[(a, b)] += wx * s;
                }
                f[a] += wx * load[ea.idx[0]] * ea.val[0];
                // macro-corrector
                let mut row = vec![0.0; nc];
                for (q, r) in row.iter_mut().enumerate() {
                    let col = cross.column(q);
                    for s in 0..ea.len {
                        *r += ea.val[s] * col[ea.idx[s]];
                    }
                }
                for (pi, &lp) in lx.iter().enumerate() {
                    let off = n0 + pi * nc;
                    for (q, r) in row.iter().enumerate() {
                        k[(a, off + q)] += wx * lp * r;
                    }
                }
            }
            let w_plain = w1 * w2;
            for (pa, &la) in lx.iter().enumerate() {
                for (pb, &lb) in lx.iter().enumerate() {
                    mass_x[(pa, pb)] += w_plain * la * lb;
                }
            }
            if !constant_geometry {
                for (pa, &la) in lx.iter().enumerate() {
                    for (pb, &lb) in lx.iter().enumerate().skip(pa) {
                        let s = wx * la * lb;
                        let mut blk = k.view_mut((n0 + pa * nc, n0 + pb * nc), (nc, nc));
                        blk += &kcc * s;
                    }
                }
            }
        }
    }
    if let Some(kc) = &kcc_cached {
        // constant geometry: sqrt(a) is constant too, so the block is mass_x (x) K_cc
        let sa = eval_geometry(&setup.chart, [0.0, 0.0])?.sqrt_a;
        for pa in 0..nx {
            for pb in pa..nx {
                let mut blk = k.view_mut((n0 + pa * nc, n0 + pb * nc), (nc, nc));
                blk += kc * (mass_x[(pa, pb)] * sa);
            }
        }
    }
    // mirror the upper triangle (diagonal corrector blocks were filled as full blocks)
    for a in 0..ntot {
        for b in 0..a {
            k[(a, b)] = k[(b, a)];
        }
    }
    let gram = cell.h_gram_diagonal();
    let mut reg = DMatrix::<f64>::zeros(ntot, ntot);
    for pa in 0..nx {
        for pb in 0..nx {
            for q in 0..nc {
                reg[(n0 + pa * nc + q, n0 + pb * nc + q)] = CORRECTOR_REGULARIZATION * mass_x[(pa, pb)] * gram[q];
            }
        }
    }
    Ok((k, reg, f, cell))
}

impl ShellSetup {
    pub(crate) fn force_at(&self, force: &ForceDensity, x: [f64; 2]) -> [f64; 3] {
        force.eval(x, self.space.lengths, None)
    }
}

pub fn solve_coupled_two_scale(setup: &ShellSetup, cs: &CorrectorSpace, force: &ForceDensity) -> Result<TwoScaleTriple> {
    let (k, reg, f, cell) = assemble_coupled(setup, cs, force)?;
    let a = &k + &reg;
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("regularized two-scale system is not positive definite".into()))?;
    let mut x = chol.solve(&f);
    let r = &f - &a * &x;
    x += chol.solve(&r);
    let residual = relative_residual(&a, &x, &f);
    if residual >= COUPLED_SOLVE_TOL {
        return Err(Error::SingularSystem(format!("two-scale residual {residual:.3e}")));
    }
    let unregularized_residual = relative_residual(&k, &x, &f);
    let n0 = setup.space.ndof();
    let nc = cell.ndof();
    let nx = (cs.x_degree + 1) * (cs.x_degree + 1);
    let u0 = DisplacementField { space: setup.space, coeffs: x.rows(0, n0).into_owned() };
    let coeffs = DMatrix::from_fn(nx, nc, |p, q| x[n0 + p * nc + q]);
    Ok(TwoScaleTriple {
        u0,
        corrector: CorrectorField { lengths: setup.space.lengths, x_degree: cs.x_degree, cell, coeffs },
        residual,
        unregularized_residual,
    })
}

impl TwoScaleTriple {
    /// Macro local data of `u0` at `x`.
    pub fn u0_data(&self, x: [f64; 2]) -> crate::strain_kinematics::LocalData {
        combine(&self.u0.space.entries_at(x), &self.u0.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macro_solver::{solve_classical_reference, MacroQuadrature, MacroSpace, ShellParams};

    fn setup(theta: ShapeFunction) -> ShellSetup {
        ShellSetup {
            space: MacroSpace { lengths: [1.0, 1.0], inplane_modes: 2, deflection_modes: 2 },
            chart: SurfaceChart::Plate,
            theta,
            params: ShellParams { lambda: 1.0, mu: 1.0, thickness: 0.1 },
            quadrature: MacroQuadrature::default(),
        }
    }

    #[test]
    fn flat_profile_reproduces_classical_solution() {
        let s = setup(ShapeFunction::zero());
        let load = ForceDensity::SineBump { value: [0.2, -0.1, 1.0] };
        let cs = CorrectorSpace { x_degree: 1, truncation: 1 };
        let t = solve_coupled_two_scale(&s, &cs, &load).unwrap();
        let r = solve_classical_reference(&s, &load).unwrap();
        let gap = (&t.u0.coeffs - &r.field.coeffs).norm() / r.field.coeffs.norm();
        assert!(gap < 1e-10, "gap {gap:e}");
        assert!(t.corrector.coeffs.amax() < 1e-10 * r.field.coeffs.amax());
    }

    #[test]
    fn zero_load_gives_zero_triple() {
        let s = setup(ShapeFunction::sin_y1(1.0));
        let cs = CorrectorSpace { x_degree: 1, truncation: 1 };
        let t = solve_coupled_two_scale(&s, &cs, &ForceDensity::Constant { value: [0.0; 3] }).unwrap();
        assert_eq!(t.u0.coeffs.amax(), 0.0);
        assert_eq!(t.corrector.coeffs.amax(), 0.0);
    }

    #[test]
    fn wrinkled_plate_solves_to_tolerance() {
        let s = setup(ShapeFunction::sin_y1(1.0));
        let cs = CorrectorSpace { x_degree: 1, truncation: 2 };
        let t = solve_coupled_two_scale(&s, &cs, &ForceDensity::Constant { value: [0.0, 0.0, 1.0] }).unwrap();
        assert!(t.residual < COUPLED_SOLVE_TOL);
        assert!(t.u0.coeffs.amax() > 0.0);
        let (k, _, _, _) = assemble_coupled(&s, &cs, &ForceDensity::Constant { value: [0.0; 3] }).unwrap();
        assert!(crate::linalg::symmetry_defect(&k) < 1e-12);
    }

    #[test]
    fn legendre_recurrence() {
        let p = legendre_values(3, 0.4);
        assert!((p[2] - 0.5 * (3.0 * 0.16 - 1.0)).abs() < 1e-15);
        assert!((p[3] - 0.5 * (5.0 * 0.064 - 3.0 * 0.4)).abs() < 1e-15);
    }
}
