use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, conjugate_gradient, generalized_eigenvalues, relative_residual, symmetrize};
use crate::macro_solver::ShellParams;
use crate::quadrature::Rule1d;
use crate::strain_kinematics::{cell_bending_rows, e_y_rows, n_y_rows, CellData, CellRows};
use crate::surface_geometry::{eval_geometry, ElasticityTensor, GeometryAtPoint, ShapeFunction, SurfaceChart};

use super::basis::{CellBasis, CellEntry, PeriodicField, TrigBasis};

/// Largest truncation solved by dense factorization; above it conjugate
/// gradients are used.
pub const DENSE_LIMIT: usize = 16;
pub const CELL_SOLVE_TOL: f64 = 1e-10;

/// The three independent index pairs `11, 12, 22`.
pub const XI_ETA: [[usize; 2]; 3] = [[0, 0], [0, 1], [1, 1]];

/// Frozen macro data of a cell problem.
#[derive(Debug, Clone)]
pub struct CellContext {
    pub x0: [f64; 2],
    pub geometry: GeometryAtPoint,
    pub tensor: ElasticityTensor,
    pub theta: ShapeFunction,
    pub thickness: f64,
}

impl CellContext {
    pub fn new(chart: &SurfaceChart, theta: &ShapeFunction, x0: [f64; 2], params: &ShellParams) -> Result<Self> {
        params.validate()?;
        let geometry = eval_geometry(chart, x0)?;
        let tensor = ElasticityTensor::new(&geometry.metric_inv, params.lambda, params.mu)?;
        Ok(CellContext { x0, geometry, tensor, theta: theta.clone(), thickness: params.thickness })
    }

    fn bending_factor(&self) -> f64 {
        self.thickness.powi(3) / 3.0
    }

    /// Uniform cell rule exact for every product appearing in the cell forms.
    pub fn rule(&self, truncation: usize) -> Rule1d {
        Rule1d::periodic_uniform(4 * truncation + 4 + 2 * self.theta.max_frequency())
    }
}

pub(crate) fn cell_rows_matrix(r: &CellRows) -> SMatrix<f64, 4, 9> {
    SMatrix::<f64, 4, 9>::from_fn(|i, k| r[i / 2][i % 2][k])
}

/// Weighted local matrix of the cell form on [`CellData`] at one `y`.
pub(crate) fn cell_local(ctx: &CellContext, c: &Matrix4<f64>, y: [f64; 2], w: f64) -> SMatrix<f64, 9, 9> {
    let sv = ctx.theta.values(y);
    let e = cell_rows_matrix(&e_y_rows());
    let b = cell_rows_matrix(&cell_bending_rows(&ctx.geometry, &sv));
    (e.transpose() * c * e) * (w * ctx.thickness) + (b.transpose() * c * b) * (w * ctx.bending_factor())
}

/// IBP form of `F_xi_eta` on cell data: `-(d^3/3) sqrt(a) a^{xi eta r s} N^y_rs`.
fn rhs_ibp_local(ctx: &CellContext, xe: [usize; 2], y: [f64; 2]) -> CellData {
    let n = n_y_rows(&ctx.geometry, &ctx.theta.values(y));
    let s = -ctx.bending_factor() * ctx.geometry.sqrt_a;
    let mut out = [0.0; 9];
    for r in 0..2 {
        for t in 0..2 {
            let c = ctx.tensor.get(xe[0], xe[1], r, t);
            for k in 0..9 {
                out[k] += s * c * n[r][t][k];
            }
        }
    }
    out
}

/// Direct form of `F_xi_eta` on cell data:
/// `(d^3/3) sqrt(a) a^{xi eta r s} [a^{tl} d_rls theta + d_r b^t_s + d_s b^t_r] z_t`.
fn rhs_direct_local(ctx: &CellContext, xe: [usize; 2], y: [f64; 2]) -> CellData {
    let sv = ctx.theta.values(y);
    let g = &ctx.geometry;
    let s = ctx.bending_factor() * g.sqrt_a;
    let mut out = [0.0; 9];
    for r in 0..2 {
        for q in 0..2 {
            let c = ctx.tensor.get(xe[0], xe[1], r, q);
            for t in 0..2 {
                let mut coef = g.db_mixed[r][(t, q)] + g.db_mixed[q][(t, r)];
                for l in 0..2 {
                    coef += g.metric_inv[(t, l)] * sv.d3(r, l, q);
                }
                out[t] += s * c * coef;
            }
        }
    }
    out
}

/// Which reading of the cell load to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadForm {
    IntegratedByParts,
    Direct,
}

/// Galerkin matrix and load of one cell problem.
#[derive(Debug, Clone)]
pub struct CellSystem {
    pub basis: CellBasis,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

fn accumulate(
    basis: &CellBasis,
    rule: &Rule1d,
    mut per_point: impl FnMut([f64; 2], f64, &[CellEntry]),
) {
    let mut entries = vec![CellEntry::default(); basis.ndof()];
    for (&y1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        for (&y2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            basis.entries_at([y1, y2], &mut entries);
            per_point([y1, y2], w1 * w2, &entries);
        }
    }
}

/// Galerkin matrix of the cell form on a truncated trigonometric basis.
pub fn assemble_cell_matrix(ctx: &CellContext, basis: &CellBasis) -> DMatrix<f64> {
    let n = basis.ndof();
    let c = ctx.tensor.as_matrix();
    let rule = ctx.rule(basis.trig.truncation);
    let mut k = vec![0.0; n * n];
    let mut lphi = vec![[0.0; 9]; n];
    accumulate(basis, &rule, |y, w, entries| {
        let l = cell_local(ctx, &c, y, w * ctx.geometry.sqrt_a);
        for (e, out) in entries.iter().zip(lphi.iter_mut()) {
            *out = [0.0; 9];
            for s in 0..3 {
                let col = l.column(e.idx[s]);
                for r in 0..9 {
                    out[r] += col[r] * e.val[s];
                }
            }
        }
        for (a, ea) in entries.iter().enumerate() {
            let row = &mut k[a * n..(a + 1) * n];
            for b in a..n {
                let lb = &lphi[b];
                row[b] += ea.val[0] * lb[ea.idx[0]] + ea.val[1] * lb[ea.idx[1]] + ea.val[2] * lb[ea.idx[2]];
            }
        }
    });
    let mut m = DMatrix::from_row_slice(n, n, &k);
    for a in 0..n {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    m
}

/// Load vector of `F_xi_eta` in the requested form.
pub fn assemble_cell_rhs(ctx: &CellContext, basis: &CellBasis, xi_eta: [usize; 2], form: LoadForm) -> DVector<f64> {
    let rule = ctx.rule(basis.trig.truncation);
    let mut f = DVector::zeros(basis.ndof());
    accumulate(basis, &rule, |y, w, entries| {
        let local = match form {
            LoadForm::IntegratedByParts => rhs_ibp_local(ctx, xi_eta, y),
            LoadForm::Direct => rhs_direct_local(ctx, xi_eta, y),
        };
        for (a, e) in entries.iter().enumerate() {
            f[a] += w * (0..3).map(|s| local[e.idx[s]] * e.val[s]).sum::<f64>();
        }
    });
    f
}

pub fn assemble_cell_system(ctx: &CellContext, xi_eta: [usize; 2], truncation: usize) -> Result<CellSystem> {
    let basis = CellBasis::new(truncation)?;
    let matrix = assemble_cell_matrix(ctx, &basis);
    let rhs = assemble_cell_rhs(ctx, &basis, xi_eta, LoadForm::IntegratedByParts);
    Ok(CellSystem { basis, matrix, rhs })
}

/// `B[(v, V), (z, Z)]` for coefficient vectors in the cell layout.
pub fn cell_form_value(system: &CellSystem, v: &DVector<f64>, z: &DVector<f64>) -> f64 {
    v.dot(&(&system.matrix * z))
}

/// Solution of one cell problem.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub xi_eta: [usize; 2],
    pub truncation: usize,
    /// In-plane corrector `(v1_1, v1_2)`.
    pub phi_vec: [PeriodicField; 2],
    pub phi_scal: PeriodicField,
    pub solver_residual: f64,
    /// `B[Phi, Phi] / 2 - F(Phi)`.
    pub energy: f64,
    pub coeffs: DVector<f64>,
}

fn split(basis: &TrigBasis, x: &DVector<f64>) -> ([PeriodicField; 2], PeriodicField) {
    let nb = basis.len();
    let field = |k: usize| PeriodicField { basis: basis.clone(), coeffs: x.rows(k * nb, nb).iter().copied().collect() };
    ([field(0), field(1)], field(2))
}

impl CellSystem {
    fn direct(&self) -> Result<DVector<f64>> {
        Ok(cholesky(&self.matrix, "cell_solver")?.solve(&self.rhs))
    }

    fn iterative(&self) -> DVector<f64> {
        // Jacobi scaling keeps CG iterations moderate for the d^3/3 block
        let d: Vec<f64> = self.matrix.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
        let n = d.len();
        let a = DMatrix::from_fn(n, n, |i, j| d[i] * self.matrix[(i, j)] * d[j]);
        let b = DVector::from_fn(n, |i, _| d[i] * self.rhs[i]);
        let (y, _) = conjugate_gradient(&a, &b, None, 1e-13, 20 * n);
        DVector::from_fn(n, |i, _| d[i] * y[i])
    }

    /// Dense factorization up to [`DENSE_LIMIT`], conjugate gradients above.
    pub fn solve(&self, xi_eta: [usize; 2]) -> Result<CellSolution> {
        let x = if self.basis.trig.truncation <= DENSE_LIMIT { self.direct()? } else { self.iterative() };
        self.finish(xi_eta, x)
    }

    /// Solution by conjugate gradients regardless of size.
    pub fn solve_iterative(&self, xi_eta: [usize; 2]) -> Result<CellSolution> {
        let x = self.iterative();
        self.finish(xi_eta, x)
    }

    fn finish(&self, xi_eta: [usize; 2], x: DVector<f64>) -> Result<CellSolution> {
        let solver_residual = relative_residual(&self.matrix, &x, &self.rhs);
        if solver_residual >= CELL_SOLVE_TOL {
            return Err(Error::NotSpd {
                module: "cell_solver",
                detail: format!("cell residual {solver_residual:.3e} above {CELL_SOLVE_TOL:.0e}"),
            });
        }
        let energy = 0.5 * x.dot(&(&self.matrix * &x)) - x.dot(&self.rhs);
        let (phi_vec, phi_scal) = split(&self.basis.trig, &x);
        Ok(CellSolution { xi_eta, truncation: self.basis.trig.truncation, phi_vec, phi_scal, solver_residual, energy, coeffs: x })
    }

    /// Generalized eigenvalues of the cell matrix against the `H`-norm Gram matrix.
    pub fn coercivity_spectrum(&self) -> Result<Vec<f64>> {
        let g = DMatrix::from_diagonal(&DVector::from_vec(self.basis.h_gram_diagonal()));
        let mut k = self.matrix.clone();
        symmetrize(&mut k);
        generalized_eigenvalues(&k, &g, "cell_solver")
    }

    /// Number of generalized eigenvalues below `1e-12` of the largest.
    pub fn kernel_dimension(&self) -> Result<usize> {
        let ev = self.coercivity_spectrum()?;
        let top = ev.last().copied().unwrap_or(0.0).abs();
        Ok(ev.iter().filter(|&&v| v <= 1e-12 * top).count())
    }
}

pub fn solve_local(ctx: &CellContext, xi_eta: [usize; 2], truncation: usize) -> Result<CellSolution> {
    assemble_cell_system(ctx, xi_eta, truncation)?.solve(xi_eta)
}

/// CSV `xi_eta,k1,k2,component,real_coeff,imag_coeff` with a trailing summary row.
pub fn cell_solution_csv(solutions: &[CellSolution]) -> String {
    let mut out = String::from("xi_eta,k1,k2,component,real_coeff,imag_coeff\n");
    for s in solutions {
        let tag = format!("{}{}", s.xi_eta[0] + 1, s.xi_eta[1] + 1);
        let fields = [("v1", &s.phi_vec[0]), ("v2", &s.phi_vec[1]), ("V", &s.phi_scal)];
        for (name, f) in fields {
            for (k, re, im) in f.complex_coefficients() {
                writeln!(out, "{tag},{},{},{name},{re:.12e},{im:.12e}", k[0], k[1]).unwrap();
            }
        }
        writeln!(out, "{tag},summary,energy={:.12e},residual={:.3e},N={},", s.energy, s.solver_residual, s.truncation)
            .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> ShellParams {
        ShellParams { lambda: 1.3, mu: 0.8, thickness: 0.2 }
    }

    fn ctx(chart: SurfaceChart, theta: ShapeFunction) -> CellContext {
        CellContext::new(&chart, &theta, [0.3, 0.6], &params()).unwrap()
    }

    #[test]
    fn unwrinkled_flat_cell_has_zero_correctors() {
        let c = ctx(SurfaceChart::Plate, ShapeFunction::zero());
        for xe in XI_ETA {
            let sys = assemble_cell_system(&c, xe, 3).unwrap();
            assert_eq!(sys.rhs.amax(), 0.0);
            let s = sys.solve(xe).unwrap();
            assert_eq!(s.coeffs.amax(), 0.0);
        }
    }

    #[test]
    fn cell_matrix_is_symmetric_with_trivial_kernel() {
        for chart in [SurfaceChart::Plate, SurfaceChart::Cylinder { radius: 1.5 }] {
            let c = ctx(chart, ShapeFunction::sin_plus_sin(0.7));
            let sys = assemble_cell_system(&c, [0, 1], 2).unwrap();
            assert!(crate::linalg::symmetry_defect(&sys.matrix) < 1e-12);
            assert_eq!(sys.kernel_dimension().unwrap(), 0);
        }
    }

    #[test]
    fn y1_profile_loads_only_y1_frequencies() {
        let c = ctx(SurfaceChart::Plate, ShapeFunction::sin_y1(1.0));
        let sys = assemble_cell_system(&c, [0, 0], 3).unwrap();
        let nb = sys.basis.block();
        assert!(sys.rhs.amax() > 0.0);
        for (i, v) in sys.rhs.iter().enumerate() {
            let (k, _) = sys.basis.trig.mode(i % nb);
            if k[1] != 0 {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    /// Galerkin solve over `cos/sin(2 pi k y1)`, `k = 1..n`, with the flat-plate
    /// forms written out for a profile depending on `y1` only.
    fn oracle_1d(amp: f64, n: usize, p: &ShellParams) -> Vec<f64> {
        let lame = 4.0 * p.lambda * p.mu / (p.lambda + 2.0 * p.mu);
        let c1111 = lame + 4.0 * p.mu;
        let c1212 = 2.0 * p.mu;
        let d = p.thickness;
        let bf = d * d * d / 3.0;
        let m = 8 * n + 16;
        let w = 2.0 * PI;
        let nf = 2 * n;
        // unknowns: v (nf), w (nf), V (nf)
        let mut k = DMatrix::zeros(3 * nf, 3 * nf);
        let mut f = DVector::zeros(3 * nf);
        for q in 0..m {
            let y = q as f64 / m as f64;
            let t2 = -amp * w * w * (w * y).sin();
            let t3 = -amp * w * w * w * (w * y).cos();
            let fun = |j: usize| {
                let kk = (j / 2 + 1) as f64 * w;
                let (s, c) = (kk * y).sin_cos();
                if j % 2 == 0 { (c, -kk * s, -kk * kk * c) } else { (s, kk * c, -kk * kk * s) }
            };
            // row vectors of e11, e12, G11 over unknowns
            let mut e11 = DVector::zeros(3 * nf);
            let mut e12 = DVector::zeros(3 * nf);
            let mut g11 = DVector::zeros(3 * nf);
            for j in 0..nf {
                let (v, dv, ddv) = fun(j);
                e11[j] = dv;
                g11[j] = t3 * v + 2.0 * t2 * dv;
                e12[nf + j] = 0.5 * dv;
                g11[2 * nf + j] = ddv;
                f[j] += bf * c1111 * t3 * v / m as f64;
            }
            let wq = 1.0 / m as f64;
            k += (&e11 * e11.transpose()) * (wq * d * c1111)
                + (&e12 * e12.transpose()) * (wq * d * 4.0 * c1212)
                + (&g11 * g11.transpose()) * (wq * bf * c1111);
        }
        k.cholesky().unwrap().solve(&f).iter().copied().collect()
    }

    #[test]
    fn y1_profile_matches_one_dimensional_oracle() {
        let amp = 0.8;
        let n = 4;
        let c = ctx(SurfaceChart::Plate, ShapeFunction::sin_y1(amp));
        let s = solve_local(&c, [0, 0], n).unwrap();
        let o = oracle_1d(amp, n, &params());
        let nf = 2 * n;
        let trig = &s.phi_scal.basis;
        for (field, block) in [(&s.phi_vec[0], 0), (&s.phi_vec[1], 1), (&s.phi_scal, 2)] {
            for (j, &cf) in field.coeffs.iter().enumerate() {
                let (k, sine) = trig.mode(j);
                if k[1] == 0 {
                    let idx = block * nf + 2 * (k[0] as usize - 1) + usize::from(sine);
                    assert!((cf - o[idx]).abs() < 1e-8, "block {block} k {k:?}: {cf} vs {}", o[idx]);
                } else {
                    assert!(cf.abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn load_forms_agree_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = ctx(SurfaceChart::QuadraticGraph { k11: 0.9, k12: 0.4, k22: -0.6 }, ShapeFunction::sin_sin(1.0));
        let basis = CellBasis::new(3).unwrap();
        for xe in XI_ETA {
            let a = assemble_cell_rhs(&c, &basis, xe, LoadForm::IntegratedByParts);
            let b = assemble_cell_rhs(&c, &basis, xe, LoadForm::Direct);
            for _ in 0..20 {
                let z = DVector::from_fn(basis.ndof(), |_, _| rng.random_range(-1.0..1.0));
                assert!((a.dot(&z) - b.dot(&z)).abs() < 1e-10 * (1.0 + a.dot(&z).abs()));
            }
        }
    }

    #[test]
    fn dense_and_iterative_solutions_agree() {
        let c = ctx(SurfaceChart::Cylinder { radius: 2.0 }, ShapeFunction::sin_plus_sin(0.5));
        let sys = assemble_cell_system(&c, [0, 1], 3).unwrap();
        let a = sys.solve([0, 1]).unwrap();
        let b = sys.solve_iterative([0, 1]).unwrap();
        assert!((&a.coeffs - &b.coeffs).amax() < 1e-10 * a.coeffs.amax().max(1.0));
    }

    #[test]
    fn truncation_doubling_preserves_low_modes_and_coercivity() {
        let c = ctx(SurfaceChart::Plate, ShapeFunction::sin_sin(0.6));
        let s2 = assemble_cell_system(&c, [0, 0], 3).unwrap();
        let s4 = assemble_cell_system(&c, [0, 0], 6).unwrap();
        let (a, b) = (s2.solve([0, 0]).unwrap(), s4.solve([0, 0]).unwrap());
        for (fa, fb) in [(&a.phi_scal, &b.phi_scal), (&a.phi_vec[0], &b.phi_vec[0])] {
            for (k, s, v) in fa.low_frequency_coefficients(1) {
                let w = fb.low_frequency_coefficients(1).into_iter().find(|q| q.0 == k && q.1 == s).unwrap().2;
                assert!((v - w).abs() < 1e-6, "{k:?} {v} {w}");
            }
        }
        let m2 = s2.coercivity_spectrum().unwrap()[0];
        let m4 = s4.coercivity_spectrum().unwrap()[0];
        assert!(m2 > 0.0 && m4 > 0.0 && m2 / m4 <= 2.0 && m4 / m2 <= 2.0);
    }

    #[test]
    fn pure_bending_form_matches_direct_quadrature() {
        let c = ctx(SurfaceChart::Plate, ShapeFunction::zero());
        let sys = assemble_cell_system(&c, [0, 0], 2).unwrap();
        let nb = sys.basis.block();
        let mut v = DVector::zeros(sys.basis.ndof());
        for j in 0..nb {
            v[2 * nb + j] = ((j + 1) as f64).sin();
        }
        let field = PeriodicField { basis: sys.basis.trig.clone(), coeffs: v.rows(2 * nb, nb).iter().copied().collect() };
        // Hessian by central differences of the gradient, then quadrature
        let m = 24;
        let h = 1e-5;
        let mut q = 0.0;
        for i in 0..m {
            for j in 0..m {
                let y = [i as f64 / m as f64, j as f64 / m as f64];
                let mut hs = nalgebra::Matrix2::zeros();
                for a in 0..2 {
                    let mut p = y;
                    let mut n = y;
                    p[a] += h;
                    n[a] -= h;
                    let (gp, gn) = (field.gradient(p), field.gradient(n));
                    for b in 0..2 {
                        hs[(a, b)] = (gp[b] - gn[b]) / (2.0 * h);
                    }
                }
                q += c.tensor.quadratic_form(&hs) / (m * m) as f64;
            }
        }
        let expect = c.thickness.powi(3) / 3.0 * q;
        let got = cell_form_value(&sys, &v, &v);
        assert!(got > 0.0 && ((got - expect) / expect).abs() < 1e-6);
    }
}
