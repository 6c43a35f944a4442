//! Reference solver for the unwrinkled shell, built on the vector form of the
//! Koiter strains (`eta = u_i a^i`) rather than on component formulas.

use nalgebra::{DMatrix, DVector, Matrix2, SMatrix};

use crate::error::{Error, Result};
use crate::jet::{jv_cross, jv_diff, jv_dot, jv_scale, Jet, JetVec};
use crate::surface_geometry::{inverse_2x2, ElasticityTensor, A_MIN, V3};

use super::assembly::{MacroSolution, MacroSystem};
use super::force::ForceDensity;
use super::problems::ShellSetup;
use super::space::{bubble_mode, sine_mode, DisplacementField, MacroSpace, Triple};

/// Frame fields at a point: `frame[i]` is `a^1, a^2, a_3` with all first and
/// second derivatives.
struct Frame {
    a_cov: [V3; 2],
    d_a_cov: [[V3; 2]; 2],
    frame: [V3; 3],
    d_frame: [[V3; 2]; 3],
    dd_frame: [[[V3; 2]; 2]; 3],
    metric_inv: Matrix2<f64>,
    sqrt_a: f64,
}

fn jet_point(v: &JetVec) -> V3 {
    V3::new(v[0].value(), v[1].value(), v[2].value())
}

fn jet_deriv(v: &JetVec, i: usize, j: usize) -> V3 {
    V3::new(v[0].derivative(i, j), v[1].derivative(i, j), v[2].derivative(i, j))
}

fn frame_at(setup: &ShellSetup, x: [f64; 2]) -> Result<Frame> {
    let psi = setup.chart.jet(x, 4);
    let a = [jv_diff(&psi, 0), jv_diff(&psi, 1)];
    let n = jv_cross(&a[0], &a[1]);
    let len = jv_dot(&n, &n).sqrt();
    let sqrt_a = len.value();
    if !(sqrt_a >= A_MIN) {
        return Err(Error::DegenerateMetric { sqrt_a, threshold: A_MIN, x1: x[0], x2: x[1] });
    }
    let a3 = jv_scale(&n, len.recip());
    let metric: [[Jet; 2]; 2] = [0, 1].map(|i| [0, 1].map(|j| jv_dot(&a[i], &a[j])));
    let inv = inverse_2x2(&metric);
    let contra: [JetVec; 2] =
        [0, 1].map(|al| [0, 1, 2].map(|c| inv[al][0] * a[0][c] + inv[al][1] * a[1][c]));
    let fields = [&contra[0], &contra[1], &a3];
    let offs = |al: usize| if al == 0 { (1, 0) } else { (0, 1) };
    let d1 = |v: &JetVec, al: usize| {
        let (i, j) = offs(al);
        jet_deriv(v, i, j)
    };
    let d2 = |v: &JetVec, al: usize, be: usize| {
        let (i, j) = offs(al);
        let (k, l) = offs(be);
        jet_deriv(v, i + k, j + l)
    };
    Ok(Frame {
        a_cov: [jet_point(&a[0]), jet_point(&a[1])],
        d_a_cov: [0, 1].map(|al| [0, 1].map(|be| d1(&a[al], be))),
        frame: fields.map(jet_point),
        d_frame: fields.map(|f| [0, 1].map(|al| d1(f, al))),
        dd_frame: fields.map(|f| [0, 1].map(|al| [0, 1].map(|be| d2(f, al, be)))),
        metric_inv: Matrix2::from_fn(|i, j| inv[i][j].value()),
        sqrt_a,
    })
}

/// Value, gradient and Hessian of every displacement component of one basis function.
type FullData = ([f64; 3], [[f64; 2]; 3], [[[f64; 2]; 2]; 3]);

fn basis_full(space: &MacroSpace, dof: usize, x: [f64; 2]) -> FullData {
    let m1 = space.inplane_modes;
    let m3 = space.deflection_modes;
    let nt = m1 * m1;
    let (comp, f, g): (usize, Triple, Triple) = if dof < 2 * nt {
        let c = dof / nt;
        let r = dof % nt;
        (c, sine_mode(r / m1 + 1, space.lengths[0], x[0]), sine_mode(r % m1 + 1, space.lengths[1], x[1]))
    } else {
        let r = dof - 2 * nt;
        (2, bubble_mode(r / m3, space.lengths[0], x[0]), bubble_mode(r % m3, space.lengths[1], x[1]))
    };
    let mut val = [0.0; 3];
    let mut grad = [[0.0; 2]; 3];
    let mut hess = [[[0.0; 2]; 2]; 3];
    val[comp] = f[0] * g[0];
    grad[comp] = [f[1] * g[0], f[0] * g[1]];
    hess[comp] = [[f[2] * g[0], f[1] * g[1]], [f[1] * g[1], f[0] * g[2]]];
    (val, grad, hess)
}

/// Membrane and bending strains (flattened `11, 12, 21, 22`) of a displacement
/// with the given data, from `eta = u_i a^i`.
fn vector_form_strains(fr: &Frame, d: &FullData) -> SMatrix<f64, 8, 1> {
    let (u, du, ddu) = d;
    let mut d_eta = [V3::zeros(); 2];
    let mut dd_eta = [[V3::zeros(); 2]; 2];
    for i in 0..3 {
        for al in 0..2 {
            d_eta[al] += fr.frame[i] * du[i][al] + fr.d_frame[i][al] * u[i];
            for be in 0..2 {
                dd_eta[al][be] += fr.frame[i] * ddu[i][al][be]
                    + fr.d_frame[i][be] * du[i][al]
                    + fr.d_frame[i][al] * du[i][be]
                    + fr.dd_frame[i][al][be] * u[i];
            }
        }
    }
    let mut out = SMatrix::<f64, 8, 1>::zeros();
    for al in 0..2 {
        for be in 0..2 {
            out[2 * al + be] = 0.5 * (d_eta[al].dot(&fr.a_cov[be]) + d_eta[be].dot(&fr.a_cov[al]));
            let mut v = dd_eta[al][be];
            for s in 0..2 {
                let chr = fr.frame[s].dot(&fr.d_a_cov[be][al]);
                v -= d_eta[s] * chr;
            }
            out[4 + 2 * al + be] = v.dot(&fr.frame[2]);
        }
    }
    out
}

/// Dense reference assembly of the classical clamped Koiter problem.
pub fn assemble_classical_reference(setup: &ShellSetup, force: &ForceDensity) -> Result<MacroSystem> {
    setup.params.validate()?;
    setup.space.validate()?;
    let space = setup.space;
    let n = space.ndof();
    let rule = setup.quadrature.rule(space.lengths, &crate::surface_geometry::ShapeFunction::zero(), None)?;
    let p = setup.params;
    let mut k = DMatrix::zeros(n, n);
    let mut f = DVector::zeros(n);
    let mut b = DMatrix::zeros(8, n);
    for (&x1, &w1) in rule.x1.nodes.iter().zip(&rule.x1.weights) {
        for (&x2, &w2) in rule.x2.nodes.iter().zip(&rule.x2.weights) {
            let x = [x1, x2];
            let fr = frame_at(setup, x)?;
            let w = w1 * w2 * fr.sqrt_a;
            let c = ElasticityTensor::new_unchecked(&fr.metric_inv, p.lambda, p.mu).as_matrix();
            let mut dmat = DMatrix::zeros(8, 8);
            for i in 0..4 {
                for j in 0..4 {
                    dmat[(i, j)] = w * p.thickness * c[(i, j)];
                    dmat[(4 + i, 4 + j)] = w * p.bending_factor() * c[(i, j)];
                }
            }
            let load = force.eval(x, space.lengths, None);
            for dof in 0..n {
                let d = basis_full(&space, dof, x);
                b.set_column(dof, &vector_form_strains(&fr, &d));
                f[dof] += w * (0..3).map(|i| load[i] * d.0[i]).sum::<f64>();
            }
            let db = &dmat * &b;
            k.gemm_tr(1.0, &b, &db, 1.0);
        }
    }
    Ok(MacroSystem { space, matrix: k, rhs: f })
}

pub fn solve_classical_reference(setup: &ShellSetup, force: &ForceDensity) -> Result<MacroSolution> {
    assemble_classical_reference(setup, force)?.solve()
}

/// Strains of a field by the vector form, for pointwise cross-checks.
pub fn classical_strains_vector_form(setup: &ShellSetup, field: &DisplacementField, x: [f64; 2]) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let fr = frame_at(setup, x)?;
    let mut total = SMatrix::<f64, 8, 1>::zeros();
    for (dof, &c) in field.coeffs.iter().enumerate() {
        if c != 0.0 {
            total += vector_form_strains(&fr, &basis_full(&field.space, dof, x)) * c;
        }
    }
    Ok((
        Matrix2::new(total[0], total[1], total[2], total[3]),
        Matrix2::new(total[4], total[5], total[6], total[7]),
    ))
}
