use nalgebra::{DMatrix, Matrix2};

use crate::error::Result;
use crate::linalg::generalized_eigenvalues;
use crate::quadrature::Rule1d;
use crate::strain_kinematics::{
    bending_rows, ddu3, membrane_rows, m_y_rows, singular_rows, StrainGeometry, StrainRows,
};
use crate::surface_geometry::{eval_geometry, ElasticityTensor, GeometryAtPoint, ShapeFunction, SurfaceChart};
use crate::wrinkle_geometry::eval_exact_eps;

use super::assembly::{assemble_macro, koiter_local, rows_matrix, Local12, MacroSolution, MacroSystem, ShellParams};
use super::force::ForceDensity;
use super::space::{MacroQuadrature, MacroSpace};

/// Everything that fixes a shell problem apart from `eps` and the load.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSetup {
    pub space: MacroSpace,
    pub chart: SurfaceChart,
    pub theta: ShapeFunction,
    pub params: ShellParams,
    pub quadrature: MacroQuadrature,
}

fn load_vector(force: &ForceDensity, x: [f64; 2], lengths: [f64; 2], eps: Option<f64>, w: f64) -> [f64; 3] {
    force.eval(x, lengths, eps).map(|v| v * w)
}

/// Galerkin system of the wrinkled Koiter problem `B_eps(u, v) = L_eps(v)` on
/// the exact geometry.
pub fn assemble_eps_problem(setup: &ShellSetup, eps: f64, force: &ForceDensity) -> Result<MacroSystem> {
    setup.params.validate()?;
    setup.space.validate()?;
    let rule = setup.quadrature.rule(setup.space.lengths, &setup.theta, Some(eps))?;
    let p = setup.params;
    assemble_macro(&setup.space, &rule, |x, w| {
        let ge = eval_exact_eps(&setup.chart, &setup.theta, x, eps)?;
        let c = ElasticityTensor::new_unchecked(&ge.metric_inv, p.lambda, p.mu).as_matrix();
        let sg = StrainGeometry::from(&ge);
        let ws = w * ge.sqrt_a;
        let l = koiter_local(&membrane_rows(&sg), &bending_rows(&sg), &c, &p, ws);
        Ok((l, load_vector(force, x, setup.space.lengths, Some(eps), ws)))
    })
}

pub fn solve_eps_problem(setup: &ShellSetup, eps: f64, force: &ForceDensity) -> Result<MacroSolution> {
    assemble_eps_problem(setup, eps, force)?.solve()
}

/// Galerkin system of the unwrinkled Koiter problem on the base geometry.
pub fn assemble_classical(setup: &ShellSetup, force: &ForceDensity) -> Result<MacroSystem> {
    setup.params.validate()?;
    setup.space.validate()?;
    let rule = setup.quadrature.rule(setup.space.lengths, &ShapeFunction::zero(), None)?;
    let p = setup.params;
    assemble_macro(&setup.space, &rule, |x, w| {
        let g = eval_geometry(&setup.chart, x)?;
        let c = ElasticityTensor::new_unchecked(&g.metric_inv, p.lambda, p.mu).as_matrix();
        let sg = StrainGeometry::from(&g);
        let ws = w * g.sqrt_a;
        let l = koiter_local(&membrane_rows(&sg), &bending_rows(&sg), &c, &p, ws);
        Ok((l, load_vector(force, x, setup.space.lengths, None, ws)))
    })
}

/// Cell rule for products of two `M^y` factors: exact for trigonometric
/// polynomials of the doubled frequency.
pub(crate) fn cell_rule(theta: &ShapeFunction) -> Rule1d {
    Rule1d::periodic_uniform(4 * theta.max_frequency() + 4)
}

/// `T[t][k] = int_Y a^{abrs} M^y_rs(e_t) M^y_ab(e_k) dy` for the two tangential
/// value slots `t, k`, i.e. the homogenized addition at `x` before the `d^3/3`
/// factor.
pub fn m_y_table(g: &GeometryAtPoint, theta: &ShapeFunction, c: &nalgebra::Matrix4<f64>) -> Matrix2<f64> {
    let rule = cell_rule(theta);
    let mut t = Matrix2::zeros();
    for (&y1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        for (&y2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            let r = rows_matrix(&m_y_rows(g, &theta.values([y1, y2])));
            let m = r.fixed_columns::<2>(0).into_owned();
            t += (m.transpose() * c * m) * (w1 * w2);
        }
    }
    t
}

/// Galerkin system of the decoupled macro problem with the cell-averaged
/// `M^y M^y` term.
pub fn assemble_homogenized(setup: &ShellSetup, force: &ForceDensity) -> Result<MacroSystem> {
    setup.params.validate()?;
    setup.space.validate()?;
    let rule = setup.quadrature.rule(setup.space.lengths, &ShapeFunction::zero(), None)?;
    let p = setup.params;
    assemble_macro(&setup.space, &rule, |x, w| {
        let g = eval_geometry(&setup.chart, x)?;
        let c = ElasticityTensor::new_unchecked(&g.metric_inv, p.lambda, p.mu).as_matrix();
        let sg = StrainGeometry::from(&g);
        let ws = w * g.sqrt_a;
        let mut l = koiter_local(&membrane_rows(&sg), &bending_rows(&sg), &c, &p, ws);
        if !setup.theta.is_zero() {
            let t = m_y_table(&g, &setup.theta, &c) * (ws * p.bending_factor());
            for a in 0..2 {
                for b in 0..2 {
                    l[(a, b)] += t[(a, b)];
                }
            }
        }
        Ok((l, load_vector(force, x, setup.space.lengths, None, ws)))
    })
}

pub fn solve_homogenized(setup: &ShellSetup, force: &ForceDensity) -> Result<MacroSolution> {
    assemble_homogenized(setup, force)?.solve()
}

/// Rows of `d_ab v_3 + a^{rl} d_alb theta(x/eps) v_r / eps`.
fn scaled_second_rows(g: &GeometryAtPoint, theta: &ShapeFunction, x: [f64; 2], eps: f64) -> StrainRows {
    let sv = theta.values([x[0] / eps, x[1] / eps]);
    let mut r = singular_rows(g, &sv);
    for (a, ra) in r.iter_mut().enumerate() {
        for (b, row) in ra.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v /= eps;
            }
            row[ddu3(a, b)] += 1.0;
        }
    }
    r
}

/// Gram matrix of `|v|_eps^2 = |v|_{H1}^2 + sum_ab |d_ab v_3 + eps^-1 a^{rl} d_alb theta v_r|^2`.
pub fn assemble_eps_norm_gram(setup: &ShellSetup, eps: f64) -> Result<DMatrix<f64>> {
    let rule = setup.quadrature.rule(setup.space.lengths, &setup.theta, Some(eps))?;
    let sys = assemble_macro(&setup.space, &rule, |x, w| {
        let g = eval_geometry(&setup.chart, x)?;
        let s = rows_matrix(&scaled_second_rows(&g, &setup.theta, x, eps));
        let mut l: Local12 = s.transpose() * s;
        for k in 0..9 {
            l[(k, k)] += 1.0;
        }
        Ok((l * w, [0.0; 3]))
    })?;
    Ok(sys.matrix)
}

/// Smallest generalized eigenvalue of `(B_eps, |.|_eps^2)` on the macro space.
pub fn coercivity_probe(setup: &ShellSetup, eps: f64) -> Result<f64> {
    let zero = ForceDensity::Constant { value: [0.0; 3] };
    let k = assemble_eps_problem(setup, eps, &zero)?.matrix;
    let g = assemble_eps_norm_gram(setup, eps)?;
    Ok(generalized_eigenvalues(&k, &g, "macro_solver")?[0])
}
