use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::cell_solver::{PeriodicField, TrigBasis};
use crate::error::Result;
use crate::macro_solver::DisplacementField;
use crate::quadrature::Rule1d;
use crate::surface_geometry::{eval_geometry, ShapeFunction, SurfaceChart};

pub const CORRECTOR_TOL: f64 = 1e-10;

/// `d_1 theta` and `d_2 theta` as periodic fields, read off the
/// trigonometric series of the profile.
pub fn shape_gradient_fields(theta: &ShapeFunction) -> Result<[PeriodicField; 2]> {
    let basis = TrigBasis::new(theta.max_frequency().max(1))?;
    let mut out = [PeriodicField::zero(basis.clone()), PeriodicField::zero(basis.clone())];
    for t in &theta.terms {
        if t.k1 == 0 && t.k2 == 0 {
            continue;
        }
        let (k, flip) = if t.k1 > 0 || (t.k1 == 0 && t.k2 > 0) { ([t.k1, t.k2], 1.0) } else { ([-t.k1, -t.k2], -1.0) };
        let q = basis.freqs.iter().position(|f| *f == k).expect("frequency inside truncation");
        // d(c cos + s sin)(2 pi k.y) = 2 pi k_l (s cos - c sin); flipping k flips the sine
        for (l, field) in out.iter_mut().enumerate() {
            let w = 2.0 * PI * [t.k1, t.k2][l] as f64;
            field.coeffs[2 * q] += w * t.sin_amp;
            field.coeffs[2 * q + 1] -= w * t.cos_amp * flip;
        }
    }
    Ok(out)
}

/// `u1_3(x, .) = -a^{rl}(x) d_l theta u0_r(x)` as a periodic field.
pub fn deflection_corrector(metric_inv: &Matrix2<f64>, grads: &[PeriodicField; 2], u0_tangential: [f64; 2]) -> PeriodicField {
    let mut out = PeriodicField::zero(grads[0].basis.clone());
    for r in 0..2 {
        for l in 0..2 {
            let s = -metric_inv[(r, l)] * u0_tangential[r];
            for (o, g) in out.coeffs.iter_mut().zip(&grads[l].coeffs) {
                *o += s * g;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorCheck {
    pub samples: usize,
    /// Largest `|dy_a u1_3 + a^{rl} d_al theta u0_r|`.
    pub max_identity_defect: f64,
    /// Largest difference between the series and the pointwise formula.
    pub max_value_defect: f64,
    /// Largest `|<u1_3(x, .)>|`.
    pub max_mean: f64,
    pub pass: bool,
}

impl CorrectorCheck {
    fn merge(&mut self, o: &CorrectorCheck) {
        self.samples += o.samples;
        self.max_identity_defect = self.max_identity_defect.max(o.max_identity_defect);
        self.max_value_defect = self.max_value_defect.max(o.max_value_defect);
        self.max_mean = self.max_mean.max(o.max_mean);
        self.pass &= o.pass;
    }
}

/// Checks the deflection-corrector identity for `u0` at the given macro points
/// on the uniform `m x m` cell grid: the spectral `y`-gradient of the series
/// against the pointwise second derivatives of the profile, and the zero cell
/// mean of the pointwise formula.
pub fn corrector_check(
    u0: &DisplacementField,
    chart: &SurfaceChart,
    theta: &ShapeFunction,
    x_samples: &[[f64; 2]],
    m: usize,
) -> Result<CorrectorCheck> {
    let grads = shape_gradient_fields(theta)?;
    let yr = Rule1d::periodic_uniform(m.max(2 * theta.max_frequency() + 2));
    let mut rep = CorrectorCheck { samples: 0, max_identity_defect: 0.0, max_value_defect: 0.0, max_mean: 0.0, pass: true };
    for &x in x_samples {
        let g = eval_geometry(chart, x)?;
        let d = u0.eval(x);
        let ut = [d[0], d[1]];
        let u13 = deflection_corrector(&g.metric_inv, &grads, ut);
        let mut mean = 0.0;
        for (&y1, &w1) in yr.nodes.iter().zip(&yr.weights) {
            for (&y2, &w2) in yr.nodes.iter().zip(&yr.weights) {
                let y = [y1, y2];
                let sv = theta.values(y);
                let mut direct = 0.0;
                for r in 0..2 {
                    for l in 0..2 {
                        direct -= g.metric_inv[(r, l)] * sv.d1(l) * ut[r];
                    }
                }
                mean += w1 * w2 * direct;
                rep.max_value_defect = rep.max_value_defect.max((u13.value(y) - direct).abs());
                let grad = u13.gradient(y);
                for (a, ga) in grad.iter().enumerate() {
                    let mut rhs = 0.0;
                    for r in 0..2 {
                        for l in 0..2 {
                            rhs -= g.metric_inv[(r, l)] * sv.d2(a, l) * ut[r];
                        }
                    }
                    rep.max_identity_defect = rep.max_identity_defect.max((ga - rhs).abs());
                }
                rep.samples += 1;
            }
        }
        rep.max_mean = rep.max_mean.max(mean.abs());
    }
    rep.pass = rep.max_identity_defect <= CORRECTOR_TOL && rep.max_value_defect <= CORRECTOR_TOL && rep.max_mean <= CORRECTOR_TOL;
    Ok(rep)
}

/// [`corrector_check`] for every basis function of the macro space.
pub fn corrector_check_basis(
    space: crate::macro_solver::MacroSpace,
    chart: &SurfaceChart,
    theta: &ShapeFunction,
    x_samples: &[[f64; 2]],
    m: usize,
) -> Result<CorrectorCheck> {
    let mut total = CorrectorCheck { samples: 0, max_identity_defect: 0.0, max_value_defect: 0.0, max_mean: 0.0, pass: true };
    for k in 0..space.ndof() {
        let mut u = DisplacementField::zero(space);
        u.coeffs[k] = 1.0;
        total.merge(&corrector_check(&u, chart, theta, x_samples, m)?);
    }
    Ok(total)
}
