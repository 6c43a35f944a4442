use nalgebra::{Matrix2, Matrix3};

use crate::error::{Error, Result};
use crate::jet::{jv_add, jv_cross, jv_d1, jv_diff, jv_dot, jv_scale, jv_truncate, jv_value, Jet, JetVec};
use crate::surface_geometry::{base_jets, inverse_2x2, ShapeFunction, ShapeValues, SurfaceChart, A_MIN, V3};

/// Exact geometry of the wrinkled chart `psi + eps^2 theta(x/eps) a_3` at one
/// point. Index conventions follow [`crate::surface_geometry::GeometryAtPoint`].
#[derive(Debug, Clone)]
pub struct EpsGeometryAtPoint {
    pub eps: f64,
    pub x: [f64; 2],
    /// Cell coordinate `x / eps` at which the shape function was sampled.
    pub y: [f64; 2],
    /// `a^eps_1, a^eps_2, a^eps_3`.
    pub a_cov: [V3; 3],
    /// Contravariant basis from the cross-product form of the inverse gradient.
    pub a_contra: [V3; 3],
    /// `|a^eps_1 ^ a^eps_2|`.
    pub sqrt_a: f64,
    pub metric3: Matrix3<f64>,
    pub metric3_inv: Matrix3<f64>,
    pub metric: Matrix2<f64>,
    pub metric_inv: Matrix2<f64>,
    pub b: Matrix2<f64>,
    /// `b_mixed[(beta, alpha)] = b^beta_alpha`.
    pub b_mixed: Matrix2<f64>,
    pub c: Matrix2<f64>,
    pub christoffel: [[[f64; 2]; 2]; 2],
    /// `db_mixed[gamma][(beta, alpha)] = d_gamma b^beta_alpha`.
    pub db_mixed: [Matrix2<f64>; 2],
    /// `d_a3[alpha] = d_alpha a^eps_3`.
    pub d_a3: [V3; 2],
    /// `d_metric_inv[gamma] = d_gamma a_eps^{alpha beta}`.
    pub d_metric_inv: [Matrix2<f64>; 2],
}

fn v3(a: [f64; 3]) -> V3 {
    V3::new(a[0], a[1], a[2])
}

/// Jet in `x` of `theta(x / eps)` built from cell derivatives.
pub(crate) fn scaled_shape_jet(v: &ShapeValues, eps: f64, deg: usize) -> Jet {
    Jet::from_derivatives(deg, |i, j| v.d[i][j] * eps.powi(-((i + j) as i32)))
}

/// Evaluates the wrinkled geometry at `x` with the profile sampled at `x / eps`.
pub fn eval_exact_eps(
    chart: &SurfaceChart,
    theta: &ShapeFunction,
    x: [f64; 2],
    eps: f64,
) -> Result<EpsGeometryAtPoint> {
    let y = [x[0] / eps, x[1] / eps];
    eval_exact_eps_at(chart, &theta.values(y), x, y, eps)
}

/// As [`eval_exact_eps`] with the shape values already evaluated at `y`.
pub fn eval_exact_eps_at(
    chart: &SurfaceChart,
    sv: &ShapeValues,
    x: [f64; 2],
    y: [f64; 2],
    eps: f64,
) -> Result<EpsGeometryAtPoint> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let base = base_jets(chart, x)?;
    let lift = scaled_shape_jet(sv, eps, 3).scale(eps * eps);
    let big_theta: JetVec = jv_add(&jv_truncate(&base.psi, 3), &jv_scale(&base.a3, lift));

    let a = [jv_diff(&big_theta, 0), jv_diff(&big_theta, 1)];
    let n = jv_cross(&a[0], &a[1]);
    let sqrt_a_j = jv_dot(&n, &n).sqrt();
    let norm = sqrt_a_j.value();
    if !(norm >= A_MIN) {
        return Err(Error::DegenerateWrinkledMetric { norm, x1: x[0], x2: x[1], eps });
    }
    let a3 = jv_scale(&n, sqrt_a_j.recip());

    let metric_j: [[Jet; 2]; 2] = [0, 1].map(|i| [0, 1].map(|j| jv_dot(&a[i], &a[j])));
    let inv_j = inverse_2x2(&metric_j);
    let b_j: [[Jet; 2]; 2] = [0, 1].map(|al| [0, 1].map(|be| jv_dot(&a3, &jv_diff(&a[al], be))));
    let bm_j: [[Jet; 2]; 2] = [0, 1].map(|be| {
        [0, 1].map(|al| inv_j[be][0] * b_j[0][al] + inv_j[be][1] * b_j[1][al])
    });

    let a_cov = [v3(jv_value(&a[0])), v3(jv_value(&a[1])), v3(jv_value(&a3))];
    let det = a_cov[0].dot(&a_cov[1].cross(&a_cov[2]));
    let a_contra = [
        a_cov[1].cross(&a_cov[2]) / det,
        a_cov[2].cross(&a_cov[0]) / det,
        a_cov[0].cross(&a_cov[1]) / det,
    ];
    let metric3 = Matrix3::from_fn(|i, j| a_cov[i].dot(&a_cov[j]));
    let metric3_inv = Matrix3::from_fn(|i, j| a_contra[i].dot(&a_contra[j]));

    let m2 = |f: &dyn Fn(usize, usize) -> f64| Matrix2::new(f(0, 0), f(0, 1), f(1, 0), f(1, 1));
    let metric = m2(&|i, j| metric_j[i][j].value());
    let metric_inv = m2(&|i, j| inv_j[i][j].value());
    let b = m2(&|i, j| b_j[i][j].value());
    let b_mixed = m2(&|i, j| bm_j[i][j].value());
    let c = m2(&|al, be| (0..2).map(|l| b_mixed[(l, al)] * b[(l, be)]).sum());

    let d_a_cov = [0, 1].map(|la| [0, 1].map(|be| v3(jv_d1(&a[be], la))));
    let mut christoffel = [[[0.0; 2]; 2]; 2];
    for (rho, chr) in christoffel.iter_mut().enumerate() {
        for (al, row) in chr.iter_mut().enumerate() {
            for (be, v) in row.iter_mut().enumerate() {
                *v = a_contra[rho].dot(&d_a_cov[al][be]);
            }
        }
    }

    Ok(EpsGeometryAtPoint {
        eps,
        x,
        y,
        a_cov,
        a_contra,
        sqrt_a: norm,
        metric3,
        metric3_inv,
        metric,
        metric_inv,
        b,
        b_mixed,
        c,
        christoffel,
        db_mixed: [0, 1].map(|g| m2(&|i, j| bm_j[i][j].d1(g))),
        d_a3: [0, 1].map(|al| v3(jv_d1(&a3, al))),
        d_metric_inv: [0, 1].map(|g| m2(&|i, j| inv_j[i][j].d1(g))),
    })
}

impl EpsGeometryAtPoint {
    /// `max |^eps a^i . a^eps_j - delta_ij|`.
    pub fn duality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.a_contra[i].dot(&self.a_cov[j]) - d).abs());
            }
        }
        worst
    }

    /// `|sqrt(a_eps) - a^eps_1 . (a^eps_2 ^ a^eps_3)|`.
    pub fn determinant_defect(&self) -> f64 {
        (self.sqrt_a - self.a_cov[0].dot(&self.a_cov[1].cross(&self.a_cov[2]))).abs()
    }
}
