use nalgebra::{Matrix2, Vector3};

use crate::error::{Error, Result};
use crate::jet::{jv_add, jv_cross, jv_d1, jv_diff, jv_dot, jv_scale, jv_value, Jet, JetVec};

use super::chart::SurfaceChart;

/// Immersion threshold on `sqrt(a)`.
pub const A_MIN: f64 = 1e-8;

pub type V3 = Vector3<f64>;

/// Geometry of the unwrinkled mid-surface at one point. Indices are 0-based:
/// `christoffel[rho][alpha][beta]` is `Gamma^rho_{alpha beta}`,
/// `b_mixed[beta][alpha]` is `b^beta_alpha`, and derivative arrays put the
/// differentiation index first.
#[derive(Debug, Clone)]
pub struct GeometryAtPoint {
    pub x: [f64; 2],
    pub a_cov: [V3; 2],
    pub a3: V3,
    pub a_contra: [V3; 2],
    pub metric: Matrix2<f64>,
    pub metric_inv: Matrix2<f64>,
    pub sqrt_a: f64,
    pub b: Matrix2<f64>,
    /// `b_mixed[(beta, alpha)] = b^beta_alpha`.
    pub b_mixed: Matrix2<f64>,
    pub c: Matrix2<f64>,
    pub christoffel: [[[f64; 2]; 2]; 2],
    /// `db_mixed[gamma][(beta, alpha)] = d_gamma b^beta_alpha`.
    pub db_mixed: [Matrix2<f64>; 2],
    /// `k[i][j] = a_i ^ a_j` (with `a_3` the unit normal).
    pub k: [[V3; 3]; 3],
    /// `ell[i][alpha] = a_i ^ d_alpha a_3`.
    pub ell: [[V3; 2]; 3],
    /// `m = d_1 a_3 ^ d_2 a_3`.
    pub m: V3,
    pub d_metric: [Matrix2<f64>; 2],
    pub d_metric_inv: [Matrix2<f64>; 2],
    pub d_sqrt_a: [f64; 2],
    /// `d_a_cov[lambda][beta] = d_lambda a_beta`.
    pub d_a_cov: [[V3; 2]; 2],
    /// `d_a3[alpha] = d_alpha a_3`.
    pub d_a3: [V3; 2],
    /// `d_a_contra[gamma][alpha] = d_gamma a^alpha`.
    pub d_a_contra: [[V3; 2]; 2],
}

/// Jets of the chart and its unit normal about one point, shared with the
/// wrinkled-geometry evaluator.
#[derive(Debug, Clone)]
pub struct BaseJets {
    /// Chart jet of degree 4.
    pub psi: JetVec,
    /// Tangent jets of degree 3.
    pub a_cov: [JetVec; 2],
    /// Unit normal jet of degree 3.
    pub a3: JetVec,
    pub sqrt_a: Jet,
}

pub fn base_jets(chart: &SurfaceChart, x: [f64; 2]) -> Result<BaseJets> {
    let psi = chart.jet(x, 4);
    let a1 = jv_diff(&psi, 0);
    let a2 = jv_diff(&psi, 1);
    let n = jv_cross(&a1, &a2);
    let sqrt_a = jv_dot(&n, &n).sqrt();
    if !(sqrt_a.value() >= A_MIN) {
        return Err(Error::DegenerateMetric {
            sqrt_a: sqrt_a.value(),
            threshold: A_MIN,
            x1: x[0],
            x2: x[1],
        });
    }
    let a3 = jv_scale(&n, sqrt_a.recip());
    Ok(BaseJets { psi, a_cov: [a1, a2], a3, sqrt_a })
}

fn v3(a: [f64; 3]) -> V3 {
    V3::new(a[0], a[1], a[2])
}

/// 2x2 inverse of a symmetric jet matrix.
pub(crate) fn inverse_2x2(m: &[[Jet; 2]; 2]) -> [[Jet; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = det.recip();
    [[m[1][1] * inv, -(m[0][1] * inv)], [-(m[1][0] * inv), m[0][0] * inv]]
}

/// Evaluates the unwrinkled geometry of `chart` at `x`.
pub fn eval_geometry(chart: &SurfaceChart, x: [f64; 2]) -> Result<GeometryAtPoint> {
    let jets = base_jets(chart, x)?;
    let [a1, a2] = &jets.a_cov;
    let a = [a1.clone(), a2.clone()];
    let a3 = &jets.a3;

    let metric_j: [[Jet; 2]; 2] = [
        [jv_dot(&a[0], &a[0]), jv_dot(&a[0], &a[1])],
        [jv_dot(&a[1], &a[0]), jv_dot(&a[1], &a[1])],
    ];
    let inv_j = inverse_2x2(&metric_j);
    let contra_j: [JetVec; 2] = [0, 1].map(|al| {
        jv_add(&jv_scale(&a[0], inv_j[al][0]), &jv_scale(&a[1], inv_j[al][1]))
    });
    // b_{alpha beta} = a_3 . d_beta a_alpha
    let b_j: [[Jet; 2]; 2] =
        [0, 1].map(|al| [0, 1].map(|be| jv_dot(a3, &jv_diff(&a[al], be))));
    // b^beta_alpha = a^{beta rho} b_{rho alpha}
    let bm_j: [[Jet; 2]; 2] = [0, 1].map(|be| {
        [0, 1].map(|al| inv_j[be][0] * b_j[0][al] + inv_j[be][1] * b_j[1][al])
    });

    let m2 = |f: &dyn Fn(usize, usize) -> f64| Matrix2::new(f(0, 0), f(0, 1), f(1, 0), f(1, 1));

    let a_cov = [v3(jv_value(&a[0])), v3(jv_value(&a[1]))];
    let a3v = v3(jv_value(a3));
    let a_contra = [v3(jv_value(&contra_j[0])), v3(jv_value(&contra_j[1]))];
    let metric = m2(&|i, j| metric_j[i][j].value());
    let metric_inv = m2(&|i, j| inv_j[i][j].value());
    let b = m2(&|i, j| b_j[i][j].value());
    let b_mixed = m2(&|i, j| bm_j[i][j].value());
    let c = m2(&|al, be| (0..2).map(|l| b_mixed[(l, al)] * b[(l, be)]).sum());
    let d_a_cov = [0, 1].map(|la| [0, 1].map(|be| v3(jv_d1(&a[be], la))));
    let d_a3 = [0, 1].map(|al| v3(jv_d1(a3, al)));
    let d_a_contra = [0, 1].map(|g| [0, 1].map(|al| v3(jv_d1(&contra_j[al], g))));

    let mut christoffel = [[[0.0; 2]; 2]; 2];
    for (rho, chr) in christoffel.iter_mut().enumerate() {
        for (al, row) in chr.iter_mut().enumerate() {
            for (be, v) in row.iter_mut().enumerate() {
                *v = a_contra[rho].dot(&d_a_cov[al][be]);
            }
        }
    }
    let db_mixed = [0, 1].map(|g| m2(&|i, j| bm_j[i][j].d1(g)));

    let basis = [a_cov[0], a_cov[1], a3v];
    let mut k = [[V3::zeros(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = basis[i].cross(&basis[j]);
        }
    }
    let ell = [0, 1, 2].map(|i| [0, 1].map(|al| basis[i].cross(&d_a3[al])));
    let m = d_a3[0].cross(&d_a3[1]);

    Ok(GeometryAtPoint {
        x,
        a_cov,
        a3: a3v,
        a_contra,
        metric,
        metric_inv,
        sqrt_a: jets.sqrt_a.value(),
        b,
        b_mixed,
        c,
        christoffel,
        db_mixed,
        k,
        ell,
        m,
        d_metric: [0, 1].map(|g| m2(&|i, j| metric_j[i][j].d1(g))),
        d_metric_inv: [0, 1].map(|g| m2(&|i, j| inv_j[i][j].d1(g))),
        d_sqrt_a: [jets.sqrt_a.d1(0), jets.sqrt_a.d1(1)],
        d_a_cov,
        d_a3,
        d_a_contra,
    })
}

impl GeometryAtPoint {
    /// Mean curvature `H = b^alpha_alpha / 2`.
    pub fn mean_curvature(&self) -> f64 {
        0.5 * self.b_mixed.trace()
    }

    /// Gaussian curvature `K = det(b^beta_alpha)`.
    pub fn gauss_curvature(&self) -> f64 {
        self.b_mixed.determinant()
    }

    /// `b^{alpha beta} = a^{alpha sigma} b^beta_sigma`.
    pub fn b_contra(&self) -> Matrix2<f64> {
        self.metric_inv * self.b * self.metric_inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHARTS: [SurfaceChart; 4] = [
        SurfaceChart::Plate,
        SurfaceChart::Cylinder { radius: 1.0 },
        SurfaceChart::QuadraticGraph { k11: 1.0, k12: 0.25, k22: -0.4 },
        SurfaceChart::TrigGraph { amp: 0.15, k1: 3.0, k2: 2.0 },
    ];

    #[test]
    fn flat_plate_is_the_identity() {
        let g = eval_geometry(&SurfaceChart::Plate, [0.4, 0.7]).unwrap();
        assert_eq!(g.metric, Matrix2::identity());
        assert_eq!(g.sqrt_a, 1.0);
        assert_eq!(g.b, Matrix2::zeros());
        assert!(g.christoffel.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(g.a3, V3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn cylinder_at_origin_closed_form() {
        let g = eval_geometry(&SurfaceChart::Cylinder { radius: 1.0 }, [0.0, 0.0]).unwrap();
        assert!((g.metric - Matrix2::identity()).amax() < 1e-14);
        assert!((g.sqrt_a - 1.0).abs() < 1e-14);
        assert!((g.a3 - V3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
        assert!((g.b[(0, 0)] + 1.0).abs() < 1e-14);
        assert!(g.b[(0, 1)].abs() < 1e-14 && g.b[(1, 1)].abs() < 1e-14);
    }

    #[test]
    fn parabolic_graph_at_origin() {
        let chart = SurfaceChart::QuadraticGraph { k11: 1.0, k12: 0.0, k22: 0.0 };
        let g = eval_geometry(&chart, [0.0, 0.0]).unwrap();
        assert!((g.metric[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((g.a3 - V3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
        assert!((g.b[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(g.b[(0, 1)].abs() < 1e-14 && g.b[(1, 1)].abs() < 1e-14);
    }

    /// Curvature from finite differences of psi only.
    fn fd_second_form(chart: &SurfaceChart, x: [f64; 2], h: f64) -> Matrix2<f64> {
        let p = |dx: f64, dy: f64| chart.derivative([x[0] + dx, x[1] + dy], 0, 0);
        let a1 = (p(h, 0.0) - p(-h, 0.0)) / (2.0 * h);
        let a2 = (p(0.0, h) - p(0.0, -h)) / (2.0 * h);
        let n = a1.cross(&a2).normalize();
        let p11 = (p(h, 0.0) - 2.0 * p(0.0, 0.0) + p(-h, 0.0)) / (h * h);
        let p22 = (p(0.0, h) - 2.0 * p(0.0, 0.0) + p(0.0, -h)) / (h * h);
        let p12 = (p(h, h) - p(h, -h) - p(-h, h) + p(-h, -h)) / (4.0 * h * h);
        Matrix2::new(n.dot(&p11), n.dot(&p12), n.dot(&p12), n.dot(&p22))
    }

    #[test]
    fn second_form_agrees_with_finite_differences() {
        for chart in CHARTS {
            let x = [0.21, 0.43];
            let g = eval_geometry(&chart, x).unwrap();
            let fd = fd_second_form(&chart, x, 1e-4);
            assert!((g.b - fd).amax() < 1e-6, "{}", chart.id());
        }
    }

    #[test]
    fn invariants_hold_on_random_points() {
        let mut s = 0.123_f64;
        let mut next = || {
            s = (s * 9301.0 + 0.49297).fract();
            s
        };
        for chart in CHARTS {
            for _ in 0..250 {
                let x = [next(), next()];
                let g = eval_geometry(&chart, x).unwrap();
                assert!((g.metric_inv * g.metric - Matrix2::identity()).amax() < 1e-12);
                assert!((g.a3.norm() - 1.0).abs() < 1e-12);
                for al in 0..2 {
                    assert!(g.a3.dot(&g.a_cov[al]).abs() < 1e-12);
                    let d2 = if al == 1 { 1.0 } else { 0.0 };
                    let d1 = 1.0 - d2;
                    assert!((g.a_cov[al].dot(&g.k[0][2]) + g.sqrt_a * d2).abs() < 1e-12);
                    assert!((g.a_cov[al].dot(&g.k[2][1]) + g.sqrt_a * d1).abs() < 1e-12);
                }
                assert!((g.b - g.b.transpose()).amax() < 1e-12);
                let c = g.b_mixed.transpose() * g.b;
                assert!((g.c - c).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn metric_gradients_converge_at_second_order() {
        let chart = SurfaceChart::TrigGraph { amp: 0.15, k1: 3.0, k2: 2.0 };
        let x = [0.3, 0.6];
        let g = eval_geometry(&chart, x).unwrap();
        let steps = [4e-2, 2e-2, 1e-2, 5e-3];
        let mut errs = Vec::new();
        for h in steps {
            let p = eval_geometry(&chart, [x[0] + h, x[1]]).unwrap();
            let m = eval_geometry(&chart, [x[0] - h, x[1]]).unwrap();
            let fd_a = (p.metric - m.metric) / (2.0 * h);
            let fd_b = (p.b_mixed - m.b_mixed) / (2.0 * h);
            errs.push((fd_a - g.d_metric[0]).amax().max((fd_b - g.db_mixed[0]).amax()));
        }
        let slope = crate::linalg::loglog_slope(&steps, &errs);
        assert!(slope >= 1.8, "slope {slope}");
    }

    #[test]
    fn degenerate_chart_is_reported() {
        // zero radius produces non-finite tangents
        let chart = SurfaceChart::Cylinder { radius: 0.0 };
        assert!(matches!(eval_geometry(&chart, [0.0, 0.0]), Err(Error::DegenerateMetric { .. })));
    }
}
