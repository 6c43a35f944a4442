use std::fmt::Write as _;

use nalgebra::Matrix2;

use crate::error::Result;
use crate::surface_geometry::{GeometryAtPoint, ShapeValues};
use crate::wrinkle_geometry::EpsGeometryAtPoint;

use super::rows::*;

/// Membrane strains at one point: exact, limit and the scaled remainder
/// `P = (gamma_eps - gamma + d_ab theta u_3) / eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneStrains {
    pub exact: Matrix2<f64>,
    pub limit: Matrix2<f64>,
    pub residual: Matrix2<f64>,
}

/// Bending strains at one point. `singular` is the coefficient of `1/eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingStrains {
    pub exact: Matrix2<f64>,
    pub limit: Matrix2<f64>,
    pub singular: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub residual: Matrix2<f64>,
}

pub fn membrane_strains(
    u: &LocalData,
    geom_eps: &EpsGeometryAtPoint,
    geom: &GeometryAtPoint,
    sv: &ShapeValues,
) -> MembraneStrains {
    let exact = apply(&membrane_rows(&StrainGeometry::from(geom_eps)), u);
    let limit = apply(&membrane_rows(&StrainGeometry::from(geom)), u);
    let wr = apply(&membrane_wrinkle_rows(sv), u);
    MembraneStrains { exact, limit, residual: (exact - limit - wr) / geom_eps.eps }
}

pub fn bending_strains(
    u: &LocalData,
    geom_eps: &EpsGeometryAtPoint,
    geom: &GeometryAtPoint,
    sv: &ShapeValues,
) -> BendingStrains {
    let eps = geom_eps.eps;
    let exact = apply(&bending_rows(&StrainGeometry::from(geom_eps)), u);
    let limit = apply(&bending_rows(&StrainGeometry::from(geom)), u);
    let singular = apply(&singular_rows(geom, sv), u);
    let q = apply(&q_rows(geom, sv), u);
    BendingStrains { exact, limit, singular, q, residual: (exact - limit - singular / eps - q) / eps }
}

/// Cell-scale strain pieces at `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStrains {
    pub e_y: Matrix2<f64>,
    pub m_y: Matrix2<f64>,
    pub n_y: Matrix2<f64>,
    /// `gamma(v) + e^y(v1)`.
    pub gamma0: Matrix2<f64>,
    /// `Gamma(v) + dy_ab V + N^y(v1) + M^y(v)`.
    pub bending0: Matrix2<f64>,
}

pub fn cell_strain_ops(v: &LocalData, cell: &CellData, geom: &GeometryAtPoint, sv: &ShapeValues) -> CellStrains {
    let sg = StrainGeometry::from(geom);
    let e_y = apply_cell(&e_y_rows(), cell);
    let m_y = apply(&m_y_rows(geom, sv), v);
    let n_y = apply_cell(&n_y_rows(geom, sv), cell);
    let ddv = Matrix2::from_fn(|a, b| cell[cddv(a, b)]);
    CellStrains {
        e_y,
        m_y,
        n_y,
        gamma0: apply(&membrane_rows(&sg), v) + e_y,
        bending0: apply(&bending_rows(&sg), v) + ddv + n_y + m_y,
    }
}

/// Two-scale limits of the membrane and bending strains of the wrinkled shell.
pub fn two_scale_targets(
    u0: &LocalData,
    cell: &CellData,
    geom: &GeometryAtPoint,
    sv: &ShapeValues,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let c = cell_strain_ops(u0, cell, geom, sv);
    let membrane = c.gamma0 + apply(&membrane_wrinkle_rows(sv), u0);
    let bending = c.bending0 + apply(&limit_bending_extra_rows(geom, sv), u0);
    (membrane, bending)
}

/// Rows of the two-scale membrane limit acting on macro data.
pub fn limit_membrane_macro_rows(geom: &GeometryAtPoint, sv: &ShapeValues) -> StrainRows {
    add_rows(&membrane_rows(&StrainGeometry::from(geom)), &membrane_wrinkle_rows(sv), 1.0)
}

/// Rows of the two-scale bending limit acting on macro data (the cell part
/// `dy_ab V + N^y(v1)` is separate).
pub fn limit_bending_macro_rows(geom: &GeometryAtPoint, sv: &ShapeValues) -> StrainRows {
    let r = add_rows(&bending_rows(&StrainGeometry::from(geom)), &m_y_rows(geom, sv), 1.0);
    add_rows(&r, &limit_bending_extra_rows(geom, sv), 1.0)
}

/// CSV snapshot `x1,x2,alpha,beta,value` of a tensor field on a point list.
pub fn strain_snapshot_csv(
    points: &[[f64; 2]],
    mut field: impl FnMut([f64; 2]) -> Result<Matrix2<f64>>,
) -> Result<String> {
    let mut out = String::from("x1,x2,alpha,beta,value\n");
    for &x in points {
        let m = field(x)?;
        for a in 0..2 {
            for b in 0..2 {
                writeln!(out, "{:.12e},{:.12e},{},{},{:.12e}", x[0], x[1], a + 1, b + 1, m[(a, b)]).unwrap();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_geometry::{eval_geometry, ShapeFunction, SurfaceChart};
    use crate::wrinkle_geometry::eval_exact_eps;

    const U: LocalData = [0.3, -0.2, 0.5, 0.1, 0.7, -0.4, 0.2, 0.9, -0.6, 1.1, 0.35, -0.8];

    #[test]
    fn zero_profile_has_no_remainders() {
        let chart = SurfaceChart::QuadraticGraph { k11: 0.6, k12: -0.2, k22: 0.4 };
        let x = [0.4, 0.7];
        let th = ShapeFunction::zero();
        let g = eval_geometry(&chart, x).unwrap();
        let ge = eval_exact_eps(&chart, &th, x, 0.1).unwrap();
        let sv = th.values([4.0, 7.0]);
        let m = membrane_strains(&U, &ge, &g, &sv);
        let b = bending_strains(&U, &ge, &g, &sv);
        assert!((m.exact - m.limit).amax() < 1e-13);
        assert!(m.residual.amax() < 1e-11);
        assert!(b.q.amax() == 0.0 && b.residual.amax() < 1e-10);
    }

    #[test]
    fn decomposition_reassembles_exact_strains() {
        let chart = SurfaceChart::Cylinder { radius: 1.5 };
        let th = ShapeFunction::sin_sin(0.5);
        let x = [0.33, 0.61];
        let eps = 1.0 / 16.0;
        let g = eval_geometry(&chart, x).unwrap();
        let ge = eval_exact_eps(&chart, &th, x, eps).unwrap();
        let sv = th.values(ge.y);
        let m = membrane_strains(&U, &ge, &g, &sv);
        let wr = apply(&membrane_wrinkle_rows(&sv), &U);
        assert!((m.limit + wr + eps * m.residual - m.exact).amax() < 1e-12);
        let b = bending_strains(&U, &ge, &g, &sv);
        assert!((b.limit + b.singular / eps + b.q + eps * b.residual - b.exact).amax() < 1e-10);
    }

    #[test]
    fn flat_plate_cell_ops_termwise() {
        let g = eval_geometry(&SurfaceChart::Plate, [0.2, 0.5]).unwrap();
        let th = ShapeFunction::sin_y1(1.0);
        let y = [0.17, 0.4];
        let sv = th.values(y);
        let cell: CellData = [0.2, -0.7, 0.3, 0.1, -0.5, 0.8, 1.2, -0.3, 0.6];
        let c = cell_strain_ops(&U, &cell, &g, &sv);
        assert!(c.m_y.amax() < 1e-14);
        // hand evaluation with only d_11 theta, d_111 theta nonzero
        let (t11, t111) = (sv.d[2][0], sv.d[3][0]);
        let dv = |r: usize, a: usize| cell[cdv(r, a)];
        let mut n = Matrix2::zeros();
        n[(0, 0)] = t111 * cell[0] + 2.0 * t11 * dv(0, 0);
        n[(0, 1)] = t11 * dv(0, 1);
        n[(1, 0)] = t11 * dv(0, 1);
        assert!((c.n_y - n).amax() < 1e-12);
        let ddu = Matrix2::new(U[9], U[10], U[10], U[11]);
        let ddv = Matrix2::new(cell[6], cell[7], cell[7], cell[8]);
        assert!((c.bending0 - (ddu + ddv + n)).amax() < 1e-12);
        assert_eq!(c.gamma0[(0, 1)], c.gamma0[(1, 0)]);
    }

    #[test]
    fn flat_plate_membrane_target_pointwise() {
        let g = eval_geometry(&SurfaceChart::Plate, [0.2, 0.5]).unwrap();
        let th = ShapeFunction::sin_sin(1.0);
        let sv = th.values([0.3, 0.8]);
        let (m, _) = two_scale_targets(&U, &[0.0; 9], &g, &sv);
        let gam = Matrix2::new(U[3], 0.5 * (U[4] + U[5]), 0.5 * (U[4] + U[5]), U[6]);
        let expect = gam - Matrix2::from_fn(|a, b| sv.d2(a, b)) * U[2];
        assert!((m - expect).amax() < 1e-13);
        let (m0, b0) = two_scale_targets(&[0.0; 12], &[0.0; 9], &g, &sv);
        assert!(m0.amax() == 0.0 && b0.amax() == 0.0);
    }

    #[test]
    fn snapshot_lists_every_component() {
        let csv = strain_snapshot_csv(&[[0.0, 0.0], [0.5, 0.5]], |_| Ok(Matrix2::identity())).unwrap();
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("x1,x2,alpha,beta,value"));
    }
}
