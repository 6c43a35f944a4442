//! Strain tensors as linear maps ("rows") acting on the local displacement
//! data at a point. Every strain used by the solvers is assembled from these
//! rows, so a strain value is `rows . data` and a bilinear form integrand is a
//! quadratic form in `data`.

use nalgebra::Matrix2;

use crate::surface_geometry::{GeometryAtPoint, ShapeValues};
use crate::wrinkle_geometry::EpsGeometryAtPoint;

/// Local macro data `(u1, u2, u3, d1 u1, d2 u1, d1 u2, d2 u2, d1 u3, d2 u3,
/// d11 u3, d12 u3, d22 u3)`.
pub type LocalData = [f64; 12];
/// One row per strain component `(alpha, beta)`.
pub type StrainRows = [[[f64; 12]; 2]; 2];

/// Local cell data `(v1_1, v1_2, dy_1 v1_1, dy_2 v1_1, dy_1 v1_2, dy_2 v1_2,
/// dy_11 V, dy_12 V, dy_22 V)`.
pub type CellData = [f64; 9];
pub type CellRows = [[[f64; 9]; 2]; 2];

/// Index of `d_alpha u_i` in [`LocalData`].
pub const fn du(i: usize, alpha: usize) -> usize {
    3 + 2 * i + alpha
}

/// Index of `d_alpha d_beta u_3` in [`LocalData`].
pub const fn ddu3(alpha: usize, beta: usize) -> usize {
    9 + alpha + beta
}

/// Index of `dy_alpha v1_rho` in [`CellData`].
pub const fn cdv(rho: usize, alpha: usize) -> usize {
    2 + 2 * rho + alpha
}

/// Index of `dy_alpha dy_beta V` in [`CellData`].
pub const fn cddv(alpha: usize, beta: usize) -> usize {
    6 + alpha + beta
}

/// The geometric coefficients entering the membrane and bending strains.
#[derive(Debug, Clone, Copy)]
pub struct StrainGeometry {
    pub christoffel: [[[f64; 2]; 2]; 2],
    pub b: Matrix2<f64>,
    pub b_mixed: Matrix2<f64>,
    pub c: Matrix2<f64>,
    pub db_mixed: [Matrix2<f64>; 2],
}

impl From<&GeometryAtPoint> for StrainGeometry {
    fn from(g: &GeometryAtPoint) -> Self {
        StrainGeometry { christoffel: g.christoffel, b: g.b, b_mixed: g.b_mixed, c: g.c, db_mixed: g.db_mixed }
    }
}

impl From<&EpsGeometryAtPoint> for StrainGeometry {
    fn from(g: &EpsGeometryAtPoint) -> Self {
        StrainGeometry { christoffel: g.christoffel, b: g.b, b_mixed: g.b_mixed, c: g.c, db_mixed: g.db_mixed }
    }
}

pub fn zero_rows() -> StrainRows {
    [[[0.0; 12]; 2]; 2]
}

pub fn apply(rows: &StrainRows, data: &LocalData) -> Matrix2<f64> {
    Matrix2::from_fn(|a, b| rows[a][b].iter().zip(data).map(|(r, d)| r * d).sum())
}

pub fn apply_cell(rows: &CellRows, data: &CellData) -> Matrix2<f64> {
    Matrix2::from_fn(|a, b| rows[a][b].iter().zip(data).map(|(r, d)| r * d).sum())
}

pub fn add_rows(a: &StrainRows, b: &StrainRows, scale: f64) -> StrainRows {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..12 {
                out[i][j][k] += scale * b[i][j][k];
            }
        }
    }
    out
}

/// `gamma_ab = (d_a u_b + d_b u_a)/2 - Gamma^r_ab u_r - b_ab u_3`.
pub fn membrane_rows(g: &StrainGeometry) -> StrainRows {
    let mut r = zero_rows();
    for a in 0..2 {
        for b in 0..2 {
            let row = &mut r[a][b];
            row[du(b, a)] += 0.5;
            row[du(a, b)] += 0.5;
            for rho in 0..2 {
                row[rho] -= g.christoffel[rho][a][b];
            }
            row[2] -= g.b[(a, b)];
        }
    }
    r
}

/// Linearised change of curvature of the Koiter model.
pub fn bending_rows(g: &StrainGeometry) -> StrainRows {
    let chr = &g.christoffel;
    let bm = |rho: usize, a: usize| g.b_mixed[(rho, a)];
    let mut r = zero_rows();
    for a in 0..2 {
        for b in 0..2 {
            let row = &mut r[a][b];
            row[ddu3(a, b)] += 1.0;
            for rho in 0..2 {
                row[du(2, rho)] -= chr[rho][a][b];
            }
            for rho in 0..2 {
                row[du(rho, a)] += bm(rho, b);
                row[du(rho, b)] += bm(rho, a);
                for s in 0..2 {
                    row[s] -= bm(rho, b) * chr[s][rho][a];
                    row[s] -= bm(rho, a) * chr[s][rho][b];
                }
            }
            row[2] -= g.c[(a, b)];
            for rho in 0..2 {
                let mut coef = g.db_mixed[a][(rho, b)];
                for s in 0..2 {
                    coef += chr[rho][a][s] * bm(s, b) - chr[s][a][b] * bm(rho, s);
                }
                row[rho] += coef;
            }
        }
    }
    r
}

/// `-d_ab theta u_3`, the leading wrinkle term of the membrane strain.
pub fn membrane_wrinkle_rows(v: &ShapeValues) -> StrainRows {
    let mut r = zero_rows();
    for a in 0..2 {
        for b in 0..2 {
            r[a][b][2] = -v.d2(a, b);
        }
    }
    r
}

/// `a^{rl} d_alb theta u_r`, the coefficient of `1/eps` in the bending strain.
pub fn singular_rows(g: &GeometryAtPoint, v: &ShapeValues) -> StrainRows {
    let mut r = zero_rows();
    for a in 0..2 {
        for b in 0..2 {
            for rho in 0..2 {
                r[a][b][rho] = (0..2).map(|l| g.metric_inv[(rho, l)] * v.d3(a, l, b)).sum();
            }
        }
    }
    r
}

/// `w_alpha = (d_a2 theta k_13 + d_a1 theta k_32) / sqrt(a)`.
fn wrinkle_normal_shift(g: &GeometryAtPoint, v: &ShapeValues, a: usize) -> crate::surface_geometry::V3 {
    (g.k[0][2] * v.d2(a, 1) + g.k[2][1] * v.d2(a, 0)) / g.sqrt_a
}

/// Zeroth-order wrinkle correction `Q^eps` of the bending strain, as displayed
/// with the decomposition; the vector-valued last term is read as a dot product
/// with `d_lambda a_beta`.
pub fn q_rows(g: &GeometryAtPoint, v: &ShapeValues) -> StrainRows {
    let ai = &g.metric_inv;
    let chr = &g.christoffel;
    let mut r = zero_rows();
    for a in 0..2 {
        let w = wrinkle_normal_shift(g, v, a);
        for b in 0..2 {
            let row = &mut r[a][b];
            for rho in 0..2 {
                for l in 0..2 {
                    row[du(rho, a)] += ai[(rho, l)] * v.d2(l, b);
                    row[du(rho, b)] += ai[(rho, l)] * v.d2(l, a);
                    row[2] -= ai[(l, rho)] * v.d2(rho, a) * v.d2(l, b);
                    row[rho] += g.d_metric_inv[a][(rho, l)] * v.d2(l, b);
                    for s in 0..2 {
                        row[rho] -= ai[(rho, l)] * v.d2(l, s) * chr[s][a][b];
                        row[s] -= ai[(rho, l)] * v.d2(l, a) * chr[s][rho][b];
                    }
                    row[rho] += w.dot(&g.d_a_cov[l][b]) * ai[(rho, l)];
                }
            }
            for l in 0..2 {
                row[2] -= g.b_mixed[(l, a)] * v.d2(l, b) + g.b_mixed[(l, b)] * v.d2(l, a);
            }
        }
    }
    r
}

/// Cell-scale correction `M^y` acting on the macro displacement.
pub fn m_y_rows(g: &GeometryAtPoint, v: &ShapeValues) -> StrainRows {
    let ai = &g.metric_inv;
    let chr = &g.christoffel;
    let mut r = zero_rows();
    for a in 0..2 {
        let w = wrinkle_normal_shift(g, v, a);
        for b in 0..2 {
            let row = &mut r[a][b];
            for rho in 0..2 {
                for l in 0..2 {
                    for s in 0..2 {
                        row[s] -= ai[(rho, l)] * v.d2(l, a) * chr[s][rho][b];
                    }
                    row[rho] += g.d_metric_inv[a][(rho, l)] * v.d2(l, b);
                    row[rho] -= g.d_metric_inv[b][(rho, l)] * v.d2(a, l);
                    row[rho] += w.dot(&g.d_a_cov[l][b]) * ai[(rho, l)];
                }
            }
        }
    }
    r
}

/// Extra `u_3` terms of the two-scale bending limit:
/// `-a^{lr} d_ra theta d_lb theta u_3 - (b^l_a d_lb theta + b^r_b d_ra theta) u_3`.
pub fn limit_bending_extra_rows(g: &GeometryAtPoint, v: &ShapeValues) -> StrainRows {
    let mut r = zero_rows();
    for a in 0..2 {
        for b in 0..2 {
            let mut c = 0.0;
            for l in 0..2 {
                for rho in 0..2 {
                    c -= g.metric_inv[(l, rho)] * v.d2(rho, a) * v.d2(l, b);
                }
                c -= g.b_mixed[(l, a)] * v.d2(l, b) + g.b_mixed[(l, b)] * v.d2(l, a);
            }
            r[a][b][2] = c;
        }
    }
    r
}

/// `e^y_ab(v1) = (dy_a v1_b + dy_b v1_a) / 2`.
pub fn e_y_rows() -> CellRows {
    let mut r = [[[0.0; 9]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            r[a][b][cdv(b, a)] += 0.5;
            r[a][b][cdv(a, b)] += 0.5;
        }
    }
    r
}

/// `N^y` acting on the in-plane corrector.
pub fn n_y_rows(g: &GeometryAtPoint, v: &ShapeValues) -> CellRows {
    let ai = &g.metric_inv;
    let mut r = [[[0.0; 9]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let row = &mut r[a][b];
            for rho in 0..2 {
                for l in 0..2 {
                    row[rho] += ai[(rho, l)] * v.d3(a, l, b);
                    row[cdv(rho, a)] += ai[(rho, l)] * v.d2(l, b);
                    row[cdv(rho, b)] += ai[(rho, l)] * v.d2(l, a);
                }
                row[cdv(rho, a)] += g.b_mixed[(rho, b)];
                row[cdv(rho, b)] += g.b_mixed[(rho, a)];
            }
        }
    }
    r
}

/// `dy_ab V + N^y(v1)`: the cell part of the two-scale bending strain.
pub fn cell_bending_rows(g: &GeometryAtPoint, v: &ShapeValues) -> CellRows {
    let mut r = n_y_rows(g, v);
    for a in 0..2 {
        for b in 0..2 {
            r[a][b][cddv(a, b)] += 1.0;
        }
    }
    r
}
