use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

/// Plane-stress shell elasticity tensor
/// `4 lambda mu / (lambda + 2 mu) a^{ab} a^{rs} + 2 mu (a^{ar} a^{bs} + a^{as} a^{br})`
/// built from a contravariant metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityTensor {
    pub lambda: f64,
    pub mu: f64,
    /// `c[alpha][beta][rho][sigma]`.
    pub c: [[[[f64; 2]; 2]; 2]; 2],
}

pub fn check_lame(lambda: f64, mu: f64) -> Result<()> {
    if lambda > 0.0 && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveLame { lambda, mu })
    }
}

impl ElasticityTensor {
    /// Tensor for the contravariant metric `metric_inv`. Feeding the wrinkled
    /// contravariant metric yields the wrinkled tensor of the same form.
    pub fn new(metric_inv: &Matrix2<f64>, lambda: f64, mu: f64) -> Result<Self> {
        check_lame(lambda, mu)?;
        Ok(Self::new_unchecked(metric_inv, lambda, mu))
    }

    pub(crate) fn new_unchecked(g: &Matrix2<f64>, lambda: f64, mu: f64) -> Self {
        let k = 4.0 * lambda * mu / (lambda + 2.0 * mu);
        let mut c = [[[[0.0; 2]; 2]; 2]; 2];
        for (a, ca) in c.iter_mut().enumerate() {
            for (b, cab) in ca.iter_mut().enumerate() {
                for (r, cabr) in cab.iter_mut().enumerate() {
                    for (s, v) in cabr.iter_mut().enumerate() {
                        *v = k * g[(a, b)] * g[(r, s)]
                            + 2.0 * mu * (g[(a, r)] * g[(b, s)] + g[(a, s)] * g[(b, r)]);
                    }
                }
            }
        }
        ElasticityTensor { lambda, mu, c }
    }

    pub fn get(&self, a: usize, b: usize, r: usize, s: usize) -> f64 {
        self.c[a][b][r][s]
    }

    /// The tensor as a 4x4 matrix acting on tensors flattened as
    /// `(11, 12, 21, 22)`, i.e. row `2a+b`, column `2r+s`.
    pub fn as_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.c[i / 2][i % 2][j / 2][j % 2])
    }

    /// `c^{abrs} M_rs M_ab` for a 2x2 tensor.
    pub fn quadratic_form(&self, m: &Matrix2<f64>) -> f64 {
        let mut q = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        q += self.c[a][b][r][s] * m[(r, s)] * m[(a, b)];
                    }
                }
            }
        }
        q
    }

    /// Minimum Rayleigh quotient over symmetric tensors of unit Frobenius norm.
    pub fn min_rayleigh_symmetric(&self) -> f64 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let basis = [
            Matrix2::new(1.0, 0.0, 0.0, 0.0),
            Matrix2::new(0.0, r, r, 0.0),
            Matrix2::new(0.0, 0.0, 0.0, 1.0),
        ];
        let mut g = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut q = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        for rr in 0..2 {
                            for s in 0..2 {
                                q += self.c[a][b][rr][s] * basis[j][(rr, s)] * basis[i][(a, b)];
                            }
                        }
                    }
                }
                g[(i, j)] = q;
            }
        }
        SymmetricEigen::new(g).eigenvalues.min()
    }
}
