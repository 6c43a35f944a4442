use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::strain_kinematics::{cddv, cdv};

/// Real trigonometric basis of zero-mean `Y`-periodic functions with
/// frequencies in `{-N..N}^2 \ {0}`: one cosine and one sine per frequency of
/// a half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBasis {
    pub truncation: usize,
    /// Half-plane frequencies `k1 > 0` or `k1 = 0, k2 > 0`.
    pub freqs: Vec<[i32; 2]>,
}

impl TrigBasis {
    pub fn new(truncation: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::TruncationTooSmall(truncation));
        }
        let n = truncation as i32;
        let mut freqs = Vec::new();
        for k1 in 0..=n {
            for k2 in -n..=n {
                if k1 > 0 || k2 > 0 {
                    freqs.push([k1, k2]);
                }
            }
        }
        Ok(TrigBasis { truncation, freqs })
    }

    /// Number of real functions, `(2N+1)^2 - 1`.
    pub fn len(&self) -> usize {
        2 * self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Frequency and parity (`false` cosine, `true` sine) of function `j`.
    pub fn mode(&self, j: usize) -> ([i32; 2], bool) {
        (self.freqs[j / 2], j % 2 == 1)
    }

    /// Value, gradient and Hessian of function `j` at `y`.
    pub fn eval(&self, j: usize, y: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let (k, sine) = self.mode(j);
        let w = [2.0 * PI * k[0] as f64, 2.0 * PI * k[1] as f64];
        let (s, c) = (w[0] * y[0] + w[1] * y[1]).sin_cos();
        let (v, dv) = if sine { (s, c) } else { (c, -s) };
        // second derivative of cos is -cos, of sin is -sin
        (v, [w[0] * dv, w[1] * dv], [[-w[0] * w[0] * v, -w[0] * w[1] * v], [-w[1] * w[0] * v, -w[1] * w[1] * v]])
    }

    /// `int_Y phi_j^2 dy`.
    pub fn mass(&self, _j: usize) -> f64 {
        0.5
    }

    /// `|2 pi k|^2`.
    pub fn wave_sq(&self, j: usize) -> f64 {
        let (k, _) = self.mode(j);
        4.0 * PI * PI * (k[0] * k[0] + k[1] * k[1]) as f64
    }
}

/// Unknown layout `(v1_1, v1_2, V)` of a cell problem on a [`TrigBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellBasis {
    pub trig: TrigBasis,
}

/// Sparse cell data of one cell basis function.
#[derive(Debug, Clone, Copy, Default)]
pub struct CellEntry {
    pub idx: [usize; 3],
    pub val: [f64; 3],
}

impl CellBasis {
    pub fn new(truncation: usize) -> Result<Self> {
        Ok(CellBasis { trig: TrigBasis::new(truncation)? })
    }

    pub fn block(&self) -> usize {
        self.trig.len()
    }

    pub fn ndof(&self) -> usize {
        3 * self.block()
    }

    /// Cell data of every unknown at `y`, written into `out`.
    pub fn entries_at(&self, y: [f64; 2], out: &mut [CellEntry]) {
        let nb = self.block();
        for j in 0..nb {
            let (v, d, h) = self.trig.eval(j, y);
            for rho in 0..2 {
                out[rho * nb + j] = CellEntry { idx: [rho, cdv(rho, 0), cdv(rho, 1)], val: [v, d[0], d[1]] };
            }
            out[2 * nb + j] = CellEntry { idx: [cddv(0, 0), cddv(0, 1), cddv(1, 1)], val: [h[0][0], h[0][1], h[1][1]] };
        }
    }

    /// Diagonal of the `|v|_{H1}^2 + sum |dy_ab V|^2` Gram matrix.
    pub fn h_gram_diagonal(&self) -> Vec<f64> {
        let nb = self.block();
        (0..self.ndof())
            .map(|i| {
                let j = i % nb;
                let (m, w2) = (self.trig.mass(j), self.trig.wave_sq(j));
                if i < 2 * nb {
                    m * (1.0 + w2)
                } else {
                    m * w2 * w2
                }
            })
            .collect()
    }
}

/// A zero-mean real periodic field given by its coefficients on a [`TrigBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub basis: TrigBasis,
    pub coeffs: Vec<f64>,
}

impl PeriodicField {
    pub fn zero(basis: TrigBasis) -> Self {
        let n = basis.len();
        PeriodicField { basis, coeffs: vec![0.0; n] }
    }

    pub fn value(&self, y: [f64; 2]) -> f64 {
        self.coeffs.iter().enumerate().map(|(j, c)| c * self.basis.eval(j, y).0).sum()
    }

    pub fn gradient(&self, y: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (j, c) in self.coeffs.iter().enumerate() {
            let d = self.basis.eval(j, y).1;
            g[0] += c * d[0];
            g[1] += c * d[1];
        }
        g
    }

    /// Values on the uniform `m x m` grid `y = (i/m, j/m)`, row-major in `i`.
    pub fn grid_values(&self, m: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(self.value([i as f64 / m as f64, j as f64 / m as f64]));
            }
        }
        out
    }

    /// Complex coefficients `c_k` of `sum_k c_k exp(2 pi i k.y)` over the full
    /// frequency square minus zero, as `(k, re, im)`.
    pub fn complex_coefficients(&self) -> Vec<([i32; 2], f64, f64)> {
        let mut out = Vec::with_capacity(self.basis.len());
        for (q, k) in self.basis.freqs.iter().enumerate() {
            let (a, b) = (self.coeffs[2 * q], self.coeffs[2 * q + 1]);
            out.push((*k, 0.5 * a, -0.5 * b));
            out.push(([-k[0], -k[1]], 0.5 * a, 0.5 * b));
        }
        out.sort_by_key(|(k, _, _)| (k[0], k[1]));
        out
    }

    /// Coefficients whose frequency has `max(|k1|, |k2|) <= n`, as `(k, is_sine, value)`.
    pub fn low_frequency_coefficients(&self, n: usize) -> Vec<([i32; 2], bool, f64)> {
        (0..self.basis.len())
            .filter_map(|j| {
                let (k, s) = self.basis.mode(j);
                (k[0].unsigned_abs() as usize <= n && k[1].unsigned_abs() as usize <= n).then(|| (k, s, self.coeffs[j]))
            })
            .collect()
    }
}
