//! Truncated bivariate Taylor polynomials ("jets") in the macro variables
//! `(x1, x2)`, used to push exact derivatives through cross products,
//! normalisations and matrix inverses without hand-expanding every chain rule.
//!
//! Coefficients are stored as Taylor coefficients, i.e. `c[(i, j)]` multiplies
//! `dx1^i dx2^j` and equals `d^(i+j) f / (dx1^i dx2^j) / (i! j!)`.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_DEGREE: usize = 4;
const LEN: usize = (MAX_DEGREE + 1) * (MAX_DEGREE + 2) / 2;

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    deg: usize,
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(value: f64, deg: usize) -> Self {
        let mut c = [0.0; LEN];
        c[0] = value;
        Jet { deg, c }
    }

    pub fn zero(deg: usize) -> Self {
        Self::constant(0.0, deg)
    }

    /// Builds a jet from partial derivatives `f(i, j) = d^(i+j) / dx1^i dx2^j`.
    pub fn from_derivatives(deg: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(deg <= MAX_DEGREE);
        let mut c = [0.0; LEN];
        for n in 0..=deg {
            for j in 0..=n {
                let i = n - j;
                c[idx(i, j)] = f(i, j) / (FACT[i] * FACT[j]);
            }
        }
        Jet { deg, c }
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Partial derivative `d^(i+j) / dx1^i dx2^j` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        if i + j > self.deg {
            return 0.0;
        }
        self.c[idx(i, j)] * FACT[i] * FACT[j]
    }

    /// First partial derivative along `axis` (0 or 1) at the expansion point.
    pub fn d1(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.derivative(1, 0)
        } else {
            self.derivative(0, 1)
        }
    }

    pub fn truncate(&self, deg: usize) -> Self {
        let deg = deg.min(self.deg);
        let mut out = Jet::zero(deg);
        let n = (deg + 1) * (deg + 2) / 2;
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    /// Differentiated jet along `axis`; the degree drops by one.
    pub fn diff(&self, axis: usize) -> Self {
        assert!(self.deg >= 1, "cannot differentiate a degree-0 jet");
        let deg = self.deg - 1;
        let mut out = Jet::zero(deg);
        for n in 0..=deg {
            for j in 0..=n {
                let i = n - j;
                out.c[idx(i, j)] = if axis == 0 {
                    (i + 1) as f64 * self.c[idx(i + 1, j)]
                } else {
                    (j + 1) as f64 * self.c[idx(i, j + 1)]
                };
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for v in out.c.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Applies a scalar function given its Taylor derivatives at the value,
    /// `derivs[k] = h^(k)(f0)`.
    fn compose(&self, derivs: &[f64]) -> Self {
        let mut g = *self;
        g.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0], self.deg);
        let mut power = Jet::constant(1.0, self.deg);
        for (k, dk) in derivs.iter().enumerate().take(self.deg + 1).skip(1) {
            power = power * g;
            out = out + power.scale(dk / FACT[k]);
        }
        out
    }

    pub fn recip(&self) -> Self {
        let f0 = self.c[0];
        let mut d = [0.0; MAX_DEGREE + 1];
        // h(t) = 1/t, h^(k) = (-1)^k k! / t^(k+1)
        for (k, dk) in d.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *dk = sign * FACT[k] / f0.powi(k as i32 + 1);
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Self {
        let f0 = self.c[0];
        let mut d = [0.0; MAX_DEGREE + 1];
        // h(t) = t^(1/2): h^(k) = (1/2)(1/2 - 1)...(1/2 - k + 1) t^(1/2 - k)
        let mut coeff = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coeff * f0.powf(0.5 - k as f64);
            coeff *= 0.5 - k as f64;
        }
        self.compose(&d)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let deg = self.deg.min(rhs.deg);
        let mut out = Jet::zero(deg);
        for k in 0..(deg + 1) * (deg + 2) / 2 {
            out.c[k] = self.c[k] + rhs.c[k];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let deg = self.deg.min(rhs.deg);
        let mut out = Jet::zero(deg);
        for n1 in 0..=deg {
            for j1 in 0..=n1 {
                let a = self.c[idx(n1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for n2 in 0..=(deg - n1) {
                    for j2 in 0..=n2 {
                        let i = n1 - j1 + n2 - j2;
                        out.c[idx(i, j1 + j2)] += a * rhs.c[idx(n2 - j2, j2)];
                    }
                }
            }
        }
        out
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// A vector in R^3 whose components are jets.
pub type JetVec = [Jet; 3];

pub fn jv_dot(a: &JetVec, b: &JetVec) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn jv_cross(a: &JetVec, b: &JetVec) -> JetVec {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn jv_scale(a: &JetVec, s: Jet) -> JetVec {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn jv_add(a: &JetVec, b: &JetVec) -> JetVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn jv_diff(a: &JetVec, axis: usize) -> JetVec {
    [a[0].diff(axis), a[1].diff(axis), a[2].diff(axis)]
}

pub fn jv_value(a: &JetVec) -> [f64; 3] {
    [a[0].value(), a[1].value(), a[2].value()]
}

pub fn jv_d1(a: &JetVec, axis: usize) -> [f64; 3] {
    [a[0].d1(axis), a[1].d1(axis), a[2].d1(axis)]
}

pub fn jv_truncate(a: &JetVec, deg: usize) -> JetVec {
    [a[0].truncate(deg), a[1].truncate(deg), a[2].truncate(deg)]
}
