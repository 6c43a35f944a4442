use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term `cos_amp * cos(2 pi k.y) + sin_amp * sin(2 pi k.y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k1: i32,
    pub k2: i32,
    #[serde(default)]
    pub cos_amp: f64,
    #[serde(default)]
    pub sin_amp: f64,
}

/// Y-periodic wrinkle profile as a finite trigonometric series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeFunction {
    pub terms: Vec<TrigTerm>,
}

/// All partial derivatives of the shape function up to order three at one
/// point of the cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShapeValues {
    /// Indexed by `[i][j]` for `d^(i+j) / dy1^i dy2^j`; entries with
    /// `i + j > 3` are zero.
    pub d: [[f64; 4]; 4],
}

impl ShapeValues {
    pub fn value(&self) -> f64 {
        self.d[0][0]
    }

    /// `d_alpha theta` with 0-based alpha.
    pub fn d1(&self, a: usize) -> f64 {
        if a == 0 {
            self.d[1][0]
        } else {
            self.d[0][1]
        }
    }

    /// `d_alpha d_beta theta`.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        let (i, j) = counts(&[a, b]);
        self.d[i][j]
    }

    /// `d_alpha d_beta d_gamma theta`.
    pub fn d3(&self, a: usize, b: usize, c: usize) -> f64 {
        let (i, j) = counts(&[a, b, c]);
        self.d[i][j]
    }

    /// `c_alpha = theta d_alpha theta`.
    pub fn c(&self, a: usize) -> f64 {
        self.value() * self.d1(a)
    }
}

fn counts(axes: &[usize]) -> (usize, usize) {
    let j = axes.iter().filter(|&&a| a == 1).count();
    (axes.len() - j, j)
}

impl ShapeFunction {
    pub fn zero() -> Self {
        ShapeFunction { terms: Vec::new() }
    }

    pub fn new(terms: Vec<TrigTerm>) -> Self {
        ShapeFunction { terms }
    }

    /// `amp * sin(2 pi y1)`.
    pub fn sin_y1(amp: f64) -> Self {
        Self::new(vec![TrigTerm { k1: 1, k2: 0, cos_amp: 0.0, sin_amp: amp }])
    }

    /// `amp * sin(2 pi y1) sin(2 pi y2)`, written as a difference of cosines.
    pub fn sin_sin(amp: f64) -> Self {
        Self::new(vec![
            TrigTerm { k1: 1, k2: -1, cos_amp: 0.5 * amp, sin_amp: 0.0 },
            TrigTerm { k1: 1, k2: 1, cos_amp: -0.5 * amp, sin_amp: 0.0 },
        ])
    }

    /// `amp * (sin(2 pi y1) + sin(2 pi y2))`.
    pub fn sin_plus_sin(amp: f64) -> Self {
        Self::new(vec![
            TrigTerm { k1: 1, k2: 0, cos_amp: 0.0, sin_amp: amp },
            TrigTerm { k1: 0, k2: 1, cos_amp: 0.0, sin_amp: amp },
        ])
    }

    /// The profile `y -> theta(y + shift)`.
    pub fn shifted(&self, shift: [f64; 2]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let phi = 2.0 * PI * (t.k1 as f64 * shift[0] + t.k2 as f64 * shift[1]);
                let (s, c) = phi.sin_cos();
                TrigTerm {
                    k1: t.k1,
                    k2: t.k2,
                    cos_amp: t.cos_amp * c + t.sin_amp * s,
                    sin_amp: t.sin_amp * c - t.cos_amp * s,
                }
            })
            .collect();
        ShapeFunction { terms }
    }

    /// Whether any term oscillates along `y_axis`.
    pub fn depends_on(&self, axis: usize) -> bool {
        self.terms.iter().any(|t| {
            (t.cos_amp != 0.0 || t.sin_amp != 0.0) && if axis == 0 { t.k1 != 0 } else { t.k2 != 0 }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.cos_amp == 0.0 && t.sin_amp == 0.0)
    }

    /// Largest `max(|k1|, |k2|)` over terms with nonzero amplitude.
    pub fn max_frequency(&self) -> usize {
        self.terms
            .iter()
            .filter(|t| t.cos_amp != 0.0 || t.sin_amp != 0.0)
            .map(|t| t.k1.unsigned_abs().max(t.k2.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Shape values and derivatives up to `order` (at most 3) at `y`.
    pub fn eval(&self, y: [f64; 2], order: usize) -> Result<ShapeValues> {
        if order > 3 {
            return Err(Error::OrderTooHigh(order));
        }
        Ok(self.eval_to(y, order))
    }

    /// All derivatives up to order three.
    pub fn values(&self, y: [f64; 2]) -> ShapeValues {
        self.eval_to(y, 3)
    }

    fn eval_to(&self, y: [f64; 2], order: usize) -> ShapeValues {
        let mut out = ShapeValues::default();
        for t in &self.terms {
            let w1 = 2.0 * PI * t.k1 as f64;
            let w2 = 2.0 * PI * t.k2 as f64;
            let phase = w1 * y[0] + w2 * y[1];
            for n in 0..=order {
                let shift = n as f64 * std::f64::consts::FRAC_PI_2;
                let c = (phase + shift).cos();
                let s = (phase + shift).sin();
                let base = t.cos_amp * c + t.sin_amp * s;
                for j in 0..=n {
                    let i = n - j;
                    out.d[i][j] += w1.powi(i as i32) * w2.powi(j as i32) * base;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_sin_cross_derivative_at_origin() {
        let th = ShapeFunction::sin_sin(1.0);
        let v = th.values([0.0, 0.0]);
        assert!(v.value().abs() < 1e-15);
        assert!(v.d1(0).abs() < 1e-14);
        assert!((v.d2(0, 1) - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn cross_derivative_against_step_sweep() {
        let th = ShapeFunction::sin_sin(1.0);
        let f = |a: f64, b: f64| th.values([a, b]).value();
        let mut errs = Vec::new();
        for h in [1e-2, 5e-3, 2.5e-3] {
            let fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
            errs.push((fd - 4.0 * PI * PI).abs());
        }
        // second-order convergence of the central stencil
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
        assert!(errs[2] < 1e-2);
    }

    #[test]
    fn zero_shape_has_zero_derivatives() {
        let v = ShapeFunction::zero().values([0.3, 0.7]);
        assert!(v.d.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn order_above_three_is_rejected() {
        assert_eq!(ShapeFunction::sin_y1(1.0).eval([0.0, 0.0], 4), Err(Error::OrderTooHigh(4)));
    }

    #[test]
    fn derivatives_have_zero_mean() {
        let th = ShapeFunction::new(vec![
            TrigTerm { k1: 1, k2: 2, cos_amp: 0.3, sin_amp: -0.2 },
            TrigTerm { k1: 0, k2: 0, cos_amp: 0.7, sin_amp: 0.0 },
            TrigTerm { k1: 2, k2: -1, cos_amp: 0.0, sin_amp: 0.5 },
        ]);
        let m = 16;
        let mut mean = [0.0; 3];
        for a in 0..m {
            for b in 0..m {
                let v = th.values([a as f64 / m as f64, b as f64 / m as f64]);
                mean[0] += v.d1(0);
                mean[1] += v.d1(1);
                mean[2] += v.d3(0, 1, 1);
            }
        }
        for x in mean {
            assert!(x.abs() / (m * m) as f64 <= 1e-12);
        }
    }

    #[test]
    fn shifted_profile_matches_translated_evaluation() {
        let th = ShapeFunction::new(vec![
            TrigTerm { k1: 1, k2: 2, cos_amp: 0.3, sin_amp: -0.2 },
            TrigTerm { k1: 2, k2: -1, cos_amp: 0.0, sin_amp: 0.5 },
        ]);
        let s = [0.17, 0.41];
        let a = th.shifted(s).values([0.3, 0.6]);
        let b = th.values([0.47, 1.01]);
        for i in 0..4 {
            for j in 0..(4 - i) {
                assert!((a.d[i][j] - b.d[i][j]).abs() < 1e-9);
            }
        }
        assert!(ShapeFunction::sin_y1(1.0).depends_on(0));
        assert!(!ShapeFunction::sin_y1(1.0).depends_on(1));
    }

    #[test]
    fn periodic_under_integer_shifts() {
        let th = ShapeFunction::sin_sin(0.8);
        let a = th.values([0.23, 0.61]);
        let b = th.values([2.23, -0.39]);
        for i in 0..4 {
            for j in 0..(4 - i) {
                assert!((a.d[i][j] - b.d[i][j]).abs() < 1e-9);
            }
        }
    }
}
