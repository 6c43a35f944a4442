use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::jet::{Jet, JetVec};

/// Catalog of mid-surface charts with closed-form derivatives.
///
/// Derivatives are available up to order four: the wrinkled bending strain
/// differentiates the wrinkled curvature, which needs third derivatives of
/// the unit normal and therefore fourth derivatives of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceChart {
    /// `psi = (x1, x2, 0)`.
    Plate,
    /// `psi = (R cos(x1/R), R sin(x1/R), x2)`.
    Cylinder { radius: f64 },
    /// `psi = (x1, x2, k11 x1^2/2 + k12 x1 x2 + k22 x2^2/2)`.
    QuadraticGraph { k11: f64, k12: f64, k22: f64 },
    /// `psi = (x1, x2, amp cos(k1 x1) cos(k2 x2))`.
    TrigGraph { amp: f64, k1: f64, k2: f64 },
}

pub const MAX_CHART_ORDER: usize = 4;

fn cos_deriv(k: f64, x: f64, n: usize) -> f64 {
    k.powi(n as i32) * (k * x + n as f64 * std::f64::consts::FRAC_PI_2).cos()
}

impl SurfaceChart {
    pub fn id(&self) -> &'static str {
        match self {
            SurfaceChart::Plate => "plate",
            SurfaceChart::Cylinder { .. } => "cylinder",
            SurfaceChart::QuadraticGraph { .. } => "quadratic_graph",
            SurfaceChart::TrigGraph { .. } => "trig_graph",
        }
    }

    /// `d^(i+j) psi / dx1^i dx2^j` at `x`, for `i + j <= 4`.
    pub fn derivative(&self, x: [f64; 2], i: usize, j: usize) -> Vector3<f64> {
        assert!(i + j <= MAX_CHART_ORDER, "chart derivatives are tabulated up to order 4");
        let [x1, x2] = x;
        let graph_xy = |i: usize, j: usize| match (i, j) {
            (0, 0) => (x1, x2),
            (1, 0) => (1.0, 0.0),
            (0, 1) => (0.0, 1.0),
            _ => (0.0, 0.0),
        };
        match *self {
            SurfaceChart::Plate => {
                let (a, b) = graph_xy(i, j);
                Vector3::new(a, b, 0.0)
            }
            SurfaceChart::Cylinder { radius } => {
                let (c0, c1) = if j == 0 {
                    // R cos(x1/R) = R * cos(k x1) with k = 1/R; sin(t) = cos(t - pi/2)
                    let k = 1.0 / radius;
                    let c = radius * cos_deriv(k, x1, i);
                    let s = radius * k.powi(i as i32) * (k * x1 + i as f64 * std::f64::consts::FRAC_PI_2).sin();
                    (c, s)
                } else {
                    (0.0, 0.0)
                };
                let c2 = match (i, j) {
                    (0, 0) => x2,
                    (0, 1) => 1.0,
                    _ => 0.0,
                };
                Vector3::new(c0, c1, c2)
            }
            SurfaceChart::QuadraticGraph { k11, k12, k22 } => {
                let (a, b) = graph_xy(i, j);
                let h = match (i, j) {
                    (0, 0) => 0.5 * k11 * x1 * x1 + k12 * x1 * x2 + 0.5 * k22 * x2 * x2,
                    (1, 0) => k11 * x1 + k12 * x2,
                    (0, 1) => k12 * x1 + k22 * x2,
                    (2, 0) => k11,
                    (1, 1) => k12,
                    (0, 2) => k22,
                    _ => 0.0,
                };
                Vector3::new(a, b, h)
            }
            SurfaceChart::TrigGraph { amp, k1, k2 } => {
                let (a, b) = graph_xy(i, j);
                let h = amp * cos_deriv(k1, x1, i) * cos_deriv(k2, x2, j);
                Vector3::new(a, b, h)
            }
        }
    }

    /// Taylor jet of `psi` about `x` of the given degree (at most 4).
    pub fn jet(&self, x: [f64; 2], deg: usize) -> JetVec {
        let mut cache = [[Vector3::zeros(); MAX_CHART_ORDER + 1]; MAX_CHART_ORDER + 1];
        for n in 0..=deg {
            for j in 0..=n {
                cache[n - j][j] = self.derivative(x, n - j, j);
            }
        }
        [0, 1, 2].map(|c| Jet::from_derivatives(deg, |i, j| cache[i][j][c]))
    }
}
