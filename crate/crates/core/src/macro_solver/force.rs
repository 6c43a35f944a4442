use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Load catalog. Components are contravariant, paired with the covariant
/// displacement components as `f^i v_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceDensity {
    Constant { value: [f64; 3] },
    /// `value * sin(pi x1 / L1) sin(pi x2 / L2)`.
    SineBump { value: [f64; 3] },
    /// `value * (1 + amplitude sin(2 pi x1 / eps))`, weakly converging to `value`.
    Oscillating { value: [f64; 3], amplitude: f64 },
}

impl Default for ForceDensity {
    fn default() -> Self {
        ForceDensity::Constant { value: [0.0, 0.0, 1.0] }
    }
}

impl ForceDensity {
    /// The load at `x`; `eps = None` gives the weak limit.
    pub fn eval(&self, x: [f64; 2], lengths: [f64; 2], eps: Option<f64>) -> [f64; 3] {
        match *self {
            ForceDensity::Constant { value } => value,
            ForceDensity::SineBump { value } => {
                let s = (PI * x[0] / lengths[0]).sin() * (PI * x[1] / lengths[1]).sin();
                value.map(|v| v * s)
            }
            ForceDensity::Oscillating { value, amplitude } => {
                let s = match eps {
                    Some(e) => 1.0 + amplitude * (2.0 * PI * x[0] / e).sin(),
                    None => 1.0,
                };
                value.map(|v| v * s)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForceDensity::Constant { value } | ForceDensity::SineBump { value } => value.iter().all(|&v| v == 0.0),
            ForceDensity::Oscillating { value, .. } => value.iter().all(|&v| v == 0.0),
        }
    }

    /// Uniform bound on `|f_eps|` over all `eps`.
    pub fn sup_bound(&self) -> f64 {
        let norm = |v: &[f64; 3]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        match self {
            ForceDensity::Constant { value } | ForceDensity::SineBump { value } => norm(value),
            ForceDensity::Oscillating { value, amplitude } => norm(value) * (1.0 + amplitude.abs()),
        }
    }
}
