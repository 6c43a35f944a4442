use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::macro_solver::{combine, AxisTable, BasisEntry, DisplacementField, MacroQuadrature, MacroSpace};
use crate::surface_geometry::{eval_geometry, ShapeFunction, SurfaceChart};
use crate::wrinkle_geometry::eval_exact_eps_at;

use super::ops::{bending_strains, membrane_strains};

/// Largest ratio `max / min` over the schedule allowed for a bounded remainder.
pub const BOUND_SPREAD_TOL: f64 = 2.0;

/// Remainder norms of the strain decomposition over an `eps` schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAudit {
    pub eps_schedule: Vec<f64>,
    /// `|P|_{L2} / |u|_{L2}` per field and `eps`.
    pub membrane_ratio: Vec<Vec<f64>>,
    /// `|R|_{L2} / |u|_{H1}` per field and `eps`.
    pub bending_ratio: Vec<Vec<f64>>,
    pub membrane_spread: Vec<f64>,
    pub bending_spread: Vec<f64>,
    pub pass: bool,
}

/// Five smooth test displacements with all components present.
pub fn default_battery(space: MacroSpace, seed: u64) -> Vec<DisplacementField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..5)
        .map(|_| {
            let coeffs = DVector::from_fn(space.ndof(), |_, _| rng.random_range(-1.0..1.0));
            DisplacementField { space, coeffs }
        })
        .collect()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Measures the remainder ratios for every field and `eps`, with a quadrature
/// refined to resolve each wrinkle period.
pub fn residual_bound_audit(
    chart: &SurfaceChart,
    theta: &ShapeFunction,
    fields: &[DisplacementField],
    eps_schedule: &[f64],
    quad: &MacroQuadrature,
) -> Result<BoundAudit> {
    let Some(first) = fields.first() else {
        return Err(Error::InvalidArgument("empty field battery".into()));
    };
    let space = first.space;
    if fields.iter().any(|f| f.space != space) {
        return Err(Error::InvalidArgument("battery fields must share one macro space".into()));
    }
    let nf = fields.len();
    let mut membrane_ratio = vec![Vec::new(); nf];
    let mut bending_ratio = vec![Vec::new(); nf];
    for &eps in eps_schedule {
        let rule = quad.resolving(theta, eps).rule(space.lengths, theta, Some(eps))?;
        let t1 = AxisTable::new(&space, 0, &rule.x1.nodes);
        let t2 = AxisTable::new(&space, 1, &rule.x2.nodes);
        let mut entries = vec![BasisEntry::default(); space.ndof()];
        // per field: |P|^2, |R|^2, |u|_L2^2, |u|_H1^2
        let mut acc = vec![[0.0f64; 4]; nf];
        for (i, (&x1, &w1)) in rule.x1.nodes.iter().zip(&rule.x1.weights).enumerate() {
            for (j, (&x2, &w2)) in rule.x2.nodes.iter().zip(&rule.x2.weights).enumerate() {
                let x = [x1, x2];
                let y = [x1 / eps, x2 / eps];
                let sv = theta.values(y);
                let g = eval_geometry(chart, x)?;
                let ge = eval_exact_eps_at(chart, &sv, x, y, eps)?;
                space.entries_at_node(&t1, &t2, i, j, &mut entries);
                let w = w1 * w2;
                for (f, a) in fields.iter().zip(acc.iter_mut()) {
                    let u = combine(&entries, &f.coeffs);
                    let m = membrane_strains(&u, &ge, &g, &sv);
                    let b = bending_strains(&u, &ge, &g, &sv);
                    let l2: f64 = u[..3].iter().map(|v| v * v).sum();
                    let grad: f64 = u[3..9].iter().map(|v| v * v).sum();
                    a[0] += w * m.residual.norm_squared();
                    a[1] += w * b.residual.norm_squared();
                    a[2] += w * l2;
                    a[3] += w * (l2 + grad);
                }
            }
        }
        for (k, a) in acc.iter().enumerate() {
            membrane_ratio[k].push((a[0] / a[2]).sqrt());
            bending_ratio[k].push((a[1] / a[3]).sqrt());
        }
    }
    let membrane_spread: Vec<f64> = membrane_ratio.iter().map(|r| spread(r)).collect();
    let bending_spread: Vec<f64> = bending_ratio.iter().map(|r| spread(r)).collect();
    let pass = membrane_spread.iter().chain(&bending_spread).all(|&s| s <= BOUND_SPREAD_TOL);
    Ok(BoundAudit {
        eps_schedule: eps_schedule.to_vec(),
        membrane_ratio,
        bending_ratio,
        membrane_spread,
        bending_spread,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_profile_gives_vanishing_remainders() {
        let space = MacroSpace { lengths: [1.0, 1.0], inplane_modes: 2, deflection_modes: 2 };
        let fields = default_battery(space, 3);
        let a = residual_bound_audit(
            &SurfaceChart::Cylinder { radius: 2.0 },
            &ShapeFunction::zero(),
            &fields[..2],
            &[0.5, 0.25],
            &MacroQuadrature::default(),
        )
        .unwrap();
        for r in a.membrane_ratio.iter().chain(&a.bending_ratio).flatten() {
            assert!(*r < 1e-9);
        }
    }
}
