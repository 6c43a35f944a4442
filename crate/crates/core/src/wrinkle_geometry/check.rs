use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::surface_geometry::{eval_geometry, ShapeFunction, SurfaceChart};

use super::exact::eval_exact_eps;

pub const GEOMETRY_TOL: f64 = 1e-10;

/// Largest defects of the base and wrinkled geometry identities over random
/// samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryCheck {
    pub samples: usize,
    pub seed: u64,
    /// `(check_id, max_defect)`.
    pub defects: Vec<(&'static str, f64)>,
    pub pass: bool,
}

/// Samples `x` uniformly on the domain and `eps = 2^-s` with `s` uniform in
/// `[2, 8]`, and checks `a^{ab} a_{bc} = delta`, `|a_3| = 1`, `a_3 . a_a = 0`,
/// symmetry of `b`, `c = b^T_mixed b`, then the wrinkled duality
/// `a_eps^i . a^eps_j = delta_ij` and `sqrt(a_eps) = a^eps_1 . (a^eps_2 ^ a^eps_3)`.
pub fn geometry_check(
    chart: &SurfaceChart,
    theta: &ShapeFunction,
    lengths: [f64; 2],
    samples: usize,
    seed: u64,
) -> Result<GeometryCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = [0.0f64; 7];
    for _ in 0..samples {
        let x = [lengths[0] * rng.random::<f64>(), lengths[1] * rng.random::<f64>()];
        let eps = 2f64.powf(-rng.random_range(2.0..8.0));
        let g = eval_geometry(chart, x)?;
        d[0] = d[0].max((g.metric_inv * g.metric - Matrix2::identity()).amax());
        d[1] = d[1].max((g.a3.norm() - 1.0).abs());
        d[2] = d[2].max(g.a3.dot(&g.a_cov[0]).abs().max(g.a3.dot(&g.a_cov[1]).abs()));
        d[3] = d[3].max((g.b - g.b.transpose()).amax());
        d[4] = d[4].max((g.c - g.b_mixed.transpose() * g.b).amax());
        let e = eval_exact_eps(chart, theta, x, eps)?;
        d[5] = d[5].max(e.duality_defect());
        d[6] = d[6].max(e.determinant_defect());
    }
    let ids = ["metric_inverse", "normal_unit", "normal_orthogonal", "second_form_symmetric", "third_form", "eps_duality", "eps_determinant"];
    let defects: Vec<(&'static str, f64)> = ids.into_iter().zip(d).collect();
    let pass = defects.iter().all(|(_, v)| *v <= GEOMETRY_TOL);
    Ok(GeometryCheck { samples, seed, defects, pass })
}

impl GeometryCheck {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("check_id,samples,max_defect,tolerance,pass\n");
        for (id, v) in &self.defects {
            s.push_str(&format!("{id},{},{v:e},{GEOMETRY_TOL:e},{}\n", self.samples, *v <= GEOMETRY_TOL));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_on_a_curved_chart() {
        let chart = SurfaceChart::QuadraticGraph { k11: 0.8, k12: 0.2, k22: -0.3 };
        let r = geometry_check(&chart, &ShapeFunction::sin_sin(1.0), [1.0, 1.0], 100, 3).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.to_csv().lines().count() == 8);
    }
}
