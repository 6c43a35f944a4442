use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Rule1d, Rule2d};
use crate::strain_kinematics::{ddu3, du, LocalData};
use crate::surface_geometry::ShapeFunction;

/// Conforming Ritz space on `[0, L1] x [0, L2]` for the clamped shell:
/// products of `sin(k pi x / L)` for the tangential components and products of
/// `t^2 (1 - t)^2 P_k(2t - 1)` for the normal component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroSpace {
    pub lengths: [f64; 2],
    /// Sine modes per direction for each tangential component.
    pub inplane_modes: usize,
    /// Bubble modes per direction for the normal component.
    pub deflection_modes: usize,
}

/// Which displacement component a basis function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Tangential(usize),
    Normal,
}

impl Default for MacroSpace {
    fn default() -> Self {
        MacroSpace { lengths: [1.0, 1.0], inplane_modes: 4, deflection_modes: 4 }
    }
}

/// Value, first and second derivative of a 1D basis function.
pub type Triple = [f64; 3];

pub fn sine_mode(k: usize, length: f64, x: f64) -> Triple {
    let w = k as f64 * PI / length;
    let (s, c) = (w * x).sin_cos();
    [s, w * c, -w * w * s]
}

pub fn bubble_mode(k: usize, length: f64, x: f64) -> Triple {
    let t = x / length;
    let s = 2.0 * t - 1.0;
    // Legendre value and derivatives in s by the three-term recurrences
    let (mut p0, mut p1) = (1.0, s);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut e0, mut e1) = (0.0, 0.0);
    let (p, dp, ddp) = if k == 0 {
        (1.0, 0.0, 0.0)
    } else {
        for n in 1..k {
            let nf = n as f64;
            let p2 = ((2.0 * nf + 1.0) * s * p1 - nf * p0) / (nf + 1.0);
            let d2 = d0 + (2.0 * nf + 1.0) * p1;
            let e2 = e0 + (2.0 * nf + 1.0) * d1;
            (p0, p1, d0, d1, e0, e1) = (p1, p2, d1, d2, e1, e2);
        }
        (p1, d1, e1)
    };
    let b = t * t * (1.0 - t) * (1.0 - t);
    let db = 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    let ddb = 2.0 - 12.0 * t + 12.0 * t * t;
    // d/dt P(2t - 1) = 2 P'
    let v = b * p;
    let dv = db * p + 2.0 * b * dp;
    let ddv = ddb * p + 4.0 * db * dp + 4.0 * b * ddp;
    [v, dv / length, ddv / (length * length)]
}

/// Sparse local data of one basis function at one point: nonzero entries of
/// its [`LocalData`] vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct BasisEntry {
    pub idx: [usize; 6],
    pub val: [f64; 6],
    pub len: usize,
}

impl BasisEntry {
    pub fn dense(&self) -> LocalData {
        let mut d = [0.0; 12];
        for k in 0..self.len {
            d[self.idx[k]] = self.val[k];
        }
        d
    }
}

/// 1D basis values of one axis at a set of nodes.
#[derive(Debug, Clone)]
pub struct AxisTable {
    pub sine: Vec<Triple>,
    pub bubble: Vec<Triple>,
    m1: usize,
    m3: usize,
}

impl AxisTable {
    pub fn new(space: &MacroSpace, axis: usize, nodes: &[f64]) -> Self {
        let (m1, m3, len) = (space.inplane_modes, space.deflection_modes, space.lengths[axis]);
        let mut sine = Vec::with_capacity(nodes.len() * m1);
        let mut bubble = Vec::with_capacity(nodes.len() * m3);
        for &x in nodes {
            sine.extend((1..=m1).map(|k| sine_mode(k, len, x)));
            bubble.extend((0..m3).map(|k| bubble_mode(k, len, x)));
        }
        AxisTable { sine, bubble, m1, m3 }
    }

    fn sine_at(&self, node: usize) -> &[Triple] {
        &self.sine[node * self.m1..(node + 1) * self.m1]
    }

    fn bubble_at(&self, node: usize) -> &[Triple] {
        &self.bubble[node * self.m3..(node + 1) * self.m3]
    }
}

impl MacroSpace {
    pub fn validate(&self) -> Result<()> {
        if !(self.lengths[0] > 0.0 && self.lengths[1] > 0.0) {
            return Err(Error::InvalidConfig(format!("domain lengths must be positive, got {:?}", self.lengths)));
        }
        if self.inplane_modes == 0 || self.deflection_modes == 0 {
            return Err(Error::InvalidConfig("macro space needs at least one mode per field".into()));
        }
        Ok(())
    }

    pub fn n_tangential(&self) -> usize {
        self.inplane_modes * self.inplane_modes
    }

    pub fn ndof(&self) -> usize {
        2 * self.n_tangential() + self.deflection_modes * self.deflection_modes
    }

    pub fn kind(&self, dof: usize) -> DofKind {
        let nt = self.n_tangential();
        if dof < 2 * nt {
            DofKind::Tangential(dof / nt)
        } else {
            DofKind::Normal
        }
    }

    /// Basis data of every degree of freedom from per-axis 1D values.
    pub fn fill_entries(&self, s1: &[Triple], s2: &[Triple], b1: &[Triple], b2: &[Triple], out: &mut [BasisEntry]) {
        let m1 = self.inplane_modes;
        let m3 = self.deflection_modes;
        let nt = m1 * m1;
        for c in 0..2 {
            for k in 0..m1 {
                for l in 0..m1 {
                    let (f, g) = (s1[k], s2[l]);
                    out[c * nt + k * m1 + l] = BasisEntry {
                        idx: [c, du(c, 0), du(c, 1), 0, 0, 0],
                        val: [f[0] * g[0], f[1] * g[0], f[0] * g[1], 0.0, 0.0, 0.0],
                        len: 3,
                    };
                }
            }
        }
        for p in 0..m3 {
            for q in 0..m3 {
                let (f, g) = (b1[p], b2[q]);
                out[2 * nt + p * m3 + q] = BasisEntry {
                    idx: [2, du(2, 0), du(2, 1), ddu3(0, 0), ddu3(0, 1), ddu3(1, 1)],
                    val: [f[0] * g[0], f[1] * g[0], f[0] * g[1], f[2] * g[0], f[1] * g[1], f[0] * g[2]],
                    len: 6,
                };
            }
        }
    }

    /// Basis data at node `(i, j)` of a tensor rule whose axis tables are given.
    pub fn entries_at_node(&self, t1: &AxisTable, t2: &AxisTable, i: usize, j: usize, out: &mut [BasisEntry]) {
        self.fill_entries(t1.sine_at(i), t2.sine_at(j), t1.bubble_at(i), t2.bubble_at(j), out);
    }

    /// Basis data at an arbitrary point.
    pub fn entries_at(&self, x: [f64; 2]) -> Vec<BasisEntry> {
        let s1: Vec<Triple> = (1..=self.inplane_modes).map(|k| sine_mode(k, self.lengths[0], x[0])).collect();
        let s2: Vec<Triple> = (1..=self.inplane_modes).map(|k| sine_mode(k, self.lengths[1], x[1])).collect();
        let b1: Vec<Triple> = (0..self.deflection_modes).map(|k| bubble_mode(k, self.lengths[0], x[0])).collect();
        let b2: Vec<Triple> = (0..self.deflection_modes).map(|k| bubble_mode(k, self.lengths[1], x[1])).collect();
        let mut out = vec![BasisEntry::default(); self.ndof()];
        self.fill_entries(&s1, &s2, &b1, &b2, &mut out);
        out
    }
}

/// A displacement `u = u_i a^i` given by its Ritz coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub space: MacroSpace,
    pub coeffs: DVector<f64>,
}

impl DisplacementField {
    pub fn zero(space: MacroSpace) -> Self {
        DisplacementField { space, coeffs: DVector::zeros(space.ndof()) }
    }

    pub fn new(space: MacroSpace, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                space.ndof(),
                coeffs.len()
            )));
        }
        Ok(DisplacementField { space, coeffs })
    }

    /// Local data `(u_i, d u_i, d d u_3)` at `x`.
    pub fn eval(&self, x: [f64; 2]) -> LocalData {
        combine(&self.space.entries_at(x), &self.coeffs)
    }
}

/// `sum_a coeffs[a] * basis_a` as local data.
pub fn combine(entries: &[BasisEntry], coeffs: &DVector<f64>) -> LocalData {
    let mut d = [0.0; 12];
    for (e, &c) in entries.iter().zip(coeffs.iter()) {
        for k in 0..e.len {
            d[e.idx[k]] += c * e.val[k];
        }
    }
    d
}

/// Composite Gauss rule for macro integrals with oscillating coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroQuadrature {
    /// Cells per unit length along a direction in which the profile oscillates.
    pub cells_per_unit: usize,
    /// Cells per unit length along a direction without oscillation.
    pub coarse_cells_per_unit: usize,
    pub order: usize,
    /// Minimum nodes per wrinkle period along oscillating directions.
    pub min_points_per_period: usize,
}

impl Default for MacroQuadrature {
    fn default() -> Self {
        MacroQuadrature { cells_per_unit: 64, coarse_cells_per_unit: 8, order: 6, min_points_per_period: 8 }
    }
}

impl MacroQuadrature {
    /// A copy whose oscillating-direction density puts at least one and a half
    /// times the minimum number of nodes on every period at `eps`.
    pub fn resolving(&self, theta: &ShapeFunction, eps: f64) -> Self {
        self.resolving_frequency(theta.max_frequency(), eps)
    }

    /// As [`MacroQuadrature::resolving`] for oscillations `sin(2 pi k x / eps)`, `k <= freq`.
    pub fn resolving_frequency(&self, freq: usize, eps: f64) -> Self {
        let freq = freq.max(1) as f64;
        let need = (1.5 * self.min_points_per_period as f64 * freq / (eps * self.order.max(1) as f64)).ceil();
        MacroQuadrature { cells_per_unit: self.cells_per_unit.max(need as usize), ..*self }
    }

    /// Tensor rule on the domain; fails if a wrinkle period at `eps` would be
    /// sampled by fewer than `min_points_per_period` nodes.
    pub fn rule(&self, lengths: [f64; 2], theta: &ShapeFunction, eps: Option<f64>) -> Result<Rule2d> {
        let f = theta.max_frequency().max(1);
        let freqs = [0, 1].map(|a| if eps.is_some() && theta.depends_on(a) { f } else { 0 });
        self.oscillating_rule(lengths, freqs, eps.unwrap_or(1.0))
    }

    /// Tensor rule resolving `x / eps` oscillations of frequency up to
    /// `freqs[axis]`; axes with frequency zero get the coarse density.
    pub fn oscillating_rule(&self, lengths: [f64; 2], freqs: [usize; 2], eps: f64) -> Result<Rule2d> {
        if self.order == 0 || self.cells_per_unit == 0 || self.coarse_cells_per_unit == 0 {
            return Err(Error::InvalidConfig("quadrature cells and order must be positive".into()));
        }
        let axis_rule = |axis: usize| -> Result<Rule1d> {
            let len = lengths[axis];
            let oscillating = freqs[axis] > 0;
            let per_unit = if oscillating { self.cells_per_unit } else { self.coarse_cells_per_unit };
            let cells = ((per_unit as f64 * len).ceil() as usize).max(1);
            if oscillating {
                let period = eps / freqs[axis] as f64;
                let per_period = period * (cells * self.order) as f64 / len;
                if per_period < self.min_points_per_period as f64 {
                    return Err(Error::QuadratureUnderresolved {
                        points_per_period: per_period,
                        required: self.min_points_per_period,
                    });
                }
            }
            Ok(Rule1d::composite_gauss(0.0, len, cells, self.order))
        };
        Ok(Rule2d { x1: axis_rule(0)?, x2: axis_rule(1)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn basis_vanishes_with_normal_derivative_on_boundary() {
        let s = MacroSpace { lengths: [1.3, 0.7], inplane_modes: 3, deflection_modes: 3 };
        for x in [[0.0, 0.3], [1.3, 0.2], [0.4, 0.0], [0.9, 0.7]] {
            for e in s.entries_at(x) {
                let d = e.dense();
                for i in 0..3 {
                    assert!(d[i].abs() < 1e-14);
                }
                assert!(d[du(2, 0)].abs() < 1e-14 && d[du(2, 1)].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = MacroSpace { lengths: [1.0, 1.5], inplane_modes: 3, deflection_modes: 4 };
        let coeffs = DVector::from_fn(s.ndof(), |i, _| ((i * 7 + 3) as f64).sin());
        let f = DisplacementField::new(s, coeffs).unwrap();
        let x = [0.37, 0.81];
        let h = 1e-5;
        let d = f.eval(x);
        for al in 0..2 {
            let mut p = x;
            let mut m = x;
            p[al] += h;
            m[al] -= h;
            let (dp, dm) = (f.eval(p), f.eval(m));
            for i in 0..3 {
                assert!(((dp[i] - dm[i]) / (2.0 * h) - d[du(i, al)]).abs() < 1e-7);
            }
            for be in 0..2 {
                let fd = (dp[du(2, be)] - dm[du(2, be)]) / (2.0 * h);
                assert!((fd - d[ddu3(al, be)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn h1_gram_is_spd() {
        let s = MacroSpace { lengths: [1.0, 1.0], inplane_modes: 3, deflection_modes: 3 };
        let rule = MacroQuadrature::default().rule(s.lengths, &ShapeFunction::zero(), None).unwrap();
        let n = s.ndof();
        let mut g = DMatrix::zeros(n, n);
        for &a in rule.x1.nodes.iter() {
            for (&b, &wb) in rule.x2.nodes.iter().zip(&rule.x2.weights) {
                let wa = rule.x1.weights[rule.x1.nodes.iter().position(|&v| v == a).unwrap()];
                let e: Vec<LocalData> = s.entries_at([a, b]).iter().map(|e| e.dense()).collect();
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] += wa * wb * e[i].iter().zip(&e[j]).map(|(p, q)| p * q).sum::<f64>();
                    }
                }
            }
        }
        assert!(crate::linalg::cholesky(&g, "test").is_ok());
    }

    #[test]
    fn quadrature_rejects_underresolved_wrinkles() {
        let q = MacroQuadrature::default();
        let th = ShapeFunction::sin_y1(1.0);
        assert!(q.rule([1.0, 1.0], &th, Some(1.0 / 32.0)).is_ok());
        let r = q.rule([1.0, 1.0], &th, Some(1.0 / 64.0));
        assert!(matches!(r, Err(Error::QuadratureUnderresolved { required: 8, .. })));
        // no oscillation along x2 keeps that direction coarse
        let r = q.rule([1.0, 1.0], &th, Some(1.0 / 32.0)).unwrap();
        assert_eq!(r.x2.len(), 48);
    }
}
