use std::f64::consts::PI;

use crate::error::Result;
use crate::macro_solver::MacroQuadrature;
use crate::quadrature::{Rule1d, Rule2d};

use super::report::{monotone_within_band, ConvergenceReport, MONOTONE_BAND};

/// Macro factor `g(x)` of a separable test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XFactor {
    One,
    /// `sin(k1 pi x1 / L1) sin(k2 pi x2 / L2)`, vanishing on the boundary.
    SineBubble { k1: u32, k2: u32 },
}

impl XFactor {
    pub fn eval(&self, x: [f64; 2], lengths: [f64; 2]) -> f64 {
        match *self {
            XFactor::One => 1.0,
            XFactor::SineBubble { k1, k2 } => {
                (k1 as f64 * PI * x[0] / lengths[0]).sin() * (k2 as f64 * PI * x[1] / lengths[1]).sin()
            }
        }
    }

    fn label(&self) -> String {
        match self {
            XFactor::One => "x1".into(),
            XFactor::SineBubble { k1, k2 } => format!("xb{k1}{k2}"),
        }
    }
}

/// Cell factor `h(y)` of a separable test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YFactor {
    One,
    /// `sin(2 pi (k1 y1 + k2 y2))`.
    Sin { k1: i32, k2: i32 },
    /// `cos(2 pi (k1 y1 + k2 y2))`.
    Cos { k1: i32, k2: i32 },
}

impl YFactor {
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        match *self {
            YFactor::One => 1.0,
            YFactor::Sin { k1, k2 } => (2.0 * PI * (k1 as f64 * y[0] + k2 as f64 * y[1])).sin(),
            YFactor::Cos { k1, k2 } => (2.0 * PI * (k1 as f64 * y[0] + k2 as f64 * y[1])).cos(),
        }
    }

    /// Frequency along each axis.
    pub fn frequencies(&self) -> [usize; 2] {
        match *self {
            YFactor::One => [0, 0],
            YFactor::Sin { k1, k2 } | YFactor::Cos { k1, k2 } => [k1.unsigned_abs() as usize, k2.unsigned_abs() as usize],
        }
    }

    fn label(&self) -> String {
        match self {
            YFactor::One => "y1".into(),
            YFactor::Sin { k1, k2 } => format!("ys{k1}{k2}"),
            YFactor::Cos { k1, k2 } => format!("yc{k1}{k2}"),
        }
    }
}

/// Separable test function `phi(x, y) = g(x) h(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub x: XFactor,
    pub y: YFactor,
}

impl TestFunction {
    pub fn eval(&self, x: [f64; 2], y: [f64; 2], lengths: [f64; 2]) -> f64 {
        self.x.eval(x, lengths) * self.y.eval(y)
    }

    pub fn label(&self) -> String {
        format!("{}_{}", self.x.label(), self.y.label())
    }
}

/// The fixed battery of twelve test functions standing in for "all test
/// functions" in weak two-scale limits.
pub fn test_battery() -> Vec<TestFunction> {
    let xs = [XFactor::SineBubble { k1: 1, k2: 1 }, XFactor::SineBubble { k1: 2, k2: 1 }, XFactor::SineBubble { k1: 1, k2: 2 }];
    let ys = [
        YFactor::One,
        YFactor::Sin { k1: 1, k2: 0 },
        YFactor::Cos { k1: 0, k2: 1 },
        YFactor::Sin { k1: 1, k2: 1 },
    ];
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| TestFunction { x, y })).collect()
}

/// High-order rule for pairing benchmarks with closed-form limits.
pub fn benchmark_quadrature() -> MacroQuadrature {
    MacroQuadrature { cells_per_unit: 64, coarse_cells_per_unit: 8, order: 10, min_points_per_period: 32 }
}

/// Rule on the domain resolving `x / eps` oscillations up to `freqs[axis]`;
/// non-oscillating axes get the coarse density.
pub fn pairing_rule(quad: &MacroQuadrature, lengths: [f64; 2], freqs: [usize; 2], eps: f64) -> Result<Rule2d> {
    quad.oscillating_rule(lengths, freqs, eps)
}

/// `int_Omega f(x) phi(x, x/eps) dx` on the given rule, summed in node order.
pub fn pair(f: impl Fn([f64; 2]) -> f64, phi: &TestFunction, eps: f64, lengths: [f64; 2], rule: &Rule2d) -> f64 {
    let mut s = 0.0;
    for (&x1, &w1) in rule.x1.nodes.iter().zip(&rule.x1.weights) {
        for (&x2, &w2) in rule.x2.nodes.iter().zip(&rule.x2.weights) {
            let x = [x1, x2];
            s += w1 * w2 * f(x) * phi.eval(x, [x1 / eps, x2 / eps], lengths);
        }
    }
    s
}

/// Plain `int_Omega f(x) g(x) dx` on the given rule.
pub fn weak_pairing(f: impl Fn([f64; 2]) -> f64, g: &XFactor, lengths: [f64; 2], rule: &Rule2d) -> f64 {
    let mut s = 0.0;
    for (&x1, &w1) in rule.x1.nodes.iter().zip(&rule.x1.weights) {
        for (&x2, &w2) in rule.x2.nodes.iter().zip(&rule.x2.weights) {
            let x = [x1, x2];
            s += w1 * w2 * f(x) * g.eval(x, lengths);
        }
    }
    s
}

pub fn l2_norm(f: impl Fn([f64; 2]) -> f64, rule: &Rule2d) -> f64 {
    let mut s = 0.0;
    for (&x1, &w1) in rule.x1.nodes.iter().zip(&rule.x1.weights) {
        for (&x2, &w2) in rule.x2.nodes.iter().zip(&rule.x2.weights) {
            let v = f([x1, x2]);
            s += w1 * w2 * v * v;
        }
    }
    s.sqrt()
}

/// `int_Omega int_Y f(x, y) phi(x, y) dy dx` with a Gauss rule in `x` and the
/// uniform `m x m` periodic rule in `y`.
pub fn limit_pairing(
    f: impl Fn([f64; 2], [f64; 2]) -> f64,
    phi: &TestFunction,
    lengths: [f64; 2],
    xrule: &Rule2d,
    m: usize,
) -> f64 {
    let yr = Rule1d::periodic_uniform(m);
    let mut s = 0.0;
    for (&x1, &w1) in xrule.x1.nodes.iter().zip(&xrule.x1.weights) {
        for (&x2, &w2) in xrule.x2.nodes.iter().zip(&xrule.x2.weights) {
            let x = [x1, x2];
            let g = phi.x.eval(x, lengths);
            let mut inner = 0.0;
            for (&y1, &v1) in yr.nodes.iter().zip(&yr.weights) {
                for (&y2, &v2) in yr.nodes.iter().zip(&yr.weights) {
                    inner += v1 * v2 * f(x, [y1, y2]) * phi.y.eval([y1, y2]);
                }
            }
            s += w1 * w2 * g * inner;
        }
    }
    s
}

/// A family `f^eps` paired against one test function over a schedule.
pub struct TwoScaleTest<'a> {
    pub study_id: String,
    pub lengths: [f64; 2],
    /// `f^eps(x)` as a function of `(eps, x)`.
    pub field: &'a (dyn Fn(f64, [f64; 2]) -> f64 + Sync),
    /// Largest frequency of the `x / eps` oscillation inside `f^eps`, per axis.
    pub field_frequencies: [usize; 2],
    pub phi: TestFunction,
    pub claimed_limit: f64,
    /// `|f|_{L2(Omega x Y)}` of the claimed limit, for the strong variant.
    pub strong_limit_norm: Option<f64>,
    pub eps_schedule: Vec<f64>,
}

/// Pairings of `f^eps` against `phi(x, x/eps)` for every scheduled `eps`,
/// compared with the claimed limit.  The quadrature must resolve the finest
/// `eps`; it is never refined here.
pub fn two_scale_pairing(test: &TwoScaleTest, quad: &MacroQuadrature) -> Result<ConvergenceReport> {
    let mut rep = ConvergenceReport::new(test.study_id.clone());
    let hf = test.phi.y.frequencies();
    let freqs = [0, 1].map(|a| test.field_frequencies[a].max(hf[a]));
    for &eps in &test.eps_schedule {
        let rule = pairing_rule(quad, test.lengths, freqs, eps)?;
        let f = |x: [f64; 2]| (test.field)(eps, x);
        rep.push(eps, "pairing", pair(f, &test.phi, eps, test.lengths, &rule), test.claimed_limit);
        if let Some(norm) = test.strong_limit_norm {
            rep.push(eps, "l2_norm", l2_norm(f, &rule), norm);
        }
    }
    let mono = monotone_within_band(&rep.gaps("pairing"), MONOTONE_BAND);
    rep.flag("pairing_monotone", mono, true);
    if test.strong_limit_norm.is_some() {
        let mono = monotone_within_band(&rep.gaps("l2_norm"), MONOTONE_BAND);
        rep.flag("norm_monotone", mono, true);
    }
    Ok(rep)
}
