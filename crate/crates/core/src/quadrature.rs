//! Gauss-Legendre and uniform periodic quadrature rules.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A one-dimensional quadrature rule stored as parallel node/weight arrays.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// Composite Gauss-Legendre rule with `cells` equal subintervals of `[a, b]`.
    pub fn composite_gauss(a: f64, b: f64, cells: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let h = (b - a) / cells as f64;
        let mut nodes = Vec::with_capacity(cells * order);
        let mut weights = Vec::with_capacity(cells * order);
        for c in 0..cells {
            let left = a + c as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(left + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Rule1d { nodes, weights }
    }

    /// Uniform rectangle rule on the unit period, exact for trigonometric
    /// polynomials of frequency below `m`.
    pub fn periodic_uniform(m: usize) -> Self {
        let h = 1.0 / m as f64;
        Rule1d {
            nodes: (0..m).map(|k| k as f64 * h).collect(),
            weights: vec![h; m],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Tensor-product rule on a rectangle.
#[derive(Debug, Clone)]
pub struct Rule2d {
    pub x1: Rule1d,
    pub x2: Rule1d,
}

impl Rule2d {
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (&a, &wa) in self.x1.nodes.iter().zip(&self.x1.weights) {
            let mut row = 0.0;
            for (&b, &wb) in self.x2.nodes.iter().zip(&self.x2.weights) {
                row += wb * f(a, b);
            }
            total += wa * row;
        }
        total
    }

    pub fn num_points(&self) -> usize {
        self.x1.len() * self.x2.len()
    }
}
