//! Dense linear algebra helpers shared by the cell and macro solvers.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// `max |A - A^T| / max |A|`.
pub fn symmetry_defect(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Averages `A` with its transpose in place.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

pub fn cholesky(a: &DMatrix<f64>, module: &'static str) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(a.clone()).ok_or_else(|| Error::NotSpd {
        module,
        detail: format!("Cholesky factorisation failed on a {}x{} system", a.nrows(), a.ncols()),
    })
}

pub fn relative_residual(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = a * x - b;
    let nb = b.norm();
    if nb == 0.0 {
        r.norm()
    } else {
        r.norm() / nb
    }
}

/// Plain conjugate gradients from a zero initial guess.
pub fn conjugate_gradient(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x0: Option<&DVector<f64>>,
    tol: f64,
    max_iter: usize,
) -> (DVector<f64>, usize) {
    let mut x = x0.cloned().unwrap_or_else(|| DVector::zeros(b.len()));
    let mut r = b - a * &x;
    let nb = b.norm().max(f64::MIN_POSITIVE);
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for it in 0..max_iter {
        if rr.sqrt() <= tol * nb {
            return (x, it);
        }
        let ap = a * &p;
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_new = r.dot(&r);
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    (x, max_iter)
}

/// Eigenvalues of the pencil `K v = lambda G v` (ascending) for symmetric `K`
/// and SPD `G`.
pub fn generalized_eigenvalues(
    k: &DMatrix<f64>,
    g: &DMatrix<f64>,
    module: &'static str,
) -> Result<Vec<f64>> {
    let chol = cholesky(g, module)?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotSpd { module, detail: "Gram factor not invertible".into() })?;
    let mut m = &l_inv * k * l_inv.transpose();
    symmetrize(&mut m);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}

pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut m = a.clone();
    symmetrize(&mut m);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_matches_cholesky() {
        let n = 12;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0 + i as f64
            } else {
                1.0 / (1.0 + (i as f64 - j as f64).abs())
            }
        });
        let b = DVector::from_fn(n, |i, _| (i as f64).sin());
        let x1 = cholesky(&a, "test").unwrap().solve(&b);
        let (x2, _) = conjugate_gradient(&a, &b, None, 1e-14, 200);
        assert!((x1 - x2).amax() < 1e-12);
    }

    #[test]
    fn generalized_eigen_of_scaled_identity() {
        let k = DMatrix::<f64>::identity(3, 3) * 6.0;
        let g = DMatrix::<f64>::identity(3, 3) * 2.0;
        let ev = generalized_eigenvalues(&k, &g, "test").unwrap();
        assert!(ev.iter().all(|v| (v - 3.0).abs() < 1e-14));
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.5, 0.25, 0.125, 0.0625];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y) - 3.0).abs() < 1e-12);
    }
}
