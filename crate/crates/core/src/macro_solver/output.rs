use std::fmt::Write;

use super::space::{DisplacementField, DofKind};

/// Basis coefficients, one row per degree of freedom. In-plane modes are
/// sine indices starting at 1, deflection modes bubble indices starting at 0.
pub fn solution_csv(field: &DisplacementField) -> String {
    let s = &field.space;
    let mut out = String::from("dof,component,mode1,mode2,coefficient\n");
    for (dof, c) in field.coeffs.iter().enumerate() {
        let (comp, m1, m2) = match s.kind(dof) {
            DofKind::Tangential(k) => {
                let r = dof % s.n_tangential();
                (k + 1, r / s.inplane_modes + 1, r % s.inplane_modes + 1)
            }
            DofKind::Normal => {
                let r = dof - 2 * s.n_tangential();
                (3, r / s.deflection_modes, r % s.deflection_modes)
            }
        };
        let _ = writeln!(out, "{dof},{comp},{m1},{m2},{c:e}");
    }
    out
}

/// Displacement on the uniform `(n + 1) x (n + 1)` grid including the boundary.
pub fn grid_csv(field: &DisplacementField, n: usize) -> String {
    let l = field.space.lengths;
    let mut out = String::from("x1,x2,u1,u2,u3\n");
    for i in 0..=n {
        for j in 0..=n {
            let x = [l[0] * i as f64 / n as f64, l[1] * j as f64 / n as f64];
            let d = field.eval(x);
            let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e}", x[0], x[1], d[0], d[1], d[2]);
        }
    }
    out
}
