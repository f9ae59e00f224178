//! Central-difference Jacobian, used as an independent check on analytic
//! derivatives.

use nalgebra::{DMatrix, DVector};

/// Central differences coordinate by coordinate: column `j` is
/// `(F(x + h e_j) - F(x - h e_j)) / (2h)`.
pub fn finite_diff_jacobian<F>(f: F, x: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    assert!(h > 0.0, "step must be positive");
    let m = x.len();
    let f0 = f(x);
    let n = f0.len();
    let mut jac = DMatrix::zeros(n, m);
    let mut xp = x.clone();
    let mut xm = x.clone();
    for j in 0..m {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        let diff = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(j, &diff);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    jac
}
