//! Exact reference solutions for small real instances by enumeration.
//!
//! With `η = 0` the LP optimum sits at a basic solution, so every support
//! with full column rank is tried. With `η > 0` each (support, sign) pair
//! reduces to minimizing a linear form over an ellipsoid, which has a closed
//! form; a candidate counts only when its signs match. Exact for instances
//! in general position.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Largest `n` accepted by [`lp_oracle`].
pub const ORACLE_MAX_N: usize = 10;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub z: Vec<f64>,
    pub objective: f64,
}

pub fn lp_oracle(a: &CMatrix<f64>, y: &[Complex<f64>], eta: f64) -> Result<OracleSolution> {
    let (m, n) = (a.rows(), a.cols());
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge(n));
    }
    if y.len() != m {
        return Err(Error::Dimension(format!("y has {} entries, A has {m} rows", y.len())));
    }
    if !a.is_real() || y.iter().any(|c| c.im != 0.0) {
        return Err(Error::Dimension("oracle needs real data".into()));
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::Dimension(format!("noise radius {eta} must be finite and >= 0")));
    }
    let am = DMatrix::from_row_iterator(m, n, a.data().iter().map(|c| c.re));
    let yv = DVector::from_iterator(m, y.iter().map(|c| c.re));
    let ynorm = yv.norm();
    if ynorm <= eta {
        return Ok(OracleSolution { z: vec![0.0; n], objective: 0.0 });
    }
    let tol = 1e-9 * ynorm.max(1.0);

    let mut best: Option<OracleSolution> = None;
    let mut consider = |z: Vec<f64>| {
        let obj: f64 = z.iter().map(|v| v.abs()).sum();
        if best.as_ref().is_none_or(|b| obj < b.objective) {
            best = Some(OracleSolution { z, objective: obj });
        }
    };

    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        let k = support.len();
        if k > m {
            continue;
        }
        let sub = am.select_columns(&support);
        let sv = sub.clone().svd(false, false).singular_values;
        let (lo, hi) = (sv.min(), sv.max());
        if !(hi > 0.0) || lo / hi < 1e-10 {
            continue;
        }
        let gram = sub.transpose() * &sub;
        let Some(chol) = gram.clone().cholesky() else { continue };
        let z_ls = chol.solve(&(sub.transpose() * &yv));
        let r = (&sub * &z_ls - &yv).norm();
        let dense = |zs: &DVector<f64>| {
            let mut z = vec![0.0; n];
            for (i, &j) in support.iter().enumerate() {
                z[j] = zs[i];
            }
            z
        };
        if eta == 0.0 {
            if r <= tol {
                consider(dense(&z_ls));
            }
            continue;
        }
        if r > eta {
            continue;
        }
        let slack = (eta * eta - r * r).max(0.0).sqrt();
        for signs in 0u32..(1 << k) {
            let sigma = DVector::from_iterator(k, (0..k).map(|i| if signs >> i & 1 == 1 { -1.0 } else { 1.0 }));
            let gs = chol.solve(&sigma);
            let q = sigma.dot(&gs);
            if !(q > 0.0) {
                continue;
            }
            let z = &z_ls - gs * (slack / q.sqrt());
            if (0..k).all(|i| z[i] * sigma[i] > 0.0) {
                consider(dense(&z));
            }
        }
    }
    best.ok_or_else(|| {
        let resid = least_norm_residual(&am, &yv);
        Error::InfeasibleSystem(resid)
    })
}

fn least_norm_residual(a: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let svd = a.clone().svd(true, true);
    match svd.solve(y, 1e-12) {
        Ok(x) => (a * x - y).norm(),
        Err(_) => y.norm(),
    }
}
