use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{norm1, norm2_sqr, Real};

/// An `s`-sparse vector stored by support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal<T> {
    pub n: usize,
    pub support: Vec<usize>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SparseSignal<T> {
    pub fn new(n: usize, support: Vec<usize>, values: Vec<Complex<T>>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::Dimension("support and values differ in length".into()));
        }
        if support.len() > n {
            return Err(Error::SparsityTooLarge { s: support.len(), n });
        }
        if support.iter().any(|&i| i >= n) {
            return Err(Error::Dimension(format!("support index out of range for n = {n}")));
        }
        Ok(Self { n, support, values })
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let mut x = vec![Complex::new(T::zero(), T::zero()); self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

/// Keeps the `s` entries of largest modulus (ties broken toward lower
/// indices) and zeroes the rest.
pub fn top_s<T: Real>(z: &[Complex<T>], s: usize) -> Vec<Complex<T>> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&i, &j| {
        z[j].norm()
            .partial_cmp(&z[i].norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut out = vec![Complex::new(T::zero(), T::zero()); z.len()];
    for &i in order.iter().take(s) {
        out[i] = z[i];
    }
    out
}

/// Best `s`-term approximation error in ℓ1.
pub fn sigma_s<T: Real>(x: &[Complex<T>], s: usize) -> T {
    let kept = top_s(x, s);
    let rest: Vec<Complex<T>> = x.iter().zip(&kept).map(|(a, b)| a - b).collect();
    norm1(&rest)
}

/// `‖x − z‖₂² / ‖x‖₂²`.
pub fn nmse<T: Real>(x: &[Complex<T>], z: &[Complex<T>]) -> Result<T> {
    if x.len() != z.len() {
        return Err(Error::Dimension(format!("lengths {} and {}", x.len(), z.len())));
    }
    let denom = norm2_sqr(x);
    if denom == T::zero() {
        return Err(Error::ZeroReference);
    }
    let diff: Vec<Complex<T>> = x.iter().zip(z).map(|(a, b)| a - b).collect();
    Ok(norm2_sqr(&diff) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn re(v: &[f64]) -> Vec<C> {
        v.iter().map(|&x| C::new(x, 0.0)).collect()
    }

    #[test]
    fn top_s_ties_prefer_low_index() {
        let z = re(&[1.0, -3.0, 3.0, 0.5]);
        assert_eq!(top_s(&z, 1), re(&[0.0, -3.0, 0.0, 0.0]));
        assert_eq!(top_s(&z, 2), re(&[0.0, -3.0, 3.0, 0.0]));
        assert_eq!(top_s(&z, 9), z);
    }

    #[test]
    fn sigma_s_is_tail_mass() {
        let x = re(&[4.0, -1.0, 0.25, 2.0]);
        assert_eq!(sigma_s(&x, 2), 1.25);
        assert_eq!(sigma_s(&x, 4), 0.0);
        assert_eq!(sigma_s(&x, 0), 7.25);
    }

    #[test]
    fn nmse_values() {
        let x = re(&[3.0, 4.0]);
        assert_eq!(nmse(&x, &x).unwrap(), 0.0);
        assert!((nmse(&x, &re(&[0.0, 4.0])).unwrap() - 9.0 / 25.0).abs() < 1e-15);
        assert!(matches!(nmse(&re(&[0.0, 0.0]), &x), Err(Error::ZeroReference)));
    }

    #[test]
    fn sparse_signal_validation() {
        let s = SparseSignal::new(4, vec![1, 3], re(&[2.0, -1.0])).unwrap();
        assert_eq!(s.to_dense(), re(&[0.0, 2.0, 0.0, -1.0]));
        assert!(SparseSignal::new(1, vec![0, 0], re(&[1.0, 1.0])).is_err());
        assert!(SparseSignal::<f64>::new(2, vec![2], re(&[1.0])).is_err());
    }
}
