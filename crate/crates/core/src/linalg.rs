//! Small dense complex matrices and a Hermitian Cholesky factorization.

use num_complex::Complex;

use crate::scalar::{dot_conj, Real};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_real(rows: usize, cols: usize, data: &[T]) -> Self {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|z| z * c).collect())
    }

    /// Columns `idx` as a new `rows × idx.len()` matrix.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Self::from_vec(self.rows, idx.len(), data)
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (a, b) in self.row(i).iter().zip(x) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }

    /// `A* y`.
    pub fn adjoint_mul_vec(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for (i, yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    /// `A A*` (`rows × rows`).
    pub fn gram_rows(&self) -> Self {
        let m = self.rows;
        let mut g = Self::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                // (AA*)_{ij} = Σ_k a_ik conj(a_jk)
                let v = dot_conj(self.row(j), self.row(i));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    /// `A* A` (`cols × cols`).
    pub fn gram_cols(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i].conj();
                for j in 0..n {
                    g.data[i * n + j] += ai * row[j];
                }
            }
        }
        g
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `L L*` factorization of a Hermitian positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<Complex<T>>,
}

impl<T: Real> Cholesky<T> {
    /// `None` when a pivot is not positive.
    pub fn new(a: &CMatrix<T>) -> Option<Self> {
        assert_eq!(a.rows(), a.cols(), "square matrix required");
        let n = a.rows();
        let mut l = vec![Complex::new(T::zero(), T::zero()); n * n];
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > T::zero()) {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex::new(djj, T::zero());
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    /// Factors `a + shift·I`.
    pub fn with_shift(a: &CMatrix<T>, shift: T) -> Option<Self> {
        let mut b = a.clone();
        for i in 0..a.rows() {
            b[(i, i)] += Complex::new(shift, T::zero());
        }
        Self::new(&b)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(L L*) x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i].conj() * x[k];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        x
    }

    /// Smallest-over-largest diagonal ratio of `L`, a cheap conditioning proxy.
    pub fn diag_ratio(&self) -> T {
        let d: Vec<T> = (0..self.n).map(|i| self.l[i * self.n + i].re).collect();
        let lo = d.iter().copied().fold(T::infinity(), T::min);
        let hi = d.iter().copied().fold(T::zero(), T::max);
        if hi > T::zero() {
            lo / hi
        } else {
            T::zero()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn cholesky_solves_hermitian_system() {
        let a = CMatrix::from_rows(&[
            vec![C::new(1.0, 0.5), C::new(2.0, -1.0), C::new(0.0, 1.0)],
            vec![C::new(-1.0, 0.0), C::new(0.5, 0.5), C::new(3.0, 0.0)],
        ]);
        let g = a.gram_rows();
        assert!((g[(0, 1)] - g[(1, 0)].conj()).norm() < 1e-15);
        let ch = Cholesky::new(&g).unwrap();
        let b = vec![C::new(1.0, 2.0), C::new(-3.0, 0.5)];
        let x = ch.solve(&b);
        let back = g.mul_vec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = CMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(Cholesky::new(&a).is_none());
        assert!(Cholesky::with_shift(&a, 1e-3).is_some());
    }

    #[test]
    fn adjoint_matches_gram() {
        let a = CMatrix::from_rows(&[
            vec![C::new(1.0, 1.0), C::new(2.0, 0.0)],
            vec![C::new(0.0, -1.0), C::new(1.0, 3.0)],
            vec![C::new(2.0, 2.0), C::new(-1.0, 0.0)],
        ]);
        let x = vec![C::new(0.3, -0.2), C::new(1.0, 0.7)];
        let ax = a.mul_vec(&x);
        let lhs = a.adjoint_mul_vec(&ax);
        let rhs = a.gram_cols().mul_vec(&x);
        for (u, v) in lhs.iter().zip(&rhs) {
            assert!((u - v).norm() < 1e-13);
        }
        assert_eq!(a.select_columns(&[1]).row(2), &[C::new(-1.0, 0.0)]);
        assert!(!a.is_real());
    }
}
