//! ℓ1 minimization for complex data.
//!
//! [`basis_pursuit`] minimizes `‖z‖₁` subject to `Az = y`; [`bpdn`]
//! replaces the constraint by `‖Az − y‖₂ ≤ η`. Both are ADMM splittings:
//! an exact projection (onto the affine set, or onto the graph of `A`),
//! complex soft-thresholding, and residual balancing of the threshold.
//! Equality-constrained runs additionally try to polish the iterate on its
//! support and stop early once a dual certificate proves optimality.

mod oracle;
mod sparse;

pub use oracle::{lp_oracle, OracleSolution, ORACLE_MAX_N};
pub use sparse::{nmse, sigma_s, top_s, SparseSignal};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::scalar::{norm1, norm2, norm_inf, Real};

/// Iterations between residual-balancing updates.
const BALANCE_EVERY: usize = 10;
/// Ratio that triggers a threshold update.
const BALANCE_RATIO: f64 = 10.0;
/// Threshold updates allowed before it is frozen.
const MAX_BALANCE_UPDATES: usize = 60;
/// Iterations between certificate attempts.
const CERTIFY_EVERY: usize = 20;

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    /// Feasibility tolerance, relative to `max(1, ‖y‖₂)`.
    pub tol_feas: T,
    /// Successive-iterate change tolerance, relative to `max(1, ‖z‖₂)`.
    pub tol_change: T,
    pub max_iter: usize,
    /// Initial soft-threshold level; derived from the data when `None`.
    pub step: Option<T>,
    /// Support polishing and certificate-based early stopping.
    pub polish: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol_feas: T::of(1e-7),
            tol_change: T::of(1e-9),
            max_iter: 50_000,
            step: None,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Feasibility and change tolerances met.
    Converged,
    /// Polished iterate with a verified dual certificate.
    Certified,
    MaxIter,
}

/// A recovery instance: `A`, `y` and the noise radius `η` (0 = equality).
#[derive(Debug, Clone)]
pub struct RecoveryProblem<T> {
    pub a: CMatrix<T>,
    pub y: Vec<Complex<T>>,
    pub eta: T,
}

impl<T: Real> RecoveryProblem<T> {
    pub fn new(a: CMatrix<T>, y: Vec<Complex<T>>, eta: T) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::Dimension(format!("y has {} entries, A has {} rows", y.len(), a.rows())));
        }
        if !(eta >= T::zero()) || !eta.is_finite() {
            return Err(Error::Dimension(format!("noise radius {eta} must be finite and >= 0")));
        }
        Ok(Self { a, y, eta })
    }

    pub fn solve(&self, opts: &SolverOptions<T>) -> Result<SolverResult<T>> {
        bpdn(&self.a, &self.y, self.eta, opts)
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult<T> {
    pub z_sharp: Vec<Complex<T>>,
    /// `‖z♯‖₁`.
    pub objective: T,
    /// `‖Az♯ − y‖₂`, or the distance of `Az♯` to the η-ball.
    pub feasibility_residual: T,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Subgradient estimate `A*v` at `z♯` (an exact certificate when
    /// `termination == Certified`).
    pub dual: Vec<Complex<T>>,
}

impl<T: Real> SolverResult<T> {
    /// Converts a non-converged result into [`Error::MaxIterExceeded`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxIterExceeded(self.iterations))
        }
    }

    fn zero(n: usize, residual: T, termination: Termination) -> Self {
        Self {
            z_sharp: vec![zero(); n],
            objective: T::zero(),
            feasibility_residual: residual,
            iterations: 0,
            converged: true,
            termination,
            dual: vec![zero(); n],
        }
    }
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `z ↦ z · max(0, 1 − τ/|z|)`.
pub fn soft_threshold<T: Real>(z: Complex<T>, tau: T) -> Complex<T> {
    let m = z.norm();
    if m <= tau {
        zero()
    } else {
        z * ((m - tau) / m)
    }
}

fn sub<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dist<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    norm2(&sub(a, b))
}

fn check_dims<T: Real>(a: &CMatrix<T>, y: &[Complex<T>]) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!("y has {} entries, A has {} rows", y.len(), a.rows())));
    }
    Ok(())
}

/// Factorization of `AA* (+ shift)`, falling back to a tiny ridge when `A`
/// has dependent rows.
fn factor_rows<T: Real>(gram: &CMatrix<T>) -> Result<Cholesky<T>> {
    if let Some(ch) = Cholesky::new(gram) {
        if ch.diag_ratio() > T::epsilon().sqrt() {
            return Ok(ch);
        }
    }
    let m = gram.rows();
    let trace = (0..m).fold(T::zero(), |acc, i| acc + gram[(i, i)].re);
    let shift = trace / T::of_usize(m.max(1)) * T::epsilon() * T::of(16.0);
    Cholesky::with_shift(gram, shift).ok_or_else(|| Error::Dimension("A A* is not factorizable".into()))
}

/// Projection onto `{z : Az = y}` with a cached factorization of `AA*`.
struct AffineProjector<'a, T> {
    a: &'a CMatrix<T>,
    y: &'a [Complex<T>],
    chol: Cholesky<T>,
}

impl<'a, T: Real> AffineProjector<'a, T> {
    fn new(a: &'a CMatrix<T>, y: &'a [Complex<T>]) -> Result<Self> {
        let chol = factor_rows(&a.gram_rows())?;
        Ok(Self { a, y, chol })
    }

    fn project(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let r = sub(&self.a.mul_vec(v), self.y);
        let w = self.chol.solve(&r);
        sub(v, &self.a.adjoint_mul_vec(&w))
    }
}

/// `min ‖z‖₁  s.t.  Az = y`.
pub fn basis_pursuit<T: Real>(a: &CMatrix<T>, y: &[Complex<T>], opts: &SolverOptions<T>) -> Result<SolverResult<T>> {
    check_dims(a, y)?;
    if opts.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    let ynorm = norm2(y);
    let feas_tol = opts.tol_feas * ynorm.max(T::one());
    if m == 0 || ynorm == T::zero() {
        return Ok(SolverResult::zero(n, ynorm, Termination::Converged));
    }
    let proj = AffineProjector::new(a, y)?;
    let x0 = proj.project(&vec![zero(); n]);
    let r0 = dist(&a.mul_vec(&x0), y);
    if r0 > feas_tol {
        return Err(Error::InfeasibleSystem(r0.to_f64_lossy()));
    }

    let mut tau = opts.step.unwrap_or_else(|| default_step(&x0));
    let mut z = x0.clone();
    let mut u = vec![zero(); n];
    let mut balance_updates = 0;
    let mut iterations = 0;
    let mut termination = Termination::MaxIter;
    let mut certificate: Option<(Vec<Complex<T>>, Vec<Complex<T>>)> = None;

    for it in 1..=opts.max_iter {
        iterations = it;
        let v = sub(&z, &u);
        let x = proj.project(&v);
        let w: Vec<Complex<T>> = x.iter().zip(&u).map(|(a, b)| a + b).collect();
        let z_new: Vec<Complex<T>> = w.iter().map(|&c| soft_threshold(c, tau)).collect();
        u = sub(&w, &z_new);
        let primal = dist(&x, &z_new);
        let change = dist(&z_new, &z);
        z = z_new;

        let znorm = norm2(&z);
        if change <= opts.tol_change * znorm.max(T::one()) {
            let res = dist(&a.mul_vec(&z), y);
            if res <= feas_tol {
                termination = Termination::Converged;
                break;
            }
        }

        if opts.polish && it % CERTIFY_EVERY == 0 {
            if let Some(cert) = certify(a, y, &z, feas_tol) {
                certificate = Some(cert);
                termination = Termination::Certified;
                break;
            }
        }

        if it % BALANCE_EVERY == 0 && balance_updates < MAX_BALANCE_UPDATES {
            let ratio = T::of(BALANCE_RATIO);
            let unorm = norm2(&u);
            let r_rel = primal / znorm.max(T::min_positive_value());
            let s_rel = change / unorm.max(T::min_positive_value());
            let factor = if r_rel > ratio * s_rel {
                Some(T::of(0.5))
            } else if s_rel > ratio * r_rel {
                Some(T::of(2.0))
            } else {
                None
            };
            if let Some(f) = factor {
                tau *= f;
                u.iter_mut().for_each(|c| *c *= f);
                balance_updates += 1;
            }
        }
    }

    let (z_final, dual) = match certificate {
        Some(c) => c,
        None => {
            let scaled: Vec<Complex<T>> = u.iter().map(|c| c / tau).collect();
            match (opts.polish, termination) {
                (true, Termination::Converged) => match polish(a, y, &z, feas_tol) {
                    Some(p) if norm1(&p) <= norm1(&z) * (T::one() + T::of(1e-6)) + T::epsilon() => {
                        (p, scaled)
                    }
                    _ => (z, scaled),
                },
                _ => (z, scaled),
            }
        }
    };
    let residual = dist(&a.mul_vec(&z_final), y);
    let converged = termination != Termination::MaxIter;
    Ok(SolverResult {
        objective: norm1(&z_final),
        z_sharp: z_final,
        feasibility_residual: residual,
        iterations,
        converged,
        termination,
        dual,
    })
}

fn default_step<T: Real>(x0: &[Complex<T>]) -> T {
    let s = norm_inf(x0) * T::of(0.1);
    if s > T::zero() {
        s
    } else {
        T::one()
    }
}

fn support<T: Real>(z: &[Complex<T>]) -> Vec<usize> {
    z.iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > T::zero())
        .map(|(i, _)| i)
        .collect()
}

/// Least squares on the support of `z`; `None` unless the result is feasible.
fn polish<T: Real>(a: &CMatrix<T>, y: &[Complex<T>], z: &[Complex<T>], feas_tol: T) -> Option<Vec<Complex<T>>> {
    let s = support(z);
    if s.is_empty() || s.len() > a.rows() {
        return None;
    }
    let sub_a = a.select_columns(&s);
    let chol = Cholesky::new(&sub_a.gram_cols())?;
    let mut c = chol.solve(&sub_a.adjoint_mul_vec(y));
    // One step of iterative refinement.
    let r = sub(y, &sub_a.mul_vec(&c));
    let dc = chol.solve(&sub_a.adjoint_mul_vec(&r));
    c.iter_mut().zip(&dc).for_each(|(a, b)| *a += b);
    if dist(&sub_a.mul_vec(&c), y) > feas_tol {
        return None;
    }
    let mut out = vec![zero(); a.cols()];
    for (&i, v) in s.iter().zip(c) {
        out[i] = v;
    }
    Some(out)
}

/// Polished iterate plus `g = A*v` with `g_S = sign(c_S)` and `‖g‖_∞ ≤ 1`,
/// which proves the polished point optimal.
fn certify<T: Real>(
    a: &CMatrix<T>,
    y: &[Complex<T>],
    z: &[Complex<T>],
    feas_tol: T,
) -> Option<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    let c = polish(a, y, z, feas_tol)?;
    let s = support(&c);
    if s.is_empty() {
        return None;
    }
    let sub_a = a.select_columns(&s);
    let signs: Vec<Complex<T>> = s.iter().map(|&i| c[i] / c[i].norm()).collect();
    let chol = Cholesky::new(&sub_a.gram_cols())?;
    let v = sub_a.mul_vec(&chol.solve(&signs));
    let g = a.adjoint_mul_vec(&v);
    let tol = T::of(1e-9);
    let on_support = s.iter().zip(&signs).all(|(&i, sg)| (g[i] - sg).norm() <= tol);
    let bounded = g.iter().all(|gi| gi.norm() <= T::one() + tol);
    (on_support && bounded).then_some((c, g))
}

/// Refines `z` on its support: with phases `σ` frozen, the minimizer of
/// `Re⟨σ, z⟩` over `‖A_S z − y‖ ≤ η` is `z_ls − √(η² − r²) G⁻¹σ / √(σ*G⁻¹σ)`.
/// Iterated while the phases keep changing; `None` if any step is invalid.
fn polish_ball<T: Real>(
    a: &CMatrix<T>,
    y: &[Complex<T>],
    eta: T,
    z: &[Complex<T>],
    feas_tol: T,
) -> Option<Vec<Complex<T>>> {
    let s = support(z);
    if s.is_empty() || s.len() > a.rows() {
        return None;
    }
    let sub_a = a.select_columns(&s);
    let chol = Cholesky::new(&sub_a.gram_cols())?;
    let z_ls = chol.solve(&sub_a.adjoint_mul_vec(y));
    let r = dist(&sub_a.mul_vec(&z_ls), y);
    if r > eta {
        return None;
    }
    let slack = (eta * eta - r * r).sqrt();
    let mut c: Vec<Complex<T>> = s.iter().map(|&i| z[i]).collect();
    for _ in 0..8 {
        if c.iter().any(|v| v.norm() == T::zero()) {
            return None;
        }
        let sigma: Vec<Complex<T>> = c.iter().map(|v| v / v.norm()).collect();
        let gs = chol.solve(&sigma);
        let q = crate::scalar::inner(&sigma, &gs).re;
        if !(q > T::zero()) {
            return None;
        }
        let f = slack / q.sqrt();
        let next: Vec<Complex<T>> = z_ls.iter().zip(&gs).map(|(a, b)| a - b * f).collect();
        let moved = dist(&next, &c);
        c = next;
        if moved <= T::epsilon() * norm2(&c) {
            break;
        }
    }
    let sign_flip = s.iter().zip(&c).any(|(&i, v)| (v.conj() * z[i]).re <= T::zero());
    if sign_flip || dist(&sub_a.mul_vec(&c), y) > eta + feas_tol {
        return None;
    }
    let mut out = vec![zero(); a.cols()];
    for (&i, v) in s.iter().zip(c) {
        out[i] = v;
    }
    Some(out)
}

/// Projection of `v` onto the ball of radius `eta` around `center`.
fn project_ball<T: Real>(v: &[Complex<T>], center: &[Complex<T>], eta: T) -> Vec<Complex<T>> {
    let d = sub(v, center);
    let r = norm2(&d);
    if r <= eta {
        v.to_vec()
    } else {
        let f = eta / r;
        center.iter().zip(&d).map(|(c, e)| c + e * f).collect()
    }
}

/// `min ‖z‖₁  s.t.  ‖Az − y‖₂ ≤ η`.
pub fn bpdn<T: Real>(a: &CMatrix<T>, y: &[Complex<T>], eta: T, opts: &SolverOptions<T>) -> Result<SolverResult<T>> {
    check_dims(a, y)?;
    if !(eta >= T::zero()) || !eta.is_finite() {
        return Err(Error::Dimension(format!("noise radius {eta} must be finite and >= 0")));
    }
    if eta == T::zero() {
        return basis_pursuit(a, y, opts);
    }
    if opts.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    let ynorm = norm2(y);
    if ynorm <= eta {
        return Ok(SolverResult::zero(n, T::zero(), Termination::Converged));
    }
    let feas_tol = opts.tol_feas * ynorm.max(T::one());

    // Rows rescaled to unit RMS norm; the feasible set is unchanged.
    let rms = (a.data().iter().map(|c| c.norm_sqr()).sum::<T>() / T::of_usize(m)).sqrt();
    let inv = T::one() / rms;
    let sa = a.scaled(inv);
    let sy: Vec<Complex<T>> = y.iter().map(|c| c * inv).collect();
    let seta = eta * inv;
    let mut k = sa.gram_rows();
    for i in 0..m {
        k[(i, i)] += Complex::new(T::one(), T::zero());
    }
    let chol = Cholesky::new(&k).ok_or_else(|| Error::Dimension("I + AA* is not factorizable".into()))?;

    let x0 = {
        let proj = AffineProjector::new(&sa, &sy)?;
        proj.project(&vec![zero(); n])
    };
    let mut tau = opts.step.unwrap_or_else(|| default_step(&x0));
    let mut zz = x0.clone();
    let mut zw = sa.mul_vec(&zz);
    let mut uz = vec![zero(); n];
    let mut uw = vec![zero(); m];
    let mut balance_updates = 0;
    let mut iterations = 0;
    let mut termination = Termination::MaxIter;

    for it in 1..=opts.max_iter {
        iterations = it;
        let c = sub(&zz, &uz);
        let d = sub(&zw, &uw);
        let corr = chol.solve(&sub(&d, &sa.mul_vec(&c)));
        let xz: Vec<Complex<T>> = c.iter().zip(sa.adjoint_mul_vec(&corr)).map(|(a, b)| a + b).collect();
        let xw = sa.mul_vec(&xz);

        let wz: Vec<Complex<T>> = xz.iter().zip(&uz).map(|(a, b)| a + b).collect();
        let ww: Vec<Complex<T>> = xw.iter().zip(&uw).map(|(a, b)| a + b).collect();
        let zz_new: Vec<Complex<T>> = wz.iter().map(|&c| soft_threshold(c, tau)).collect();
        let zw_new = project_ball(&ww, &sy, seta);
        uz = sub(&wz, &zz_new);
        uw = sub(&ww, &zw_new);

        let primal = (dist(&xz, &zz_new).powi(2) + dist(&xw, &zw_new).powi(2)).sqrt();
        let change_z = dist(&zz_new, &zz);
        let change = (change_z.powi(2) + dist(&zw_new, &zw).powi(2)).sqrt();
        zz = zz_new;
        zw = zw_new;

        let znorm = norm2(&zz);
        if change_z <= opts.tol_change * znorm.max(T::one()) {
            let gap = (dist(&a.mul_vec(&zz), y) - eta).max(T::zero());
            if gap <= feas_tol {
                termination = Termination::Converged;
                break;
            }
        }

        if it % BALANCE_EVERY == 0 && balance_updates < MAX_BALANCE_UPDATES {
            let ratio = T::of(BALANCE_RATIO);
            let unorm = (norm2(&uz).powi(2) + norm2(&uw).powi(2)).sqrt();
            let r_rel = primal / (znorm.powi(2) + norm2(&zw).powi(2)).sqrt().max(T::min_positive_value());
            let s_rel = change / unorm.max(T::min_positive_value());
            let factor = if r_rel > ratio * s_rel {
                Some(T::of(0.5))
            } else if s_rel > ratio * r_rel {
                Some(T::of(2.0))
            } else {
                None
            };
            if let Some(f) = factor {
                tau *= f;
                uz.iter_mut().for_each(|c| *c *= f);
                uw.iter_mut().for_each(|c| *c *= f);
                balance_updates += 1;
            }
        }
    }

    if opts.polish && termination == Termination::Converged {
        if let Some(p) = polish_ball(a, y, eta, &zz, feas_tol) {
            if norm1(&p) < norm1(&zz) {
                zz = p;
            }
        }
    }
    let gap = (dist(&a.mul_vec(&zz), y) - eta).max(T::zero());
    let dual = uz.iter().map(|c| c / tau).collect();
    Ok(SolverResult {
        objective: norm1(&zz),
        z_sharp: zz,
        feasibility_residual: gap,
        iterations,
        converged: termination == Termination::Converged,
        termination,
        dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, rng_from};

    type C = Complex<f64>;

    fn real_matrix(m: usize, n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = rng_from(seed);
        let data: Vec<f64> = (0..m * n).map(|_| gaussian(&mut rng)).collect();
        CMatrix::from_real(m, n, &data)
    }

    #[test]
    fn soft_threshold_keeps_phase() {
        let z = C::new(3.0, 4.0);
        let s = soft_threshold(z, 1.0);
        assert!((s.norm() - 4.0).abs() < 1e-15);
        assert!((s.arg() - z.arg()).abs() < 1e-15);
        assert_eq!(soft_threshold(z, 5.0), C::new(0.0, 0.0));
    }

    #[test]
    fn identity_returns_y() {
        let a = CMatrix::<f64>::identity(4);
        let y = vec![C::new(1.0, 0.0), C::new(0.0, -2.0), C::new(0.5, 0.5), C::new(0.0, 0.0)];
        let r = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        for (u, v) in r.z_sharp.iter().zip(&y) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn two_column_lp() {
        let a = CMatrix::from_real(1, 2, &[1.0, 0.5]);
        let y = vec![C::new(1.0, 0.0)];
        let r = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.z_sharp[0] - C::new(1.0, 0.0)).norm() < 1e-9);
        assert!(r.z_sharp[1].norm() < 1e-9);
        assert!((r.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_sparse_complex_vector() {
        let mut rng = rng_from(5);
        let (m, n) = (20, 60);
        let data: Vec<C> = (0..m * n).map(|_| crate::rng::complex_gaussian(&mut rng)).collect();
        let a = CMatrix::from_vec(m, n, data);
        let mut x = vec![C::new(0.0, 0.0); n];
        x[3] = C::new(1.0, -0.5);
        x[17] = C::new(-0.3, 2.0);
        x[41] = C::new(0.7, 0.1);
        let y = a.mul_vec(&x);
        let r = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(nmse(&x, &r.z_sharp).unwrap() < 1e-20);
    }

    #[test]
    fn inconsistent_system_is_reported() {
        let a = CMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let y = vec![C::new(1.0, 0.0), C::new(2.0, 0.0)];
        assert!(matches!(
            basis_pursuit(&a, &y, &SolverOptions::default()),
            Err(Error::InfeasibleSystem(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_unconverged() {
        let a = real_matrix(4, 8, 3);
        let x = vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(-2.0, 0.0)]
            .into_iter()
            .chain(std::iter::repeat_n(C::new(0.0, 0.0), 5))
            .collect::<Vec<_>>();
        let y = a.mul_vec(&x);
        let opts = SolverOptions {
            max_iter: 2,
            polish: false,
            ..SolverOptions::default()
        };
        let r = basis_pursuit(&a, &y, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.termination, Termination::MaxIter);
        assert!(matches!(r.require_converged(), Err(Error::MaxIterExceeded(2))));
    }

    #[test]
    fn bpdn_trivial_cases() {
        let a = real_matrix(4, 8, 9);
        let x: Vec<C> = (0..8).map(|i| C::new(if i == 2 { 1.5 } else { 0.0 }, 0.0)).collect();
        let y = a.mul_vec(&x);
        let big = norm2(&y) * 1.01;
        let r = bpdn(&a, &y, big, &SolverOptions::default()).unwrap();
        assert!(r.z_sharp.iter().all(|c| c.norm() == 0.0));
        let bp = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        let b0 = bpdn(&a, &y, 0.0, &SolverOptions::default()).unwrap();
        assert_eq!(bp.z_sharp, b0.z_sharp);
        assert!(bpdn(&a, &y, -1.0, &SolverOptions::default()).is_err());
    }

    #[test]
    fn bpdn_respects_ball() {
        let a = real_matrix(10, 30, 21);
        let mut x = vec![C::new(0.0, 0.0); 30];
        x[4] = C::new(2.0, 0.0);
        x[20] = C::new(-1.0, 0.0);
        let y = a.mul_vec(&x);
        let eta = 0.05 * norm2(&y);
        let r = bpdn(&a, &y, eta, &SolverOptions::default()).unwrap();
        assert!(r.converged, "iterations {}", r.iterations);
        assert!(r.feasibility_residual <= 1e-7 * norm2(&y).max(1.0));
        assert!(r.objective < norm1(&x));
    }

    #[test]
    fn single_precision_solve() {
        let a = CMatrix::<f32>::from_real(2, 4, &[1.0, 0.0, 0.3, -0.7, 0.0, 1.0, 0.9, 0.2]);
        let x = [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)]
            .map(|c| Complex::new(c.re as f32, c.im as f32));
        let y = a.mul_vec(&x);
        let opts = SolverOptions {
            tol_feas: 1e-5,
            tol_change: 1e-6,
            ..SolverOptions::default()
        };
        let r = basis_pursuit(&a, &y, &opts).unwrap();
        assert!(r.converged);
        assert!((r.z_sharp[2].re - 1.0).abs() < 1e-4);
    }
}
