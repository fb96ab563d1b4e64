use csd_core::linalg::CMatrix;
use csd_core::rng::{derive_seed, gaussian, rng_from};
use csd_core::scalar::norm2;
use csd_core::solver::{basis_pursuit, bpdn, lp_oracle, SolverOptions, Termination};
use num_complex::Complex;
use rand::Rng;

type C = Complex<f64>;

struct Instance {
    a: CMatrix<f64>,
    y: Vec<C>,
}

fn instance(seed: u64) -> Instance {
    let mut rng = rng_from(seed);
    let m = rng.random_range(2..=5);
    let n = rng.random_range(m + 1..=8);
    let data: Vec<f64> = (0..m * n).map(|_| gaussian(&mut rng)).collect();
    let a = CMatrix::from_real(m, n, &data);
    let y = if rng.random_bool(0.5) {
        (0..m).map(|_| C::new(gaussian(&mut rng), 0.0)).collect()
    } else {
        let mut x = vec![C::new(0.0, 0.0); n];
        for _ in 0..(m / 2).max(1) {
            x[rng.random_range(0..n)] = C::new(gaussian(&mut rng), 0.0);
        }
        a.mul_vec(&x)
    };
    Instance { a, y }
}

#[test]
fn basis_pursuit_matches_enumeration() {
    for t in 0..50 {
        let Instance { a, y } = instance(derive_seed(0xB9, t));
        let exact = lp_oracle(&a, &y, 0.0).unwrap();
        let r = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        assert!(r.converged, "instance {t}");
        assert!((r.objective - exact.objective).abs() <= 1e-6 * exact.objective.max(1.0), "instance {t}");
        for (z, e) in r.z_sharp.iter().zip(&exact.z) {
            assert!((z - C::new(*e, 0.0)).norm() <= 1e-6, "instance {t}: {:?} vs {:?}", r.z_sharp, exact.z);
        }
    }
}

#[test]
fn bpdn_matches_enumeration() {
    for t in 0..50 {
        let Instance { a, y } = instance(derive_seed(0xB0, t));
        let eta = 0.2 * norm2(&y);
        let exact = lp_oracle(&a, &y, eta).unwrap();
        let r = bpdn(&a, &y, eta, &SolverOptions::default()).unwrap();
        assert!(r.converged, "instance {t}");
        assert!(r.objective <= exact.objective + 1e-6, "instance {t}: {} vs {}", r.objective, exact.objective);
        assert!(r.objective >= exact.objective - 1e-6, "instance {t}: {} vs {}", r.objective, exact.objective);
    }
}

#[test]
fn dual_vector_is_a_subgradient() {
    for t in 0..50 {
        let Instance { a, y } = instance(derive_seed(0xD0, t));
        let r = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        let scale = r.z_sharp.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for (z, g) in r.z_sharp.iter().zip(&r.dual) {
            assert!(g.norm() <= 1.0 + 1e-6, "instance {t}");
            if z.norm() > 1e-6 * scale {
                assert!((g - z / z.norm()).norm() <= 1e-5, "instance {t}");
            }
        }
        if r.termination == Termination::Certified {
            // Exact certificate: g = A*v for the v that produced it lies in range(A*).
            let z_objective: f64 = r.z_sharp.iter().map(|c| c.norm()).sum();
            let pairing: C = r.dual.iter().zip(&r.z_sharp).map(|(g, z)| g.conj() * z).sum();
            assert!((pairing.re - z_objective).abs() <= 1e-8 * z_objective.max(1.0));
        }
    }
}

#[test]
fn solution_scales_with_data() {
    for t in 0..20 {
        let Instance { a, y } = instance(derive_seed(0x5C, t));
        let base = basis_pursuit(&a, &y, &SolverOptions::default()).unwrap();
        for c in [1e-3, 7.0, 1e3] {
            let yc: Vec<C> = y.iter().map(|v| v * c).collect();
            let r = basis_pursuit(&a, &yc, &SolverOptions::default()).unwrap();
            let scale = base.z_sharp.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            for (u, v) in r.z_sharp.iter().zip(&base.z_sharp) {
                assert!((u / c - v).norm() <= 1e-8 * scale, "instance {t}, c = {c}");
            }
        }
    }
}
