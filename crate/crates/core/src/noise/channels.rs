//! Relaxation/dephasing and residual-ZZ channels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::simulator::Mat2;

/// Decay rates for one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gammas {
    pub gamma1: f64,
    pub gamma2: f64,
}

/// `γ1 = δt/T1`, `γ2 = δt(1/(2T2) − 1/(4T1))`, with `T2` the Ramsey time.
pub fn gammas(t1: f64, t2: f64, dt: f64) -> Result<Gammas> {
    if !(t1 > 0.0) || !(t2 > 0.0) || dt < 0.0 || !dt.is_finite() {
        return Err(Error::param(format!("need T1 > 0, T2 > 0 and δt ≥ 0 (T1={t1}, T2={t2}, δt={dt})")));
    }
    let gamma1 = dt / t1;
    let gamma2 = dt * (1.0 / (2.0 * t2) - 1.0 / (4.0 * t1));
    if gamma2 < 0.0 {
        return Err(Error::param(format!("γ2 = {gamma2:e} is negative; T2 = {t2:e} exceeds 2·T1")));
    }
    if gamma1 > 1.0 || gamma2 > 1.0 || gamma1 + gamma2 > 1.0 {
        return Err(Error::param(format!("γ1 = {gamma1}, γ2 = {gamma2}: step too long for first-order channel")));
    }
    Ok(Gammas { gamma1, gamma2 })
}

/// `K1 = √γ1 σ⁻`, `K2 = √γ2 Z`, `K3 = diag(√(1−γ2), √(1−γ1−γ2))`.
pub fn relax_dephase_kraus(g: Gammas) -> [Mat2; 3] {
    let c = |v: f64| Complex64::new(v, 0.0);
    let o = c(0.0);
    let a = g.gamma1.sqrt();
    let b = g.gamma2.sqrt();
    [
        [[o, c(a)], [o, o]],
        [[c(b), o], [o, c(-b)]],
        [[c((1.0 - g.gamma2).sqrt()), o], [o, c((1.0 - g.gamma1 - g.gamma2).sqrt())]],
    ]
}

pub fn relax_dephase_channel(rho: &mut DensityMatrix, qubit: usize, t1: f64, t2: f64, dt: f64) -> Result<()> {
    let g = gammas(t1, t2, dt)?;
    if g.gamma1 == 0.0 && g.gamma2 == 0.0 {
        return Ok(());
    }
    rho.apply_kraus_1q(&relax_dephase_kraus(g), qubit)
}

/// Largest entry of `Σ K†K − I`.
pub fn completeness_error(ops: &[DMatrix<Complex64>]) -> f64 {
    let d = ops[0].nrows();
    let mut s = DMatrix::<Complex64>::zeros(d, d);
    for k in ops {
        s += k.adjoint() * k;
    }
    (s - DMatrix::identity(d, d)).iter().fold(0.0, |a, v| a.max(v.norm()))
}

pub fn mat2_to_dmatrix(m: &Mat2) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, c| m[r][c])
}

/// Residual coupling `α_ij |11⟩⟨11|` between two qubits; `zz_hz` is `α/2π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZzCoupling {
    pub a: usize,
    pub b: usize,
    pub zz_hz: f64,
}

/// Phases `δt·Σ α_ij [b_i b_j]` of `exp(−i δt H_zz)` on every basis state.
pub fn zz_phases(n: usize, couplings: &[ZzCoupling], dt: f64) -> Vec<f64> {
    (0..1usize << n)
        .map(|b| {
            couplings
                .iter()
                .filter(|c| b >> c.a & 1 == 1 && b >> c.b & 1 == 1)
                .map(|c| 2.0 * std::f64::consts::PI * c.zz_hz * dt)
                .sum()
        })
        .collect()
}

pub fn zz_channel(rho: &mut DensityMatrix, couplings: &[ZzCoupling], dt: f64) -> Result<()> {
    let n = rho.n_qubits();
    for c in couplings {
        if c.a >= n || c.b >= n {
            return Err(Error::OutOfRange { index: c.a.max(c.b), len: n });
        }
        if c.a == c.b {
            return Err(Error::param("ZZ coupling needs two distinct qubits"));
        }
    }
    if couplings.iter().all(|c| c.zz_hz == 0.0) || dt == 0.0 {
        return Ok(());
    }
    rho.apply_diagonal_phases(&zz_phases(n, couplings, dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::StateVector;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn q1_rates() {
        let g = gammas(38.1e-6, 20.7e-6, 50e-9).unwrap();
        assert_abs_diff_eq!(g.gamma1, 1.312e-3, epsilon = 1e-6);
        assert_abs_diff_eq!(g.gamma2, 8.80e-4, epsilon = 1e-6);
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let rho0 = DensityMatrix::random_mixed(2, 2, &mut rng).unwrap();
        let mut rho = rho0.clone();
        relax_dephase_channel(&mut rho, 0, 10e-6, 5e-6, 0.0).unwrap();
        assert_eq!(rho, rho0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gammas(10e-6, 25e-6, 50e-9).is_err());
        assert!(gammas(1e-9, 1e-9, 50e-9).is_err());
        assert!(gammas(0.0, 1e-6, 50e-9).is_err());
    }

    #[test]
    fn excited_population_decays() {
        let (t1, t2, dt): (f64, f64, f64) = (20e-6, 15e-6, 50e-9);
        let mut rho = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap()).unwrap();
        let steps = (t1 / dt).round() as usize;
        for _ in 0..steps {
            relax_dephase_channel(&mut rho, 0, t1, t2, dt).unwrap();
        }
        let p1 = rho.get(1, 1).re;
        let want = (-1.0f64).exp();
        assert!((p1 - want).abs() / want < 0.02, "{p1}");
    }

    #[test]
    fn coherence_decays_at_t2() {
        let (t1, t2, dt): (f64, f64, f64) = (20e-6, 15e-6, 50e-9);
        let mut rho = DensityMatrix::from_pure(&StateVector::plus(1).unwrap()).unwrap();
        let steps = (t2 / dt).round() as usize;
        for _ in 0..steps {
            relax_dephase_channel(&mut rho, 0, t1, t2, dt).unwrap();
        }
        let c = 2.0 * rho.get(0, 1).norm();
        let want = (-1.0f64).exp();
        assert!((c - want).abs() / want < 0.03, "{c}");
    }

    #[test]
    fn zz_examples() {
        let hz = 15e3;
        let dt = 71e-9;
        let coup = [ZzCoupling { a: 0, b: 1, zz_hz: hz }];
        let ph = zz_phases(2, &coup, dt);
        assert_eq!(&ph[..3], &[0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(ph[3], 2.0 * std::f64::consts::PI * hz * dt, epsilon = 1e-15);
        // dense exponentiation of ¼α(I−Z)(I−Z)
        let alpha = 2.0 * std::f64::consts::PI * hz;
        let iz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 2.0]));
        let h = iz.kronecker(&iz) * (alpha / 4.0);
        let u = (h.map(|v| Complex64::new(0.0, -dt * v))).exp();
        let plus = StateVector::plus(2).unwrap();
        let mut rho = DensityMatrix::from_pure(&plus).unwrap();
        zz_channel(&mut rho, &coup, dt).unwrap();
        let m0 = DensityMatrix::from_pure(&plus).unwrap().to_matrix();
        let want = &u * m0 * u.adjoint();
        assert!((rho.to_matrix() - want).norm() < 1e-12);
        for b in 0..3 {
            let mut r = DensityMatrix::from_pure(&StateVector::basis(2, b).unwrap()).unwrap();
            let before = r.clone();
            zz_channel(&mut r, &coup, dt).unwrap();
            assert_eq!(r, before);
        }
        let mut r = DensityMatrix::from_pure(&plus).unwrap();
        let before = r.clone();
        zz_channel(&mut r, &[ZzCoupling { a: 0, b: 1, zz_hz: 0.0 }], dt).unwrap();
        assert_eq!(r, before);
    }

    proptest! {
        #[test]
        fn relax_kraus_complete(t1 in 5e-6..100e-6f64, ratio in 0.05..1.99f64, dt in 0.0..200e-9f64) {
            let t2 = ratio * t1;
            let g = gammas(t1, t2, dt).unwrap();
            let ops: Vec<_> = relax_dephase_kraus(g).iter().map(mat2_to_dmatrix).collect();
            prop_assert!(completeness_error(&ops) < 1e-10);
        }

        #[test]
        fn disjoint_zz_order_independent(h1 in 0.0..1e5f64, h2 in 0.0..1e5f64, seed in 0u64..100) {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let rho0 = DensityMatrix::random_mixed(4, 2, &mut rng).unwrap();
            let a = [ZzCoupling { a: 0, b: 1, zz_hz: h1 }];
            let b = [ZzCoupling { a: 2, b: 3, zz_hz: h2 }];
            let mut x = rho0.clone();
            zz_channel(&mut x, &a, 1e-6).unwrap();
            zz_channel(&mut x, &b, 1e-6).unwrap();
            let mut y = rho0;
            zz_channel(&mut y, &b, 1e-6).unwrap();
            zz_channel(&mut y, &a, 1e-6).unwrap();
            prop_assert!((x.to_matrix() - y.to_matrix()).norm() < 1e-12);
        }
    }
}
