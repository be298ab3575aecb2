//! Invariant suite behind `spt-qcnn verify`.
//!
//! Every check is seeded, so two runs produce identical reports.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::noise::channels::{completeness_error, gammas, mat2_to_dmatrix, relax_dephase_kraus, zz_channel, ZzCoupling};
use crate::noise::{simulate_noisy_circuit, DensityMatrix, DeviceModel};
use crate::pauli::{Letter, PauliExpectation, PauliString};
use crate::qcnn::classify::{d_value, msop_observable};
use crate::qcnn::{
    equivalence_check, measurement_settings, msop_expand, msop_expand_with, qcnn_output, qcnn_output_density,
    random_inputs, ExpansionLimits, MsopPart, QcnnVariant,
};
use crate::simulator::{run_circuit, Circuit, Gate, StateVector};
use crate::spinchain::{build_hamiltonian, ground_state, string_order, HamiltonianParams};
use crate::vqe::{rewrite_angles, AnsatzParams, EnergyModel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check { name: name.into(), passed, detail }
}

fn within(value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("max deviation {value:.3e} (tolerance {tol:e})"))
}

fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    let letters: Vec<Letter> = (0..n).map(|_| Letter::ALL[rng.random_range(0..4)]).collect();
    PauliString::from_letters(&letters).with_phase(rng.random_range(0..4))
}

fn random_circuit(n: usize, len: usize, rng: &mut ChaCha8Rng) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        if rng.random_bool(0.3) {
            let a = rng.random_range(0..n - 1);
            c.cz(a, a + 1)?;
        } else {
            c.ry(rng.random_range(0..n), rng.random_range(-3.2..3.2))?;
        }
    }
    Ok(c)
}

fn cluster() -> Result<StateVector> {
    let mut c = Circuit::new(7);
    for q in 0..7 {
        c.h(q)?;
    }
    for q in 0..6 {
        c.cz(q, q + 1)?;
    }
    run_circuit(&c, &StateVector::zero(7)?)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

/// Runs every check; `golden` is the committed d = 1 expansion CSV.
pub fn run_all(golden: &Path) -> VerifyReport {
    let mut checks = Vec::new();

    checks.push(check("pauli.multiply_matches_dense", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let (p, q) = (random_pauli(n, &mut rng), random_pauli(n, &mut rng));
            let d = p.multiply(&q)?.to_matrix()? - p.to_matrix()? * q.to_matrix()?;
            worst = worst.max(max_abs(&d));
        }
        Ok(within(worst, 1e-12))
    }));

    checks.push(check("pauli.cz_conjugation", || {
        let mut cz = DMatrix::<Complex64>::identity(4, 4);
        cz[(3, 3)] = Complex64::new(-1.0, 0.0);
        let mut worst: f64 = 0.0;
        for a in Letter::ALL {
            for b in Letter::ALL {
                let p = PauliString::from_letters(&[a, b]);
                let d = p.conjugate_by_cz(0, 1)?.to_matrix()? - &cz * p.to_matrix()? * &cz;
                worst = worst.max(max_abs(&d));
            }
        }
        Ok(within(worst, 1e-12))
    }));

    checks.push(check("pauli.commutation", || {
        let mut bad = 0;
        for i in 0..16 {
            for j in 0..16 {
                let p = PauliString::from_letters(&[Letter::ALL[i / 4], Letter::ALL[i % 4]]);
                let q = PauliString::from_letters(&[Letter::ALL[j / 4], Letter::ALL[j % 4]]);
                let (a, b) = (p.to_matrix()?, q.to_matrix()?);
                let dense = max_abs(&(&a * &b - &b * &a)) < 1e-12;
                if dense != p.commutes_with(&q) {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{bad} of 256 pairs disagree")))
    }));

    checks.push(check("spinchain.hermitian", || {
        let m = build_hamiltonian(&HamiltonianParams::seven(0.7, -0.4))?.to_matrix()?;
        Ok(within(max_abs(&(&m - m.adjoint())), 0.0))
    }));

    checks.push(check("spinchain.large_field_bound", || {
        let mut ok = true;
        let mut detail = Vec::new();
        for h1 in [10.0, 100.0] {
            let e0 = ground_state(&build_hamiltonian(&HamiltonianParams::seven(h1, 0.0))?)?.e0;
            ok &= e0 <= -7.0 * h1 + 7.0;
            detail.push(format!("E0({h1}) = {e0:.6}"));
        }
        Ok((ok, detail.join(", ")))
    }));

    checks.push(check("spinchain.string_order", || {
        let s0 = string_order(&ground_state(&build_hamiltonian(&HamiltonianParams::seven(0.0, 0.0))?)?.ground)?;
        let pm = string_order(&ground_state(&build_hamiltonian(&HamiltonianParams::seven(1.1, 1.4))?)?.ground)?;
        Ok(((s0 - 1.0).abs() < 1e-10 && pm.abs() < 0.1, format!("S(0,0) = {s0:.12}, S(1.1,1.4) = {pm:.6}")))
    }));

    checks.push(check("spinchain.gap", || {
        let gap = ground_state(&build_hamiltonian(&HamiltonianParams::seven(0.0, 0.0))?)?.gap;
        Ok((gap > 1e-6, format!("gap {gap:.6}")))
    }));

    checks.push(check("simulator.norm", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_circuit(6, 1000, &mut rng)?;
        let mut s = StateVector::haar_random(6, &mut rng)?;
        let mut worst: f64 = 0.0;
        for g in c.ops() {
            s.apply_gate(g)?;
            worst = worst.max((s.norm() - 1.0).abs());
        }
        Ok(within(worst, 1e-10))
    }));

    checks.push(check("simulator.inverse", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_circuit(5, 200, &mut rng)?;
        let start = StateVector::haar_random(5, &mut rng)?;
        let mut s = run_circuit(&c, &start)?;
        for g in c.ops().iter().rev() {
            let inv = match g {
                Gate::Ry { qubit, theta } => Gate::Ry { qubit: *qubit, theta: -theta },
                other => other.clone(),
            };
            s.apply_gate(&inv)?;
        }
        let d = s.amplitudes().iter().zip(start.amplitudes()).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        Ok(within(d, 1e-10))
    }));

    checks.push(check("noise.cptp", || {
        let d = DeviceModel::table_one();
        let mut worst: f64 = 0.0;
        for q in &d.qubits {
            for dt in [d.single_qubit_gate_duration, 111e-9] {
                let ops: Vec<_> = relax_dephase_kraus(gammas(q.t1, q.t2, dt)?).iter().map(mat2_to_dmatrix).collect();
                worst = worst.max(completeness_error(&ops));
            }
        }
        for p in &d.pairs {
            worst = worst.max(completeness_error(&p.chi.kraus()));
        }
        Ok(within(worst, 1e-10))
    }));

    checks.push(check("noise.noiseless_limit", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = DeviceModel::noiseless(5);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let c = random_circuit(5, 30, &mut rng)?;
            let rho = simulate_noisy_circuit(&c, &d)?;
            let pure = DensityMatrix::from_pure(&run_circuit(&c, &StateVector::zero(5)?)?)?;
            worst = worst.max(rho.trace_distance(&pure)?);
        }
        Ok(within(worst, 1e-9))
    }));

    checks.push(check("noise.zz_order", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let start = DensityMatrix::random_mixed(4, 3, &mut rng)?;
        let a = ZzCoupling { a: 0, b: 1, zz_hz: 12e3 };
        let b = ZzCoupling { a: 2, b: 3, zz_hz: 7e3 };
        let (mut x, mut y) = (start.clone(), start);
        zz_channel(&mut x, &[a], 1e-6)?;
        zz_channel(&mut x, &[b], 1e-6)?;
        zz_channel(&mut y, &[b], 1e-6)?;
        zz_channel(&mut y, &[a], 1e-6)?;
        Ok(within(x.trace_distance(&y)?, 1e-12))
    }));

    checks.push(check("vqe.gradient", || {
        let model = EnergyModel::new(&build_hamiltonian(&HamiltonianParams::seven(0.3, -0.5))?, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let th: Vec<f64> = (0..model.n_angles()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let (a, b) = (model.gradient_shift(&th), model.gradient_fd(&th, 1e-5));
            worst = a.iter().zip(&b).fold(worst, |w, (x, y)| w.max((x - y).abs()));
        }
        Ok(within(worst, 1e-6))
    }));

    checks.push(check("vqe.rewrite_state", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        let mut in_range = true;
        for depth in [1, 2] {
            for _ in 0..20 {
                let count = crate::vqe::angle_count(7, depth);
                let p = AnsatzParams::new(7, depth, (0..count).map(|_| rng.random_range(-3.1..3.1)).collect())?;
                let r = rewrite_angles(&p);
                let f = crate::simulator::fidelity(&crate::vqe::prepare_state(&p)?, &crate::vqe::prepare_state(&r)?)?;
                worst = worst.max((1.0 - f).abs());
                in_range &= r.first_layer().iter().all(|a| a.abs() <= std::f64::consts::FRAC_PI_2 + 1e-12);
                in_range &= r.angles.iter().all(|a| a.abs() <= std::f64::consts::PI + 1e-12);
            }
        }
        let (ok, detail) = within(worst, 1e-10);
        Ok((ok && in_range, format!("{detail}; angles in range: {in_range}")))
    }));

    checks.push(check("qcnn.golden_d1", || {
        let want = msop_expand(1)?.sorted_by_setting().to_csv_string()?;
        match std::fs::read_to_string(golden) {
            Ok(text) if text == want => Ok((true, format!("{} matches", golden.display()))),
            Ok(_) => Ok((false, format!("{} differs from the computed expansion", golden.display()))),
            Err(e) => Ok((false, format!("{}: {e}", golden.display()))),
        }
    }));

    checks.push(check("qcnn.term_counts", || {
        let e = msop_expand(1)?;
        let strings: Vec<_> = e.terms.iter().map(|t| t.pauli.clone()).collect();
        let settings = measurement_settings(&strings).count();
        let first = msop_expand_with(1, MsopPart::First, ExpansionLimits::default())?;
        let first_strings: Vec<_> = first.terms.iter().map(|t| t.pauli.clone()).collect();
        let first_settings = measurement_settings(&first_strings).count();
        Ok((
            e.len() == 10 && settings == 3 && first_settings == 2,
            format!("{} terms, {settings} settings, first part {first_settings} settings", e.len()),
        ))
    }));

    checks.push(check("qcnn.fixed_point_and_single_errors", || {
        let s = cluster()?;
        let mut worst = (qcnn_output(&s, 0, 0)?.y_expect - 1.0).abs();
        for q in 0..7 {
            for letter in [Letter::X, Letter::Z] {
                let mut e = s.clone();
                e.apply_gate(&Gate::Pauli { qubit: q, letter })?;
                worst = worst.max((qcnn_output(&e, 0, 0)?.y_expect - 1.0).abs());
            }
        }
        Ok(within(worst, 1e-12))
    }));

    checks.push(check("qcnn.observable_identity", || {
        let obs = msop_observable()?;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut worst: f64 = 0.0;
        for _ in 0..30 {
            let rho = DensityMatrix::random_mixed(7, 4, &mut rng)?;
            worst = worst.max((qcnn_output_density(&rho, 0, 0)?.y_expect - rho.expectation(&obs)?).abs());
        }
        Ok(within(worst, 1e-9))
    }));

    checks.push(check("qcnn.f_structure", || {
        let pm = (0..128).all(|x| d_value(x).abs() == 1);
        let blind = (0..128).all(|x| d_value(x) == d_value(x ^ 0b10) && d_value(x) == d_value(x ^ 0b10_0000));
        Ok((pm && blind, format!("D = ±1: {pm}; independent of x2, x6: {blind}")))
    }));

    checks.push(check("qcnn.equivalence", || {
        let states = random_inputs(10, 9)?;
        let r = equivalence_check(QcnnVariant::Full, QcnnVariant::Equivalent, &states)?;
        let s = equivalence_check(QcnnVariant::Intermediate, QcnnVariant::Equivalent, &states)?;
        Ok(within(r.max_deviation.max(s.max_deviation), 1e-9))
    }));

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { passed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/msop_d1.csv")
    }

    #[test]
    fn fresh_checkout_passes_and_is_deterministic() {
        let a = run_all(&golden());
        for c in a.failures() {
            eprintln!("{}: {}", c.name, c.detail);
        }
        assert!(a.passed);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&run_all(&golden())).unwrap());
    }

    #[test]
    fn corrupted_golden_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("msop_d1.csv");
        let text = std::fs::read_to_string(golden()).unwrap().replace("0.25", "0.3");
        std::fs::write(&path, text).unwrap();
        let r = run_all(&path);
        assert!(!r.passed);
        assert_eq!(r.failures().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["qcnn.golden_d1"]);
    }
}
