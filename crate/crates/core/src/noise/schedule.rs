//! Noisy execution of a circuit on a device model, and noisy readout.
//!
//! Consecutive single-qubit gates on distinct qubits form one time-aligned
//! layer. Each layer applies the ideal unitaries, then residual ZZ on every
//! coupled pair, then relaxation/dephasing on every qubit, idle or not. Each
//! CZ runs alone: its χ process acts on the pair while every other qubit
//! relaxes and every pair of idle qubits accumulates ZZ phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channels::{relax_dephase_channel, zz_channel, ZzCoupling};
use super::chi::apply_chi_process;
use super::density::DensityMatrix;
use super::device::DeviceModel;
use super::readout::{apply_confusion, mitigate_tensor};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::simulator::{h_matrix, x_readout_rotation, BitstringDistribution, Circuit, Gate, Mat2};

fn check_cover(n: usize, d: &DeviceModel) -> Result<()> {
    if d.n_qubits() < n {
        return Err(Error::param(format!("device has {} qubits, circuit needs {n}", d.n_qubits())));
    }
    Ok(())
}

fn couplings(d: &DeviceModel, n: usize, idle: impl Fn(usize) -> bool) -> Vec<ZzCoupling> {
    d.pairs
        .iter()
        .filter(|p| p.a < n && p.b < n && idle(p.a) && idle(p.b) && p.zz_hz != 0.0)
        .map(|p| ZzCoupling { a: p.a, b: p.b, zz_hz: p.zz_hz })
        .collect()
}

/// One single-qubit layer of duration `single_qubit_gate_duration`.
pub fn apply_layer(rho: &mut DensityMatrix, d: &DeviceModel, gates: &[(usize, Mat2)]) -> Result<()> {
    let n = rho.n_qubits();
    check_cover(n, d)?;
    for (q, u) in gates {
        rho.apply_unitary_1q(u, *q)?;
    }
    let dt = d.single_qubit_gate_duration;
    zz_channel(rho, &couplings(d, n, |_| true), dt)?;
    for q in 0..n {
        let p = &d.qubits[q];
        relax_dephase_channel(rho, q, p.t1, p.t2, dt)?;
    }
    Ok(())
}

/// One controlled-Z slot on `(a, b)` with the rest of the register idling.
pub fn apply_noisy_cz(rho: &mut DensityMatrix, d: &DeviceModel, a: usize, b: usize) -> Result<()> {
    let n = rho.n_qubits();
    check_cover(n, d)?;
    let pair = d
        .pair(a, b)
        .ok_or_else(|| Error::param(format!("device has no CZ process for qubits {} and {}", a + 1, b + 1)))?;
    apply_chi_process(rho, (pair.a, pair.b), &pair.chi)?;
    let dt = pair.cz_duration;
    zz_channel(rho, &couplings(d, n, |q| q != a && q != b), dt)?;
    for q in (0..n).filter(|&q| q != a && q != b) {
        let p = &d.qubits[q];
        relax_dephase_channel(rho, q, p.t1, p.t2, dt)?;
    }
    Ok(())
}

/// Runs `c` from `init`; measurement markers and barriers only close layers.
pub fn simulate_noisy_from(c: &Circuit, d: &DeviceModel, init: DensityMatrix) -> Result<DensityMatrix> {
    let n = c.n_qubits();
    if init.n_qubits() != n {
        return Err(Error::SizeMismatch { expected: n, got: init.n_qubits() });
    }
    check_cover(n, d)?;
    let mut rho = init;
    let mut layer: Vec<(usize, Mat2)> = Vec::new();
    for g in c.ops() {
        if let Some(m) = g.matrix_1q() {
            let q = g.qubits()[0];
            if layer.iter().any(|(p, _)| *p == q) {
                apply_layer(&mut rho, d, &layer)?;
                layer.clear();
            }
            layer.push((q, m));
            continue;
        }
        if !layer.is_empty() {
            apply_layer(&mut rho, d, &layer)?;
            layer.clear();
        }
        match g {
            Gate::Cz { a, b } => apply_noisy_cz(&mut rho, d, *a, *b)?,
            Gate::Barrier | Gate::MeasureX(_) => {}
            Gate::Controlled { .. } => {
                return Err(Error::Unsupported("controlled gates have no noisy model; use CZ and single-qubit gates".into()))
            }
            _ => unreachable!("single-qubit gates handled above"),
        }
    }
    if !layer.is_empty() {
        apply_layer(&mut rho, d, &layer)?;
    }
    Ok(rho)
}

/// Runs `c` from `|0…0⟩`, the state left by preselection.
pub fn simulate_noisy_circuit(c: &Circuit, d: &DeviceModel) -> Result<DensityMatrix> {
    simulate_noisy_from(c, d, DensityMatrix::zero(c.n_qubits())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasBasis {
    X,
    Y,
    Z,
}

impl MeasBasis {
    /// Rotation `U` with `U† Z U` equal to the measured Pauli.
    pub fn rotation(self) -> Option<Mat2> {
        match self {
            MeasBasis::Z => None,
            MeasBasis::X => Some(x_readout_rotation()),
            MeasBasis::Y => {
                let h = h_matrix();
                let s_dag = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
                Some([[h[0][0] * s_dag[0], h[0][1] * s_dag[1]], [h[1][0] * s_dag[0], h[1][1] * s_dag[1]]])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutOptions {
    /// Basis rotations run as a noisy gate layer.
    pub noisy_rotation: bool,
    /// Per-qubit readout confusion is applied.
    pub confusion: bool,
    /// Tensor-product `M⁻¹` is applied to the result.
    pub mitigate: bool,
    /// Sampled shots before mitigation; 0 keeps probabilities exact.
    pub shots: u64,
    pub seed: u64,
}

impl ReadoutOptions {
    pub fn ideal() -> Self {
        ReadoutOptions { noisy_rotation: false, confusion: false, mitigate: false, shots: 0, seed: 0 }
    }

    pub fn device(mitigate: bool) -> Self {
        ReadoutOptions { noisy_rotation: true, confusion: true, mitigate, shots: 0, seed: 0 }
    }
}

/// (Quasi-)probabilities over the whole register after measuring qubit `q`
/// in `bases[q]`; bit `q` of an index is qubit `q`.
pub fn measure_setting(rho: &DensityMatrix, d: &DeviceModel, bases: &[MeasBasis], opts: &ReadoutOptions) -> Result<Vec<f64>> {
    let n = rho.n_qubits();
    if bases.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: bases.len() });
    }
    let rot: Vec<(usize, Mat2)> = bases.iter().enumerate().filter_map(|(q, b)| b.rotation().map(|m| (q, m))).collect();
    let mut r = rho.clone();
    if opts.noisy_rotation && !rot.is_empty() {
        apply_layer(&mut r, d, &rot)?;
    } else {
        for (q, m) in &rot {
            r.apply_unitary_1q(m, *q)?;
        }
    }
    let mut p: Vec<f64> = r.diagonal().into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    let all: Vec<usize> = (0..n).collect();
    let conf = d.confusions(&all)?;
    if opts.confusion {
        p = apply_confusion(&p, &conf)?;
    }
    if opts.shots > 0 {
        p = BitstringDistribution::sample(&all, p, opts.shots, opts.seed)?.probabilities;
    }
    if opts.mitigate {
        p = mitigate_tensor(&p, &conf)?.quasi;
    }
    Ok(p)
}

/// Bases that measure every letter of `p` (identity sites read in Z).
pub fn bases_for(p: &PauliString) -> Vec<MeasBasis> {
    p.letters()
        .into_iter()
        .map(|l| match l {
            crate::pauli::Letter::X => MeasBasis::X,
            crate::pauli::Letter::Y => MeasBasis::Y,
            _ => MeasBasis::Z,
        })
        .collect()
}

/// `⟨p⟩` from outcome statistics taken in compatible bases.
pub fn parity_expectation(probs: &[f64], p: &PauliString) -> Result<f64> {
    if !p.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let support: usize = p.support().iter().map(|q| 1usize << q).sum();
    let sign = if p.phase() == 2 { -1.0 } else { 1.0 };
    Ok(sign
        * probs
            .iter()
            .enumerate()
            .map(|(b, v)| if (b & support).count_ones() % 2 == 1 { -v } else { *v })
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::channels::{completeness_error, mat2_to_dmatrix, relax_dephase_kraus, Gammas};
    use crate::noise::chi::synth_chi;
    use crate::pauli::{Letter, PauliExpectation};
    use crate::simulator::{run_circuit, StateVector};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_circuit(n: usize, len: usize, rng: &mut ChaCha8Rng) -> Circuit {
        let mut c = Circuit::new(n);
        for _ in 0..len {
            match rng.random_range(0..4) {
                0 | 1 => {
                    c.ry(rng.random_range(0..n), rng.random_range(-3.1..3.1)).unwrap();
                }
                2 => {
                    let a = rng.random_range(0..n - 1);
                    c.cz(a, a + 1).unwrap();
                }
                _ => {
                    c.h(rng.random_range(0..n)).unwrap();
                }
            }
        }
        c
    }

    #[test]
    fn noiseless_limit_matches_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = DeviceModel::noiseless(5);
        for _ in 0..20 {
            let c = random_circuit(5, 30, &mut rng);
            let rho = simulate_noisy_circuit(&c, &d).unwrap();
            let psi = run_circuit(&c, &StateVector::zero(5).unwrap()).unwrap();
            let want = DensityMatrix::from_pure(&psi).unwrap();
            let diff = (rho.to_matrix() - want.to_matrix()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
            assert!(diff < 1e-9, "{diff}");
        }
    }

    #[test]
    fn table_one_zeroed_is_noiseless() {
        let d = DeviceModel::table_one().without_noise();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_circuit(7, 25, &mut rng);
        let rho = simulate_noisy_circuit(&c, &d).unwrap();
        let psi = run_circuit(&c, &StateVector::zero(7).unwrap()).unwrap();
        assert_abs_diff_eq!(rho.fidelity_with_pure(&psi).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn noisy_runs_stay_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = DeviceModel::table_one();
        for _ in 0..3 {
            let c = random_circuit(7, 20, &mut rng);
            let rho = simulate_noisy_circuit(&c, &d).unwrap();
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-9);
            assert!(rho.trace().im.abs() < 1e-9);
            assert!(rho.hermiticity_error() < 1e-9);
            assert!(rho.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn idle_coherence_decays_with_t2() {
        // a single qubit kept idle through repeated identity layers
        let mut d = DeviceModel::noiseless(2);
        d.qubits[0].t1 = 30e-6;
        d.qubits[0].t2 = 12e-6;
        let mut rho = DensityMatrix::from_pure(&StateVector::plus(2).unwrap()).unwrap();
        let steps = 240;
        for _ in 0..steps {
            apply_layer(&mut rho, &d, &[]).unwrap();
        }
        let t = steps as f64 * d.single_qubit_gate_duration;
        let x1 = PauliString::single(2, 0, Letter::X).unwrap();
        let got = rho.expect_string(&x1).re;
        let want = (-t / d.qubits[0].t2).exp();
        assert!((got - want).abs() / want < 0.03, "{got} vs {want}");
    }

    #[test]
    fn missing_pair_rejected() {
        let mut c = Circuit::new(3);
        c.cz(0, 2).unwrap();
        assert!(simulate_noisy_circuit(&c, &DeviceModel::noiseless(3)).is_err());
        let mut k = Circuit::new(3);
        k.controlled(&[crate::simulator::Control::z(0)], 1, Letter::X).unwrap();
        assert!(matches!(simulate_noisy_circuit(&k, &DeviceModel::noiseless(3)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn basis_rotations_measure_paulis() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let psi = StateVector::haar_random(3, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let d = DeviceModel::noiseless(3);
        for text in ["X1 Y2 Z3", "Y1 X3", "Z2", "Y1 Y2 Y3"] {
            let p = PauliString::parse(text, 3).unwrap();
            let probs = measure_setting(&rho, &d, &bases_for(&p), &ReadoutOptions::ideal()).unwrap();
            assert_abs_diff_eq!(parity_expectation(&probs, &p).unwrap(), psi.expect_string(&p).re, epsilon = 1e-12);
        }
    }

    #[test]
    fn mitigation_undoes_confusion_exactly() {
        let d = DeviceModel::table_one();
        // |−⟩ on every qubit reads all ones, the outcome hit hardest by decay
        let mut psi = StateVector::plus(7).unwrap();
        for q in 0..7 {
            psi.apply_gate(&Gate::Pauli { qubit: q, letter: Letter::Z }).unwrap();
        }
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let p = PauliString::parse("X1 X3 X5", 7).unwrap();
        let mut opts = ReadoutOptions::device(true);
        opts.noisy_rotation = false;
        let probs = measure_setting(&rho, &d, &bases_for(&p), &opts).unwrap();
        assert_abs_diff_eq!(parity_expectation(&probs, &p).unwrap(), -1.0, epsilon = 1e-10);
        opts.mitigate = false;
        let raw = measure_setting(&rho, &d, &bases_for(&p), &opts).unwrap();
        assert!(parity_expectation(&raw, &p).unwrap() > -0.95);
    }

    proptest! {
        #[test]
        fn synthetic_chi_is_cptp(x in 0.0..0.15f64) {
            let chi = synth_chi(x).unwrap();
            prop_assert!(completeness_error(&chi.kraus()) < 1e-10);
        }

        #[test]
        fn relax_channel_preserves_trace(g1 in 0.0..0.5f64, g2 in 0.0..0.49f64, seed in 0u64..50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rho = DensityMatrix::random_mixed(2, 2, &mut rng).unwrap();
            let ops = relax_dephase_kraus(Gammas { gamma1: g1, gamma2: g2 });
            prop_assert!(completeness_error(&ops.iter().map(mat2_to_dmatrix).collect::<Vec<_>>()) < 1e-10);
            rho.apply_kraus_1q(&ops, 1).unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(rho.hermiticity_error() < 1e-12);
        }
    }
}
