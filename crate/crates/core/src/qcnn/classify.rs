//! Post-processing `f(x)` and the QCNN output `2⟨y⟩ − 1`.
//!
//! `f` is read off the diagonal of `𝒮_M` after pushing it through the CZ
//! layers: every term becomes a product of `X` operators, so in the X basis
//! the observable is a ±1-valued function `D(x)` and `f = (1 + D)/2`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::circuits::cz_layers;
use super::msop::msop_expand;
use crate::error::{Error, Result};
use crate::noise::{DensityMatrix, DeviceModel, MeasBasis, ReadoutOptions};
use crate::pauli::PauliSum;
use crate::simulator::{BitstringDistribution, Gate, StateVector};

/// Qubits read by `f`: `q1, q3, q4, q5, q7`.
pub const F_QUBITS: [usize; 5] = [0, 2, 3, 4, 6];

/// `D(x)` for every 7-bit X-basis outcome (bit `i` is qubit `i`, 1 = `−`).
#[derive(Clone, Debug, PartialEq)]
pub struct DTable {
    pub values: [i8; 128],
}

/// `𝒮_M` conjugated by the CZ layers, as `(coefficient, X mask)` pairs.
pub fn pushed_observable() -> Result<Vec<(f64, u64)>> {
    let sm = msop_expand(1)?.to_pauli_sum()?;
    let mut out = Vec::new();
    for (c, p) in sm.terms() {
        let mut q = p.clone();
        for g in cz_layers(7)?.ops() {
            if let Gate::Cz { a, b } = g {
                q = q.conjugate_by_cz(*a, *b)?;
            }
        }
        let (x, z) = q.masks();
        if z != 0 || q.phase() % 2 == 1 {
            return Err(Error::InvalidParameter(format!("pushed term {q} is not a real X string")));
        }
        let sign = if q.phase() == 2 { -1.0 } else { 1.0 };
        out.push((sign * c, x));
    }
    Ok(out)
}

/// Builds `D` from the pushed observable and checks it is ±1 everywhere and
/// blind to `q2` and `q6`.
pub fn derive_d_table() -> Result<DTable> {
    let terms = pushed_observable()?;
    let mut values = [0i8; 128];
    for (x, v) in values.iter_mut().enumerate() {
        let d: f64 = terms.iter().map(|&(c, m)| if (m & x as u64).count_ones() % 2 == 1 { -c } else { c }).sum();
        if (d.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("D({x:07b}) = {d} is not ±1")));
        }
        *v = d.signum() as i8;
    }
    for x in 0..128usize {
        if values[x] != values[x ^ 0b10] || values[x] != values[x ^ 0b10_0000] {
            return Err(Error::InvalidParameter(format!("D depends on q2 or q6 at {x:07b}")));
        }
    }
    Ok(DTable { values })
}

fn table() -> &'static DTable {
    static T: OnceLock<DTable> = OnceLock::new();
    T.get_or_init(|| derive_d_table().expect("pushed observable is diagonal with ±1 entries"))
}

/// `D` on a full 7-bit outcome.
pub fn d_value(pattern: usize) -> i8 {
    table().values[pattern & 0x7f]
}

/// `y` for a full 7-bit outcome.
pub fn classify_pattern(pattern: usize) -> u8 {
    u8::from(d_value(pattern) == 1)
}

/// `f(x₁, x₃, x₄, x₅, x₇)`.
pub fn classify_bits(x: [u8; 5]) -> u8 {
    let pattern = x.iter().zip(F_QUBITS).fold(0usize, |acc, (&b, q)| acc | (usize::from(b & 1) << q));
    classify_pattern(pattern)
}

/// Hand-derived closed form, kept for cross-checking the oracle table:
/// `D = ¼[s₁ + s₁₃ + s₁₃₅ + s₃₅₇ + s₅₇ + s₇ − s₁₅ − s₃₇] + ½ s₄ (1 − s₁₃₅₇)`.
pub fn closed_form_d(x: [u8; 5]) -> f64 {
    let [x1, x3, x4, x5, x7] = x.map(|b| if b & 1 == 1 { -1.0 } else { 1.0 });
    0.25 * (x1 + x1 * x3 + x1 * x3 * x5 + x3 * x5 * x7 + x5 * x7 + x7 - x1 * x5 - x3 * x7)
        + 0.5 * x4 * (1.0 - x1 * x3 * x5 * x7)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcnnOutcome {
    /// `2⟨y⟩ − 1`.
    pub y_expect: f64,
    pub shots: u64,
    pub seed: u64,
    /// Distribution over the seven X-basis bits after the CZ layers.
    pub raw: BitstringDistribution,
}

/// `2⟨y⟩ − 1 = Σ_x p(x) D(x)` for a (quasi-)distribution over 7 bits.
pub fn y_expect_from(probs: &[f64]) -> Result<f64> {
    if probs.len() != 128 {
        return Err(Error::SizeMismatch { expected: 128, got: probs.len() });
    }
    Ok(probs.iter().enumerate().map(|(x, p)| p * f64::from(d_value(x))).sum())
}

fn outcome(probs: Vec<f64>, shots: u64, seed: u64) -> Result<QcnnOutcome> {
    let all: Vec<usize> = (0..7).collect();
    let raw = BitstringDistribution::sample(&all, probs, shots, seed)?;
    Ok(QcnnOutcome { y_expect: y_expect_from(&raw.probabilities)?, shots, seed, raw })
}

/// Equivalent-circuit output on a pure state; `shots = 0` is exact.
pub fn qcnn_output(state: &StateVector, shots: u64, seed: u64) -> Result<QcnnOutcome> {
    if state.n_qubits() != 7 {
        return Err(Error::Unsupported(format!("QCNN output needs 7 qubits, got {}", state.n_qubits())));
    }
    let after = crate::simulator::run_circuit(&cz_layers(7)?, state)?;
    outcome(after.x_basis_probabilities(&(0..7).collect::<Vec<_>>())?, shots, seed)
}

/// Equivalent-circuit output on a mixed state with ideal gates and readout.
pub fn qcnn_output_density(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<QcnnOutcome> {
    if rho.n_qubits() != 7 {
        return Err(Error::Unsupported(format!("QCNN output needs 7 qubits, got {}", rho.n_qubits())));
    }
    let mut r = rho.clone();
    for g in cz_layers(7)?.ops() {
        if let Gate::Cz { a, b } = g {
            r.apply_cz(*a, *b)?;
        }
    }
    outcome(r.x_basis_probabilities(&(0..7).collect::<Vec<_>>())?, shots, seed)
}

/// Equivalent circuit run through the device model: noisy CZ layers, noisy
/// X-basis rotations and readout, optional mitigation.
pub fn qcnn_output_noisy(rho: &DensityMatrix, d: &DeviceModel, opts: &ReadoutOptions) -> Result<QcnnOutcome> {
    let after = crate::noise::simulate_noisy_from(&cz_layers(7)?, d, rho.clone())?;
    let probs = crate::noise::measure_setting(&after, d, &[MeasBasis::X; 7], opts)?;
    let all: Vec<usize> = (0..7).collect();
    let raw = BitstringDistribution { qubits: all, shots: opts.shots, seed: opts.seed, probabilities: probs, counts: None };
    Ok(QcnnOutcome { y_expect: y_expect_from(&raw.probabilities)?, shots: opts.shots, seed: opts.seed, raw })
}

/// `𝒮_M` as a Pauli sum.
pub fn msop_observable() -> Result<PauliSum> {
    msop_expand(1)?.to_pauli_sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Circuit;

    fn bits(pattern: usize) -> [u8; 5] {
        F_QUBITS.map(|q| (pattern >> q & 1) as u8)
    }

    #[test]
    fn table_matches_closed_form() {
        for x in 0..128 {
            assert_eq!(f64::from(d_value(x)), closed_form_d(bits(x)), "x = {x:07b}");
        }
    }

    #[test]
    fn named_patterns() {
        assert_eq!(classify_bits([0, 0, 0, 0, 0]), 1);
        assert_eq!(classify_bits([1, 0, 0, 0, 0]), 1);
        assert_eq!(classify_bits([0, 0, 1, 0, 0]), 1);
        assert_eq!(classify_bits([0, 0, 0, 1, 1]), 1);
        assert_eq!(classify_bits([1, 0, 0, 1, 0]), 0);
    }

    fn cluster() -> StateVector {
        let mut c = Circuit::new(7);
        for q in 0..7 {
            c.h(q).unwrap();
        }
        for q in 0..6 {
            c.cz(q, q + 1).unwrap();
        }
        crate::simulator::run_circuit(&c, &StateVector::zero(7).unwrap()).unwrap()
    }

    #[test]
    fn cluster_and_single_errors_give_one() {
        let s = cluster();
        assert!((qcnn_output(&s, 0, 0).unwrap().y_expect - 1.0).abs() < 1e-12);
        for q in 0..7 {
            for letter in [crate::pauli::Letter::X, crate::pauli::Letter::Z] {
                let mut e = s.clone();
                e.apply_gate(&Gate::Pauli { qubit: q, letter }).unwrap();
                let y = qcnn_output(&e, 0, 0).unwrap().y_expect;
                assert!((y - 1.0).abs() < 1e-12, "{letter:?} on {q}: {y}");
            }
        }
    }

    #[test]
    fn density_and_pure_agree() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let s = StateVector::haar_random(7, &mut rng).unwrap();
        let a = qcnn_output(&s, 0, 0).unwrap().y_expect;
        let b = qcnn_output_density(&DensityMatrix::from_pure(&s).unwrap(), 0, 0).unwrap().y_expect;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn sampled_output_is_deterministic() {
        let s = cluster();
        let a = qcnn_output(&s, 500, 9).unwrap();
        let b = qcnn_output(&s, 500, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.raw.counts.as_ref().unwrap().iter().sum::<u64>(), 500);
    }
}
