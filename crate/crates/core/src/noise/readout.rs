//! Readout confusion, mitigation by `M⁻¹` and preselection acceptance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::device::{Confusion, DeviceModel};
use crate::error::{Error, Result};

/// Largest register for which a dense assignment matrix is built.
pub const MAX_ASSIGNMENT_QUBITS: usize = 10;

/// Dense `2^k × 2^k` tensor product of per-qubit confusions; bit `i` of an
/// index belongs to `qubits[i]`.
pub fn build_assignment_matrix(d: &DeviceModel, qubits: &[usize]) -> Result<DMatrix<f64>> {
    assignment_matrix(&d.confusions(qubits)?)
}

pub fn assignment_matrix(confusions: &[Confusion]) -> Result<DMatrix<f64>> {
    let k = confusions.len();
    if k > MAX_ASSIGNMENT_QUBITS {
        return Err(Error::DenseLimit { what: "assignment matrix", n: k, limit: MAX_ASSIGNMENT_QUBITS });
    }
    let dim = 1usize << k;
    Ok(DMatrix::from_fn(dim, dim, |j, i| {
        confusions.iter().enumerate().map(|(q, m)| m[j >> q & 1][i >> q & 1]).product()
    }))
}

/// Applies one 2×2 matrix per bit of a distribution over `2^k` outcomes.
fn apply_per_bit(p: &[f64], mats: &[[[f64; 2]; 2]]) -> Vec<f64> {
    let mut v = p.to_vec();
    for (q, m) in mats.iter().enumerate() {
        let bit = 1usize << q;
        for i in 0..v.len() {
            if i & bit == 0 {
                let (a, b) = (v[i], v[i | bit]);
                v[i] = m[0][0] * a + m[0][1] * b;
                v[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    v
}

/// Distribution seen through the readout: `p_measured = M p_true`.
pub fn apply_confusion(p: &[f64], confusions: &[Confusion]) -> Result<Vec<f64>> {
    if p.len() != 1 << confusions.len() {
        return Err(Error::SizeMismatch { expected: 1 << confusions.len(), got: p.len() });
    }
    Ok(apply_per_bit(p, confusions))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    pub quasi: Vec<f64>,
    pub condition: f64,
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `p̃ = M⁻¹ p` by LU solve; negative entries are kept.
pub fn mitigate_readout(p: &[f64], m: &DMatrix<f64>) -> Result<Mitigated> {
    if m.nrows() != p.len() || m.ncols() != p.len() {
        return Err(Error::SizeMismatch { expected: m.nrows(), got: p.len() });
    }
    let condition = condition_number(m);
    if !condition.is_finite() || condition > 1e12 {
        return Err(Error::Singular { condition });
    }
    let x = m.clone().lu().solve(&DVector::from_column_slice(p)).ok_or(Error::Singular { condition })?;
    Ok(Mitigated { quasi: x.iter().copied().collect(), condition })
}

/// Same result as [`mitigate_readout`] for a tensor-product `M`, without the dense matrix.
pub fn mitigate_tensor(p: &[f64], confusions: &[Confusion]) -> Result<Mitigated> {
    if p.len() != 1 << confusions.len() {
        return Err(Error::SizeMismatch { expected: 1 << confusions.len(), got: p.len() });
    }
    let mut inverses = Vec::with_capacity(confusions.len());
    let mut condition = 1.0;
    for m in confusions {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let mm = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
        let c = condition_number(&mm);
        if det.abs() < 1e-12 || !c.is_finite() {
            return Err(Error::Singular { condition: c });
        }
        condition *= c;
        inverses.push([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]);
    }
    Ok(Mitigated { quasi: apply_per_bit(p, &inverses), condition })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreselectionReport {
    /// `Π (1 − P_th)`: chance that no qubit starts excited.
    pub thermal_factor: f64,
    /// `Π (1 − ε0)`: chance that a ground-state register reads all zeros.
    pub readout_factor: f64,
    /// Chance that the preselection readout reports all zeros.
    pub combined: f64,
}

pub fn preselect(d: &DeviceModel) -> Result<PreselectionReport> {
    let mut thermal = 1.0;
    let mut readout = 1.0;
    let mut combined = 1.0;
    for q in &d.qubits {
        let p = q.thermal_population;
        if !(0.0..=0.1).contains(&p) {
            return Err(Error::param(format!("{}: thermal population {p} outside [0, 0.1]", q.label)));
        }
        let e0 = q.confusion[1][0];
        let e1 = q.confusion[0][1];
        thermal *= 1.0 - p;
        readout *= 1.0 - e0;
        combined *= (1.0 - p) * (1.0 - e0) + p * e1;
    }
    Ok(PreselectionReport { thermal_factor: thermal, readout_factor: readout, combined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ID: Confusion = [[1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn identity_confusions() {
        let m = assignment_matrix(&[ID, ID, ID]).unwrap();
        assert_eq!(m, DMatrix::identity(8, 8));
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let r = mitigate_readout(&p, &DMatrix::identity(4, 4)).unwrap();
        assert_eq!(r.quasi, p);
    }

    #[test]
    fn single_qubit_matrix() {
        let c = [[0.99, 0.03], [0.01, 0.97]];
        let m = assignment_matrix(&[c]).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.99, 0.03, 0.01, 0.97]));
    }

    #[test]
    fn retention_drops_with_excitations() {
        let d = DeviceModel::table_one();
        let qs: Vec<usize> = (0..7).collect();
        let m = build_assignment_matrix(&d, &qs).unwrap();
        for i in 0..128 {
            let s: f64 = m.column(i).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
        let mean = |k: u32| {
            let v: Vec<f64> = (0..128usize).filter(|i| i.count_ones() == k).map(|i| m[(i, i)]).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        for k in 0..7 {
            assert!(mean(k + 1) < mean(k));
        }
    }

    #[test]
    fn tensor_and_dense_mitigation_agree() {
        let d = DeviceModel::table_one();
        let qs = [0, 2, 3, 4, 6];
        let conf = d.confusions(&qs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut p: Vec<f64> = (0..32).map(|_| rng.random::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        let noisy = apply_confusion(&p, &conf).unwrap();
        let a = mitigate_readout(&noisy, &assignment_matrix(&conf).unwrap()).unwrap();
        let b = mitigate_tensor(&noisy, &conf).unwrap();
        for ((x, y), t) in a.quasi.iter().zip(&b.quasi).zip(&p) {
            assert_abs_diff_eq!(x, t, epsilon = 1e-10);
            assert_abs_diff_eq!(y, t, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(a.quasi.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(a.condition > 1.0);
    }

    #[test]
    fn singular_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(matches!(mitigate_readout(&[0.5, 0.5], &m), Err(Error::Singular { .. })));
        assert!(mitigate_tensor(&[0.5, 0.5], &[[[0.5, 0.5], [0.5, 0.5]]]).is_err());
    }

    #[test]
    fn mitigation_beats_raw_on_average() {
        // ⟨Z1 Z2 Z3⟩ of a fixed distribution, sampled through the readout
        let conf = [[[0.97, 0.05], [0.03, 0.95]]; 3];
        let truth = [0.5, 0.0, 0.0, 0.1, 0.0, 0.1, 0.1, 0.2];
        let parity = |p: &[f64]| p.iter().enumerate().map(|(i, v)| if i.count_ones() % 2 == 0 { *v } else { -v }).sum::<f64>();
        let exact = parity(&truth);
        let noisy = apply_confusion(&truth, &conf).unwrap();
        let (mut raw_err, mut mit_err) = (0.0, 0.0);
        for seed in 0..100u64 {
            let d = crate::simulator::BitstringDistribution::sample(&[0, 1, 2], noisy.clone(), 2000, seed).unwrap();
            raw_err += (parity(&d.probabilities) - exact).abs();
            let m = mitigate_tensor(&d.probabilities, &conf).unwrap();
            mit_err += (parity(&m.quasi) - exact).abs();
        }
        assert!(mit_err < raw_err, "{mit_err} vs {raw_err}");
    }

    #[test]
    fn preselection_factors() {
        let ideal = DeviceModel::noiseless(7);
        let r = preselect(&ideal).unwrap();
        assert_eq!((r.thermal_factor, r.readout_factor, r.combined), (1.0, 1.0, 1.0));
        let mut perfect_readout = DeviceModel::table_one();
        for q in &mut perfect_readout.qubits {
            q.confusion = ID;
        }
        let r = preselect(&perfect_readout).unwrap();
        let want: f64 = [0.031, 0.007, 0.027, 0.007, 0.013, 0.013, 0.016].iter().map(|p| 1.0 - p).product();
        assert_abs_diff_eq!(r.thermal_factor, want, epsilon = 1e-12);
        assert_abs_diff_eq!(r.thermal_factor, 0.8912, epsilon = 1e-4);
        let full = preselect(&DeviceModel::table_one()).unwrap();
        assert!((full.combined - 0.91).abs() <= 0.03, "{full:?}");
        let mut hot = DeviceModel::table_one();
        hot.qubits[0].thermal_population = 0.2;
        assert!(preselect(&hot).is_err());
    }

    proptest! {
        #[test]
        fn exact_inversion(ws in proptest::collection::vec(0.01..1.0f64, 8), e in proptest::collection::vec(0.0..0.08f64, 6)) {
            let conf: Vec<Confusion> = e.chunks(2).map(|c| [[1.0 - c[0], c[1]], [c[0], 1.0 - c[1]]]).collect();
            let s: f64 = ws.iter().sum();
            let p: Vec<f64> = ws.iter().map(|w| w / s).collect();
            let m = assignment_matrix(&conf).unwrap();
            let measured = (&m * DVector::from_column_slice(&p)).iter().copied().collect::<Vec<_>>();
            let r = mitigate_readout(&measured, &m).unwrap();
            for (a, b) in r.quasi.iter().zip(&p) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
