//! Device parameters: coherence, thermal population, readout and couplings.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::chi::{synth_chi, ChiMatrix};
use crate::error::{Error, Result};

/// Shipped parameter set for the seven-qubit chain.
pub const TABLE_ONE_TOML: &str = include_str!("../../data/device_tableI.toml");

/// `M[j][i] = P(assign j | prepared i)`; columns sum to 1.
pub type Confusion = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct QubitParams {
    pub label: String,
    pub t1: f64,
    pub t2: f64,
    pub thermal_population: f64,
    pub readout_assignment: Option<f64>,
    pub confusion: Confusion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairParams {
    pub a: usize,
    pub b: usize,
    pub zz_hz: f64,
    pub cz_duration: f64,
    pub cz_infidelity: Option<f64>,
    pub chi: ChiMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    pub name: String,
    pub qubits: Vec<QubitParams>,
    pub pairs: Vec<PairParams>,
    pub single_qubit_gate_duration: f64,
    pub readout_duration: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    name: Option<String>,
    single_qubit_gate_duration: f64,
    #[serde(default = "default_readout")]
    readout_duration: f64,
    #[serde(rename = "qubit")]
    qubits: Vec<QubitFile>,
    #[serde(rename = "pair", default)]
    pairs: Vec<PairFile>,
}

fn default_readout() -> f64 {
    600e-9
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitFile {
    label: Option<String>,
    t1: f64,
    t2: f64,
    #[serde(default)]
    thermal_population: f64,
    readout_assignment: Option<f64>,
    readout_confusion: Option<Confusion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    qubits: [usize; 2],
    #[serde(default)]
    zz_hz: f64,
    cz_duration: f64,
    cz_infidelity: Option<f64>,
    chi_file: Option<PathBuf>,
}

/// Confusion matrix for assignment fidelity `F = 1 − (ε0 + ε1)/2`.
///
/// The excited state carries the extra error `1 − e^{−t_ro/T1}` from decay
/// during readout, split evenly against the symmetric part.
pub fn confusion_from_assignment(fidelity: f64, t1: f64, readout_duration: f64) -> Result<Confusion> {
    if !(0.5..=1.0).contains(&fidelity) {
        return Err(Error::param(format!("assignment fidelity {fidelity} outside [0.5, 1]")));
    }
    let err = 1.0 - fidelity;
    let penalty = 1.0 - (-readout_duration / t1).exp();
    let e0 = (err - penalty / 2.0).max(0.0);
    let e1 = (2.0 * err - e0).min(1.0);
    Ok([[1.0 - e0, e1], [e0, 1.0 - e1]])
}

fn check_confusion(m: &Confusion) -> Result<()> {
    for col in 0..2 {
        let s = m[0][col] + m[1][col];
        if (s - 1.0).abs() > 1e-9 || m[0][col] < 0.0 || m[1][col] < 0.0 {
            return Err(Error::param(format!("confusion column {col} is not a probability vector: {m:?}")));
        }
    }
    Ok(())
}

impl DeviceModel {
    /// The shipped seven-qubit parameter set.
    pub fn table_one() -> Self {
        Self::from_toml_str(TABLE_ONE_TOML, None).expect("shipped device file is valid")
    }

    /// Noise-free device of `n` qubits on a line.
    pub fn noiseless(n: usize) -> Self {
        DeviceModel {
            name: "ideal".into(),
            qubits: (0..n)
                .map(|i| QubitParams {
                    label: format!("Q{}", i + 1),
                    t1: f64::INFINITY,
                    t2: f64::INFINITY,
                    thermal_population: 0.0,
                    readout_assignment: Some(1.0),
                    confusion: [[1.0, 0.0], [0.0, 1.0]],
                })
                .collect(),
            pairs: (0..n.saturating_sub(1))
                .map(|i| PairParams {
                    a: i,
                    b: i + 1,
                    zz_hz: 0.0,
                    cz_duration: 111e-9,
                    cz_infidelity: Some(0.0),
                    chi: ChiMatrix::ideal_cz(),
                })
                .collect(),
            single_qubit_gate_duration: 50e-9,
            readout_duration: 600e-9,
        }
    }

    /// Parses a device document; relative `chi_file` paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let f: DeviceFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if !(f.single_qubit_gate_duration > 0.0) {
            return Err(Error::Config("single_qubit_gate_duration must be positive".into()));
        }
        let mut qubits = Vec::with_capacity(f.qubits.len());
        for (i, q) in f.qubits.into_iter().enumerate() {
            if !(q.t1 > 0.0) || !(q.t2 > 0.0) {
                return Err(Error::Config(format!("qubit {}: T1 and T2 must be positive", i + 1)));
            }
            if q.t2 > 2.0 * q.t1 {
                return Err(Error::Config(format!("qubit {}: T2 exceeds 2·T1", i + 1)));
            }
            let confusion = match (q.readout_confusion, q.readout_assignment) {
                (Some(m), _) => m,
                (None, Some(fid)) => confusion_from_assignment(fid, q.t1, f.readout_duration)?,
                (None, None) => [[1.0, 0.0], [0.0, 1.0]],
            };
            check_confusion(&confusion).map_err(|e| Error::Config(format!("qubit {}: {e}", i + 1)))?;
            qubits.push(QubitParams {
                label: q.label.unwrap_or_else(|| format!("Q{}", i + 1)),
                t1: q.t1,
                t2: q.t2,
                thermal_population: q.thermal_population,
                readout_assignment: q.readout_assignment,
                confusion,
            });
        }
        let n = qubits.len();
        let mut pairs = Vec::with_capacity(f.pairs.len());
        for p in f.pairs {
            let [a, b] = p.qubits;
            if a == 0 || b == 0 || a > n || b > n || a == b {
                return Err(Error::Config(format!("pair {:?} is not two distinct qubits in 1..={n}", p.qubits)));
            }
            let chi = match (&p.chi_file, p.cz_infidelity) {
                (Some(path), _) => {
                    let full = match base {
                        Some(dir) if path.is_relative() => dir.join(path),
                        _ => path.clone(),
                    };
                    ChiMatrix::load(&full)?
                }
                (None, Some(x)) => synth_chi(x)?,
                (None, None) => ChiMatrix::ideal_cz(),
            };
            pairs.push(PairParams {
                a: a - 1,
                b: b - 1,
                zz_hz: p.zz_hz,
                cz_duration: p.cz_duration,
                cz_infidelity: p.cz_infidelity,
                chi,
            });
        }
        Ok(DeviceModel {
            name: f.name.unwrap_or_else(|| "device".into()),
            qubits,
            pairs,
            single_qubit_gate_duration: f.single_qubit_gate_duration,
            readout_duration: f.readout_duration,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn pair(&self, a: usize, b: usize) -> Option<&PairParams> {
        self.pairs.iter().find(|p| (p.a, p.b) == (a, b) || (p.a, p.b) == (b, a))
    }

    /// Same device with every residual ZZ set to `hz`.
    pub fn with_zz(mut self, hz: f64) -> Self {
        for p in &mut self.pairs {
            p.zz_hz = hz;
        }
        self
    }

    /// Same device with decoherence, ZZ, thermal population and readout error removed.
    pub fn without_noise(&self) -> Self {
        let mut d = self.clone();
        for q in &mut d.qubits {
            q.t1 = f64::INFINITY;
            q.t2 = f64::INFINITY;
            q.thermal_population = 0.0;
            q.confusion = [[1.0, 0.0], [0.0, 1.0]];
        }
        for p in &mut d.pairs {
            p.zz_hz = 0.0;
            p.chi = ChiMatrix::ideal_cz();
        }
        d
    }

    pub fn confusions(&self, qubits: &[usize]) -> Result<Vec<Confusion>> {
        qubits
            .iter()
            .map(|&q| {
                self.qubits.get(q).map(|p| p.confusion).ok_or(Error::OutOfRange { index: q, len: self.n_qubits() })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shipped_device_loads() {
        let d = DeviceModel::table_one();
        assert_eq!(d.n_qubits(), 7);
        assert_eq!(d.pairs.len(), 6);
        assert_abs_diff_eq!(d.qubits[0].t1, 38.1e-6);
        assert_abs_diff_eq!(d.qubits[6].t2, 8.2e-6);
        assert_eq!(d.pair(1, 0).unwrap().cz_infidelity, Some(0.025));
        assert_eq!(d.pair(5, 6).unwrap().cz_infidelity, Some(0.038));
        for q in &d.qubits {
            check_confusion(&q.confusion).unwrap();
            let f = 1.0 - (q.confusion[1][0] + q.confusion[0][1]) / 2.0;
            assert_abs_diff_eq!(f, q.readout_assignment.unwrap(), epsilon = 1e-12);
            assert!(q.confusion[0][1] >= q.confusion[1][0]);
        }
    }

    #[test]
    fn rejects_bad_files() {
        let bad_t2 = "single_qubit_gate_duration = 5e-8\n[[qubit]]\nt1 = 1e-5\nt2 = 3e-5\n";
        assert!(matches!(DeviceModel::from_toml_str(bad_t2, None), Err(Error::Config(_))));
        let bad_pair = "single_qubit_gate_duration = 5e-8\n[[qubit]]\nt1 = 1e-5\nt2 = 1e-5\n[[pair]]\nqubits = [1, 2]\ncz_duration = 1e-7\n";
        assert!(DeviceModel::from_toml_str(bad_pair, None).is_err());
        let unknown = "single_qubit_gate_duration = 5e-8\nfoo = 1\n[[qubit]]\nt1 = 1e-5\nt2 = 1e-5\n";
        assert!(DeviceModel::from_toml_str(unknown, None).is_err());
        let bad_conf = "single_qubit_gate_duration = 5e-8\n[[qubit]]\nt1 = 1e-5\nt2 = 1e-5\nreadout_confusion = [[0.9, 0.0], [0.0, 1.0]]\n";
        assert!(DeviceModel::from_toml_str(bad_conf, None).is_err());
    }

    #[test]
    fn explicit_confusion_and_chi_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cz.txt"), synth_chi(0.02).unwrap().to_text()).unwrap();
        let doc = "single_qubit_gate_duration = 5e-8\n\
            [[qubit]]\nt1 = 1e-5\nt2 = 1e-5\nreadout_confusion = [[0.99, 0.03], [0.01, 0.97]]\n\
            [[qubit]]\nt1 = 1e-5\nt2 = 1e-5\n\
            [[pair]]\nqubits = [1, 2]\ncz_duration = 1e-7\nchi_file = \"cz.txt\"\n";
        let path = dir.path().join("dev.toml");
        std::fs::write(&path, doc).unwrap();
        let d = DeviceModel::load(&path).unwrap();
        assert_eq!(d.qubits[0].confusion, [[0.99, 0.03], [0.01, 0.97]]);
        let f = d.pairs[0].chi.process_fidelity(&ChiMatrix::ideal_cz());
        assert_abs_diff_eq!(f, 0.98, epsilon = 1e-12);
    }
}
