//! Two-qubit processes in the Pauli χ representation.
//!
//! Basis index `α = 4a + b` labels `E_α = σ_a ⊗ σ_b` with `σ = (I, X, Y, Z)`;
//! `σ_a` acts on the first qubit of the pair.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::Letter;

const TOL: f64 = 1e-8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The 16 two-qubit Pauli matrices in basis order.
pub fn pauli_basis() -> Vec<DMatrix<Complex64>> {
    let one = |l: Letter| {
        let m = l.matrix();
        DMatrix::from_fn(2, 2, |r, k| m[r][k])
    };
    let mut out = Vec::with_capacity(16);
    for a in Letter::ALL {
        for b in Letter::ALL {
            out.push(one(a).kronecker(&one(b)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    data: DMatrix<Complex64>,
}

impl ChiMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let chi = ChiMatrix { data };
        chi.validate()?;
        Ok(chi)
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Ideal controlled-Z: `CZ = ½(II + IZ + ZI − ZZ)`.
    pub fn ideal_cz() -> Self {
        let mut v = nalgebra::DVector::<Complex64>::zeros(16);
        v[0] = c(0.5);
        v[3] = c(0.5);
        v[12] = c(0.5);
        v[15] = c(-0.5);
        ChiMatrix { data: &v * v.adjoint() }
    }

    /// Fully depolarizing channel, `ρ → Tr(ρ)·I/4`.
    pub fn depolarizing() -> Self {
        ChiMatrix { data: DMatrix::identity(16, 16) * c(1.0 / 16.0) }
    }

    /// `Tr(χ_ref χ)`, the process fidelity against a pure reference process.
    pub fn process_fidelity(&self, reference: &ChiMatrix) -> f64 {
        (&reference.data * &self.data).trace().re
    }

    /// Checks Hermiticity, positivity and trace preservation.
    pub fn validate(&self) -> Result<()> {
        let m = &self.data;
        if m.nrows() != 16 || m.ncols() != 16 {
            return Err(Error::NotCptp(format!("χ must be 16×16, got {}×{}", m.nrows(), m.ncols())));
        }
        let herm = (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if herm > TOL {
            return Err(Error::NotCptp(format!("χ is not Hermitian (deviation {herm:e})")));
        }
        let eig = SymmetricEigen::new((m + m.adjoint()) * c(0.5));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -TOL {
            return Err(Error::NotCptp(format!("χ has negative eigenvalue {min:e}")));
        }
        let basis = pauli_basis();
        let mut s = DMatrix::<Complex64>::zeros(4, 4);
        for a in 0..16 {
            for b in 0..16 {
                if m[(a, b)] != c(0.0) {
                    s += basis[b].adjoint() * &basis[a] * m[(a, b)];
                }
            }
        }
        let tp = (s - DMatrix::identity(4, 4)).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if tp > TOL {
            return Err(Error::NotCptp(format!("χ is not trace preserving (deviation {tp:e})")));
        }
        Ok(())
    }

    /// Kraus operators from the eigendecomposition `χ = Σ λ_k v_k v_k†`.
    pub fn kraus(&self) -> Vec<DMatrix<Complex64>> {
        let basis = pauli_basis();
        let eig = SymmetricEigen::new((&self.data + self.data.adjoint()) * c(0.5));
        let mut out = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let mut op = DMatrix::<Complex64>::zeros(4, 4);
            for (a, e) in basis.iter().enumerate() {
                op += e * (v[a] * lam.sqrt());
            }
            out.push(op);
        }
        out
    }

    /// Reads 16 rows of 16 complex entries; each entry is `re` or `re,im`
    /// (also `re+imj`). Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| parse_complex(t).ok_or_else(|| Error::Parse { line: ln + 1, msg: format!("bad entry {t:?}") }))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != 16 {
                return Err(Error::Parse { line: ln + 1, msg: format!("expected 16 entries, got {}", row.len()) });
            }
            rows.push(row);
        }
        if rows.len() != 16 {
            return Err(Error::Parse { line: 0, msg: format!("expected 16 rows, got {}", rows.len()) });
        }
        ChiMatrix::new(DMatrix::from_fn(16, 16, |r, k| rows[r][k]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# chi matrix, basis II IX IY IZ XI XX XY XZ YI YX YY YZ ZI ZX ZY ZZ, row-major, entries re,im\n");
        for r in 0..16 {
            let row: Vec<String> = (0..16).map(|k| format!("{},{}", self.data[(r, k)].re, self.data[(r, k)].im)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

fn parse_complex(t: &str) -> Option<Complex64> {
    if let Some((a, b)) = t.split_once(',') {
        return Some(Complex64::new(a.parse().ok()?, b.parse().ok()?));
    }
    if let Some(body) = t.strip_suffix('j') {
        // split at the last sign that is not an exponent sign
        let bytes = body.as_bytes();
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                return Some(Complex64::new(body[..i].parse().ok()?, body[i..].parse().ok()?));
            }
        }
        return Some(Complex64::new(0.0, body.parse().ok()?));
    }
    Some(Complex64::new(t.parse().ok()?, 0.0))
}

/// Depolarized controlled-Z with `Tr(χ_cz χ) = 1 − target`.
///
/// The mixture `(1−λ)χ_cz + λ·I/16` has fidelity `1 − 15λ/16`.
pub fn synth_chi(target_infidelity: f64) -> Result<ChiMatrix> {
    let lambda = 16.0 * target_infidelity / 15.0;
    if !(0.0..=0.15).contains(&target_infidelity) {
        return Err(Error::param(format!("target infidelity {target_infidelity} outside [0, 0.15]")));
    }
    let data = ChiMatrix::ideal_cz().data * c(1.0 - lambda) + ChiMatrix::depolarizing().data * c(lambda);
    ChiMatrix::new(data)
}

/// Applies the process to qubits `(a, b)`, `a` taking the first tensor slot.
pub fn apply_chi_process(rho: &mut DensityMatrix, pair: (usize, usize), chi: &ChiMatrix) -> Result<()> {
    rho.apply_kraus(&chi.kraus(), &[pair.0, pair.1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::channels::completeness_error;
    use crate::simulator::StateVector;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct_sum(rho: &DMatrix<Complex64>, chi: &ChiMatrix) -> DMatrix<Complex64> {
        let basis = pauli_basis();
        let mut out = DMatrix::zeros(4, 4);
        for a in 0..16 {
            for b in 0..16 {
                out += &basis[a] * rho * basis[b].adjoint() * chi.as_matrix()[(a, b)];
            }
        }
        out
    }

    #[test]
    fn ideal_cz_acts_as_cz() {
        let chi = ChiMatrix::ideal_cz();
        chi.validate().unwrap();
        let mut rho = DensityMatrix::from_pure(&StateVector::basis(2, 3).unwrap()).unwrap();
        apply_chi_process(&mut rho, (0, 1), &chi).unwrap();
        assert_abs_diff_eq!(rho.get(3, 3).re, 1.0, epsilon = 1e-12);
        let mut s = StateVector::plus(2).unwrap();
        let mut rho = DensityMatrix::from_pure(&s).unwrap();
        apply_chi_process(&mut rho, (0, 1), &chi).unwrap();
        s.apply_cz(0, 1).unwrap();
        assert!(rho.trace_distance(&DensityMatrix::from_pure(&s).unwrap()).unwrap() < 1e-12);
        assert_abs_diff_eq!(chi.process_fidelity(&ChiMatrix::ideal_cz()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn depolarizing_gives_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rho = DensityMatrix::from_pure(&StateVector::haar_random(2, &mut rng).unwrap()).unwrap();
        apply_chi_process(&mut rho, (1, 0), &ChiMatrix::depolarizing()).unwrap();
        let want = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(rho.trace_distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn synth_round_trip() {
        assert_eq!(synth_chi(0.0).unwrap(), ChiMatrix::ideal_cz());
        for x in [0.005, 0.016, 0.02, 0.025, 0.04] {
            let chi = synth_chi(x).unwrap();
            assert_abs_diff_eq!(chi.process_fidelity(&ChiMatrix::ideal_cz()), 1.0 - x, epsilon = 1e-12);
        }
        assert!(synth_chi(0.2).is_err());
        assert!(synth_chi(-0.01).is_err());
    }

    #[test]
    fn kraus_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chi = synth_chi(0.038).unwrap();
        assert!(completeness_error(&chi.kraus()) < 1e-10);
        let rho = DensityMatrix::random_mixed(2, 2, &mut rng).unwrap();
        let mut via_kraus = rho.clone();
        apply_chi_process(&mut via_kraus, (0, 1), &chi).unwrap();
        // pair (0,1) puts qubit 0 first, i.e. as the most significant kron slot
        let perm = |i: usize| ((i & 1) << 1) | (i >> 1);
        let m = rho.to_matrix();
        let swapped = DMatrix::from_fn(4, 4, |r, k| m[(perm(r), perm(k))]);
        let direct = direct_sum(&swapped, &chi);
        let back = DMatrix::from_fn(4, 4, |r, k| direct[(perm(r), perm(k))]);
        assert!((via_kraus.to_matrix() - back).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_cptp() {
        let mut m = ChiMatrix::ideal_cz().as_matrix().clone();
        m[(0, 0)] += c(0.1);
        assert!(matches!(ChiMatrix::new(m), Err(Error::NotCptp(_))));
        let mut neg = DMatrix::<Complex64>::zeros(16, 16);
        neg[(0, 0)] = c(1.5);
        neg[(1, 1)] = c(-0.5);
        assert!(ChiMatrix::new(neg).is_err());
    }

    #[test]
    fn text_round_trip() {
        let chi = synth_chi(0.013).unwrap();
        let back = ChiMatrix::parse(&chi.to_text()).unwrap();
        assert!((back.as_matrix() - chi.as_matrix()).norm() < 1e-15);
        assert_eq!(parse_complex("1.5-2e-3j"), Some(Complex64::new(1.5, -2e-3)));
        assert_eq!(parse_complex("0.25"), Some(c(0.25)));
        assert!(ChiMatrix::parse("1 2 3").is_err());
    }
}
