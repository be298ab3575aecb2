//! Density matrices stored as doubled state vectors.
//!
//! Entry `ρ[r][c]` lives at index `r·2^n + c`, so row qubit `q` is bit `n+q`
//! and column qubit `q` is bit `q`. A left factor `K` on qubit `q` acts on bit
//! `n+q`; the right factor `K†` acts as `conj(K)` on bit `q`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliExpectation, PauliString};
use crate::simulator::{apply_1q, apply_cz_bits, apply_local, marginal, Mat2, StateVector};

/// Largest register held as a density matrix.
pub const MAX_DENSITY_QUBITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

fn conj2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

impl DensityMatrix {
    fn check_size(n: usize) -> Result<()> {
        if n > MAX_DENSITY_QUBITS {
            return Err(Error::DenseLimit { what: "density matrix", n, limit: MAX_DENSITY_QUBITS });
        }
        Ok(())
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::from_pure(&StateVector::zero(n)?)
    }

    pub fn from_pure(s: &StateVector) -> Result<Self> {
        let n = s.n_qubits();
        Self::check_size(n)?;
        let a = s.amplitudes();
        let dim = a.len();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = a[r] * a[c].conj();
            }
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if !dim.is_power_of_two() || m.ncols() != dim {
            return Err(Error::param("density matrix must be square with power-of-two size"));
        }
        let n = dim.trailing_zeros() as usize;
        Self::check_size(n)?;
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = m[(r, c)];
            }
        }
        Ok(DensityMatrix { n, data })
    }

    /// Convex mixture of `rank` Haar-random pure states with random weights.
    pub fn random_mixed<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<Self> {
        let weights: Vec<f64> = (0..rank.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = DensityMatrix::from_pure(&StateVector::haar_random(n, rng)?)?.scaled(weights[0] / total);
        for w in &weights[1..] {
            let next = DensityMatrix::from_pure(&StateVector::haar_random(n, rng)?)?;
            acc.add_assign_scaled(&next, w / total);
        }
        Ok(acc)
    }

    fn scaled(mut self, f: f64) -> Self {
        for v in &mut self.data {
            *v *= f;
        }
        self
    }

    fn add_assign_scaled(&mut self, other: &DensityMatrix, f: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * f;
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |r, c| self.data[r * dim + c])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trace distance `½‖ρ−σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, got: other.n });
        }
        let d = self.to_matrix() - other.to_matrix();
        let h = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(0.5 * nalgebra::SymmetricEigen::new(h).eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, s: &StateVector) -> Result<f64> {
        if s.n_qubits() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: s.n_qubits() });
        }
        let m = self.to_matrix();
        let v = DVector::from_column_slice(s.amplitudes());
        Ok((v.adjoint() * m * &v)[(0, 0)].re)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::OutOfRange { index: q, len: self.n })
        } else {
            Ok(())
        }
    }

    /// `ρ → U ρ U†` for a single-qubit `U`.
    pub fn apply_unitary_1q(&mut self, u: &Mat2, q: usize) -> Result<()> {
        self.check(q)?;
        apply_1q(&mut self.data, u, self.n + q);
        apply_1q(&mut self.data, &conj2(u), q);
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::param("controlled-Z needs two distinct qubits"));
        }
        apply_cz_bits(&mut self.data, self.n + a, self.n + b);
        apply_cz_bits(&mut self.data, a, b);
        Ok(())
    }

    /// `ρ → Σ_k K_k ρ K_k†` with `K_k` acting on `targets` (first target is
    /// the most significant local bit).
    pub fn apply_kraus(&mut self, ops: &[DMatrix<Complex64>], targets: &[usize]) -> Result<()> {
        for &t in targets {
            self.check(t)?;
        }
        let rows: Vec<usize> = targets.iter().map(|t| t + self.n).collect();
        let mut acc = vec![ZERO; self.data.len()];
        for k in ops {
            if k.nrows() != 1 << targets.len() {
                return Err(Error::SizeMismatch { expected: 1 << targets.len(), got: k.nrows() });
            }
            let mut tmp = self.data.clone();
            apply_local(&mut tmp, k, &rows);
            apply_local(&mut tmp, &k.map(|v| v.conj()), targets);
            for (a, b) in acc.iter_mut().zip(&tmp) {
                *a += b;
            }
        }
        self.data = acc;
        Ok(())
    }

    /// Single-qubit Kraus channel given as 2×2 arrays.
    pub fn apply_kraus_1q(&mut self, ops: &[Mat2], q: usize) -> Result<()> {
        self.check(q)?;
        let mut acc = vec![ZERO; self.data.len()];
        for k in ops {
            let mut tmp = self.data.clone();
            apply_1q(&mut tmp, k, self.n + q);
            apply_1q(&mut tmp, &conj2(k), q);
            for (a, b) in acc.iter_mut().zip(&tmp) {
                *a += b;
            }
        }
        self.data = acc;
        Ok(())
    }

    /// `ρ[r][c] → e^{−i(φ_r − φ_c)} ρ[r][c]` for a diagonal unitary with phases `φ`.
    pub fn apply_diagonal_phases(&mut self, phases: &[f64]) -> Result<()> {
        let dim = self.dim();
        if phases.len() != dim {
            return Err(Error::SizeMismatch { expected: dim, got: phases.len() });
        }
        for r in 0..dim {
            for c in 0..dim {
                let d = phases[r] - phases[c];
                if d != 0.0 {
                    self.data[r * dim + c] *= Complex64::from_polar(1.0, -d);
                }
            }
        }
        Ok(())
    }

    pub fn apply_pauli_string(&mut self, p: &PauliString) -> Result<()> {
        if p.n_sites() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: p.n_sites() });
        }
        for q in p.support() {
            let m = p.letter(q).matrix();
            self.apply_unitary_1q(&m, q)?;
        }
        Ok(())
    }

    /// Computational-basis marginal over `qubits` after rotating each by `rotations[i]`.
    pub fn rotated_probabilities(&self, qubits: &[usize], rotations: &[Mat2]) -> Result<Vec<f64>> {
        let mut r = self.clone();
        for (&q, u) in qubits.iter().zip(rotations) {
            r.apply_unitary_1q(u, q)?;
        }
        Ok(marginal(&r.diagonal().iter().map(|p| p.max(0.0)).collect::<Vec<_>>(), qubits))
    }

    /// X-basis outcome probabilities (`+1 ↦ 0`), bit `i` belonging to `qubits[i]`.
    pub fn x_basis_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let rot = vec![crate::simulator::x_readout_rotation(); qubits.len()];
        self.rotated_probabilities(qubits, &rot)
    }
}

impl PauliExpectation for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn expect_string(&self, p: &PauliString) -> Complex64 {
        let (xm, zm) = p.masks();
        let (xm, zm) = (xm as usize, zm as usize);
        let dim = self.dim();
        let mut acc = ZERO;
        for b in 0..dim {
            // P|b⟩ ∝ (−1)^{z·b}|b⊕x⟩, so Tr(ρP) picks ρ[b][b⊕x] with the sign of b
            let v = self.data[b * dim + (b ^ xm)];
            if (zm & b).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc * i_pow(p.phase() + (xm & zm).count_ones() as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Letter, PauliSum};
    use crate::simulator::{h_matrix, ry_matrix};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_state_expectations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = StateVector::haar_random(4, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&s).unwrap();
        for text in ["X1", "Y2 Z3", "Z1 X2 Y3 X4", "-Y1 Y4", "i X1 Y1"] {
            let p = if text == "i X1 Y1" {
                PauliString::parse("i X1", 4).unwrap().multiply(&PauliString::parse("Y1", 4).unwrap()).unwrap()
            } else {
                PauliString::parse(text, 4).unwrap()
            };
            assert!((rho.expect_string(&p) - s.expect_string(&p)).norm() < 1e-12, "{text}");
        }
    }

    #[test]
    fn trace_formula_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = DensityMatrix::random_mixed(3, 3, &mut rng).unwrap();
        let m = rho.to_matrix();
        for a in 0..64usize {
            let letters: Vec<Letter> = (0..3).map(|i| Letter::ALL[(a >> (2 * i)) & 3]).collect();
            let p = PauliString::from_letters(&letters);
            let dense = (&m * p.to_matrix().unwrap()).trace();
            assert!((dense - rho.expect_string(&p)).norm() < 1e-12);
        }
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn unitary_evolution_matches_pure() {
        let mut s = StateVector::zero(3).unwrap();
        let mut rho = DensityMatrix::zero(3).unwrap();
        s.apply_1q(&h_matrix(), 0);
        rho.apply_unitary_1q(&h_matrix(), 0).unwrap();
        s.apply_ry(2, 0.7).unwrap();
        rho.apply_unitary_1q(&ry_matrix(0.7), 2).unwrap();
        s.apply_cz(0, 2).unwrap();
        rho.apply_cz(0, 2).unwrap();
        let want = DensityMatrix::from_pure(&s).unwrap();
        assert!(rho.trace_distance(&want).unwrap() < 1e-12);
        let obs = PauliSum::from_string(1.0, PauliString::parse("X1 Z3", 3).unwrap());
        assert_abs_diff_eq!(rho.expectation(&obs).unwrap(), s.expectation(&obs).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn two_qubit_kraus_ordering() {
        // CNOT with control as the first target
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let cnot = DMatrix::from_row_slice(4, 4, &[l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o]);
        let mut rho = DensityMatrix::from_pure(&StateVector::basis(3, 0b100).unwrap()).unwrap();
        rho.apply_kraus(&[cnot], &[2, 0]).unwrap();
        assert_abs_diff_eq!(rho.get(0b101, 0b101).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn x_probabilities() {
        let rho = DensityMatrix::from_pure(&StateVector::plus(2).unwrap()).unwrap();
        let p = rho.x_basis_probabilities(&[0, 1]).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
    }
}
