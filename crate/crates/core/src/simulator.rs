//! Pure-state circuit simulation.
//!
//! Amplitudes are indexed little-endian: qubit 0 is the least significant bit
//! of the basis index. Circuit text and bitstring labels use 1-based qubit
//! labels, with qubit label 1 printed first.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliExpectation, PauliString};

/// Largest register for which a state vector is allocated.
pub const MAX_QUBITS: usize = 20;

/// Largest register for which a dense circuit unitary is built.
pub const DENSE_UNITARY_LIMIT: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Mat2 = [[Complex64; 2]; 2];

pub fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]]
}

pub fn h_matrix() -> Mat2 {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[r, r], [r, -r]]
}

/// Rotation applied before a Z-basis readout to measure X with `+1 ↦ 0`.
pub fn x_readout_rotation() -> Mat2 {
    ry_matrix(-std::f64::consts::FRAC_PI_2)
}

/// Applies a `2^k × 2^k` matrix to the listed bit positions of `amps`.
///
/// `targets[0]` is the most significant bit of the local index, matching the
/// Kronecker-product order `M = A ⊗ B` for `targets = [a, b]`.
pub(crate) fn apply_local(amps: &mut [Complex64], mat: &DMatrix<Complex64>, targets: &[usize]) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(mat.nrows(), dim);
    let masks: Vec<usize> = targets.iter().map(|&t| 1usize << t).collect();
    let all: usize = masks.iter().sum();
    let offset = |local: usize| -> usize {
        let mut o = 0;
        for (i, m) in masks.iter().enumerate() {
            if local >> (k - 1 - i) & 1 == 1 {
                o |= m;
            }
        }
        o
    };
    let offsets: Vec<usize> = (0..dim).map(offset).collect();
    let mut buf = vec![ZERO; dim];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for (l, &o) in offsets.iter().enumerate() {
            buf[l] = amps[base | o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += mat[(r, c)] * b;
            }
            amps[base | o] = acc;
        }
    }
}

pub(crate) fn apply_1q(amps: &mut [Complex64], m: &Mat2, q: usize) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a, b) = (amps[i], amps[i | bit]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

pub(crate) fn apply_cz_bits(amps: &mut [Complex64], a: usize, b: usize) {
    let m = (1usize << a) | (1usize << b);
    for (i, v) in amps.iter_mut().enumerate() {
        if i & m == m {
            *v = -*v;
        }
    }
}

/// Basis in which a control qubit is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlBasis {
    /// Fires on `|1⟩`.
    Z,
    /// Fires on `|−⟩`.
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub basis: ControlBasis,
}

impl Control {
    pub fn z(qubit: usize) -> Self {
        Control { qubit, basis: ControlBasis::Z }
    }

    pub fn x(qubit: usize) -> Self {
        Control { qubit, basis: ControlBasis::X }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Ry { qubit: usize, theta: f64 },
    Cz { a: usize, b: usize },
    H(usize),
    Pauli { qubit: usize, letter: Letter },
    /// Pauli `letter` on `target` when every control fires.
    Controlled { controls: Vec<Control>, target: usize, letter: Letter },
    Barrier,
    /// Marks an X-basis readout of the listed qubits; no action on the state.
    MeasureX(Vec<usize>),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Ry { qubit, .. } | Gate::H(qubit) | Gate::Pauli { qubit, .. } => vec![*qubit],
            Gate::Cz { a, b } => vec![*a, *b],
            Gate::Controlled { controls, target, .. } => {
                let mut v: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
                v.push(*target);
                v
            }
            Gate::Barrier => vec![],
            Gate::MeasureX(q) => q.clone(),
        }
    }

    pub fn is_single_qubit_unitary(&self) -> bool {
        matches!(self, Gate::Ry { .. } | Gate::H(_) | Gate::Pauli { .. })
    }

    /// 2×2 matrix of a single-qubit gate.
    pub fn matrix_1q(&self) -> Option<Mat2> {
        match self {
            Gate::Ry { theta, .. } => Some(ry_matrix(*theta)),
            Gate::H(_) => Some(h_matrix()),
            Gate::Pauli { letter, .. } => Some(letter.matrix()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, ops: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn push(&mut self, g: Gate) -> Result<&mut Self> {
        let qs = g.qubits();
        for &q in &qs {
            if q >= self.n {
                return Err(Error::OutOfRange { index: q, len: self.n });
            }
        }
        if !matches!(g, Gate::MeasureX(_)) {
            let mut sorted = qs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != qs.len() {
                return Err(Error::param(format!("gate acts twice on one qubit: {g:?}")));
            }
        }
        self.ops.push(g);
        Ok(self)
    }

    pub fn ry(&mut self, qubit: usize, theta: f64) -> Result<&mut Self> {
        self.push(Gate::Ry { qubit, theta })
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<&mut Self> {
        self.push(Gate::Cz { a, b })
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self> {
        self.push(Gate::H(q))
    }

    pub fn pauli(&mut self, qubit: usize, letter: Letter) -> Result<&mut Self> {
        self.push(Gate::Pauli { qubit, letter })
    }

    pub fn controlled(&mut self, controls: &[Control], target: usize, letter: Letter) -> Result<&mut Self> {
        self.push(Gate::Controlled { controls: controls.to_vec(), target, letter })
    }

    pub fn barrier(&mut self) -> &mut Self {
        self.ops.push(Gate::Barrier);
        self
    }

    pub fn measure_x(&mut self, qubits: &[usize]) -> Result<&mut Self> {
        self.push(Gate::MeasureX(qubits.to_vec()))
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        for g in &other.ops {
            self.push(g.clone())?;
        }
        Ok(self)
    }

    pub fn count(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.ops.iter().filter(|g| pred(g)).count()
    }

    /// Qubits named by the last measurement marker, if any.
    pub fn measured_qubits(&self) -> Option<&[usize]> {
        self.ops.iter().rev().find_map(|g| match g {
            Gate::MeasureX(q) => Some(q.as_slice()),
            _ => None,
        })
    }

    /// Parses the line format written by `Display`.
    ///
    /// ```text
    /// QUBITS 3
    /// RY 1 1.5707963267948966
    /// CZ 1 2
    /// CTRL Z 3 x1 z2     # Z on qubit 3 controlled by X-basis 1 and Z-basis 2
    /// MEASX 1 2 3
    /// ```
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut n: Option<usize> = None;
        let mut ops: Vec<(usize, Gate)> = Vec::new();
        let mut max_label = 0usize;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let label = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| err(format!("bad qubit label {s:?}")))?;
                if v == 0 {
                    return Err(err("qubit labels start at 1".into()));
                }
                Ok(v - 1)
            };
            let want = |k: usize| -> Result<()> {
                if toks.len() != k {
                    Err(err(format!("{} expects {} fields", toks[0], k - 1)))
                } else {
                    Ok(())
                }
            };
            let gate = match toks[0].to_ascii_uppercase().as_str() {
                "QUBITS" => {
                    want(2)?;
                    n = Some(toks[1].parse().map_err(|_| err("bad qubit count".into()))?);
                    continue;
                }
                "RY" => {
                    want(3)?;
                    let theta: f64 = toks[2].parse().map_err(|_| err(format!("bad angle {:?}", toks[2])))?;
                    Gate::Ry { qubit: label(toks[1])?, theta }
                }
                "CZ" => {
                    want(3)?;
                    Gate::Cz { a: label(toks[1])?, b: label(toks[2])? }
                }
                "H" => {
                    want(2)?;
                    Gate::H(label(toks[1])?)
                }
                "X" | "Y" | "Z" => {
                    want(2)?;
                    Gate::Pauli { qubit: label(toks[1])?, letter: parse_letter(toks[0]).unwrap() }
                }
                "CTRL" => {
                    if toks.len() < 4 {
                        return Err(err("CTRL expects a letter, a target and controls".into()));
                    }
                    let letter = parse_letter(toks[1]).ok_or_else(|| err(format!("bad letter {:?}", toks[1])))?;
                    let target = label(toks[2])?;
                    let mut controls = Vec::new();
                    for t in &toks[3..] {
                        let (b, rest) = t.split_at(1);
                        let basis = match b {
                            "x" | "X" => ControlBasis::X,
                            "z" | "Z" => ControlBasis::Z,
                            _ => return Err(err(format!("bad control {t:?}"))),
                        };
                        controls.push(Control { qubit: label(rest)?, basis });
                    }
                    Gate::Controlled { controls, target, letter }
                }
                "BARRIER" => Gate::Barrier,
                "MEASX" => {
                    let qs = toks[1..].iter().map(|t| label(t)).collect::<Result<Vec<_>>>()?;
                    Gate::MeasureX(qs)
                }
                other => return Err(err(format!("unknown op {other:?}"))),
            };
            for q in gate.qubits() {
                max_label = max_label.max(q + 1);
            }
            ops.push((line_no, gate));
        }
        let n = n.unwrap_or(max_label);
        let mut c = Circuit::new(n);
        for (line, g) in ops {
            c.push(g).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        }
        Ok(c)
    }
}

fn parse_letter(s: &str) -> Option<Letter> {
    match s {
        "X" => Some(Letter::X),
        "Y" => Some(Letter::Y),
        "Z" => Some(Letter::Z),
        _ => None,
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n)?;
        for g in &self.ops {
            match g {
                Gate::Ry { qubit, theta } => writeln!(f, "RY {} {}", qubit + 1, theta)?,
                Gate::Cz { a, b } => writeln!(f, "CZ {} {}", a + 1, b + 1)?,
                Gate::H(q) => writeln!(f, "H {}", q + 1)?,
                Gate::Pauli { qubit, letter } => writeln!(f, "{} {}", letter.symbol(), qubit + 1)?,
                Gate::Controlled { controls, target, letter } => {
                    write!(f, "CTRL {} {}", letter.symbol(), target + 1)?;
                    for c in controls {
                        let b = if c.basis == ControlBasis::X { 'x' } else { 'z' };
                        write!(f, " {b}{}", c.qubit + 1)?;
                    }
                    writeln!(f)?;
                }
                Gate::Barrier => writeln!(f, "BARRIER")?,
                Gate::MeasureX(qs) => {
                    write!(f, "MEASX")?;
                    for q in qs {
                        write!(f, " {}", q + 1)?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::DenseLimit { what: "state vector", n, limit: MAX_QUBITS });
        }
        if index >> n != 0 {
            return Err(Error::OutOfRange { index, len: 1 << n });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus(n: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        for q in 0..n {
            s.apply_1q(&h_matrix(), q);
        }
        Ok(s)
    }

    /// Wraps amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::param(format!("amplitude count {len} is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::param("state has zero or non-finite norm"));
        }
        Ok(StateVector { n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    /// Haar-random pure state from normalized complex Gaussians.
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let amps = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, got: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::OutOfRange { index: q, len: self.n })
        } else {
            Ok(())
        }
    }

    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        apply_1q(&mut self.amps, m, q);
    }

    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check(q)?;
        self.apply_1q(&ry_matrix(theta), q);
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::param("controlled-Z needs two distinct qubits"));
        }
        apply_cz_bits(&mut self.amps, a, b);
        Ok(())
    }

    pub fn apply_pauli_string(&mut self, p: &PauliString) -> Result<()> {
        if p.n_sites() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: p.n_sites() });
        }
        let mut out = vec![ZERO; self.amps.len()];
        p.apply(&self.amps, &mut out);
        self.amps = out;
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        for q in g.qubits() {
            self.check(q)?;
        }
        match g {
            Gate::Cz { a, b } => apply_cz_bits(&mut self.amps, *a, *b),
            Gate::Controlled { controls, target, letter } => apply_controlled(&mut self.amps, controls, *target, *letter),
            Gate::Barrier | Gate::MeasureX(_) => {}
            single => {
                let m = single.matrix_1q().expect("single-qubit gate");
                self.apply_1q(&m, single.qubits()[0]);
            }
        }
        Ok(())
    }

    /// Applies a `2^k × 2^k` matrix with `targets[0]` as the most significant local bit.
    pub fn apply_matrix(&mut self, m: &DMatrix<Complex64>, targets: &[usize]) -> Result<()> {
        for &t in targets {
            self.check(t)?;
        }
        if m.nrows() != 1 << targets.len() || m.ncols() != m.nrows() {
            return Err(Error::SizeMismatch { expected: 1 << targets.len(), got: m.nrows() });
        }
        apply_local(&mut self.amps, m, targets);
        Ok(())
    }

    /// Probability that every listed qubit reads `+` in the X basis is the
    /// zero entry; see [`sample_x_basis`].
    pub fn x_basis_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check(q)?;
        }
        let mut rotated = self.amps.clone();
        let r = x_readout_rotation();
        for &q in qubits {
            apply_1q(&mut rotated, &r, q);
        }
        let probs: Vec<f64> = rotated.iter().map(|a| a.norm_sqr()).collect();
        Ok(marginal(&probs, qubits))
    }
}

pub(crate) fn apply_controlled(amps: &mut [Complex64], controls: &[Control], target: usize, letter: Letter) {
    let h = h_matrix();
    for c in controls.iter().filter(|c| c.basis == ControlBasis::X) {
        apply_1q(amps, &h, c.qubit);
    }
    let cmask: usize = controls.iter().map(|c| 1usize << c.qubit).sum();
    let m = letter.matrix();
    let bit = 1usize << target;
    for i in 0..amps.len() {
        if i & cmask == cmask && i & bit == 0 {
            let (a, b) = (amps[i], amps[i | bit]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
    for c in controls.iter().filter(|c| c.basis == ControlBasis::X) {
        apply_1q(amps, &h, c.qubit);
    }
}

/// Marginal distribution over `qubits`; bit `i` of the result index is `qubits[i]`.
pub(crate) fn marginal(probs: &[f64], qubits: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << qubits.len()];
    for (b, &p) in probs.iter().enumerate() {
        let mut local = 0usize;
        for (i, &q) in qubits.iter().enumerate() {
            local |= (b >> q & 1) << i;
        }
        out[local] += p;
    }
    out
}

impl PauliExpectation for StateVector {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn expect_string(&self, p: &PauliString) -> Complex64 {
        let (xm, zm) = p.masks();
        let (xm, zm) = (xm as usize, zm as usize);
        let mut acc = ZERO;
        for (b, a) in self.amps.iter().enumerate() {
            // ⟨b⊕x| P |b⟩ contribution
            let t = self.amps[b ^ xm].conj() * a;
            if (zm & b).count_ones() % 2 == 1 {
                acc -= t;
            } else {
                acc += t;
            }
        }
        acc * crate::pauli::i_pow(p.phase() + (xm & zm).count_ones() as u8)
    }
}

/// Runs `c` on a copy of `init`.
pub fn run_circuit(c: &Circuit, init: &StateVector) -> Result<StateVector> {
    if c.n_qubits() != init.n_qubits() {
        return Err(Error::SizeMismatch { expected: c.n_qubits(), got: init.n_qubits() });
    }
    let mut s = init.clone();
    for g in c.ops() {
        s.apply_gate(g)?;
    }
    Ok(s)
}

/// Dense unitary of a circuit, column `j` being the image of basis state `j`.
pub fn circuit_unitary(c: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = c.n_qubits();
    if n > DENSE_UNITARY_LIMIT {
        return Err(Error::DenseLimit { what: "circuit unitary", n, limit: DENSE_UNITARY_LIMIT });
    }
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let s = run_circuit(c, &StateVector::basis(n, j)?)?;
        u.set_column(j, &nalgebra::DVector::from_column_slice(s.amplitudes()));
    }
    Ok(u)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Outcome statistics over a declared qubit subset.
///
/// Bit `i` of an outcome index belongs to `qubits[i]`. With `shots == 0` the
/// probabilities are exact and `counts` is `None`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BitstringDistribution {
    pub qubits: Vec<usize>,
    pub shots: u64,
    pub seed: u64,
    pub probabilities: Vec<f64>,
    pub counts: Option<Vec<u64>>,
}

impl BitstringDistribution {
    pub fn exact(qubits: &[usize], probabilities: Vec<f64>) -> Self {
        BitstringDistribution { qubits: qubits.to_vec(), shots: 0, seed: 0, probabilities, counts: None }
    }

    /// Draws `shots` samples from `probabilities`; `shots == 0` keeps them exact.
    pub fn sample(qubits: &[usize], probabilities: Vec<f64>, shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Ok(Self::exact(qubits, probabilities));
        }
        let clean: Vec<f64> = probabilities.iter().map(|p| p.max(0.0)).collect();
        let dist = WeightedIndex::new(&clean).map_err(|e| Error::param(format!("bad distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; clean.len()];
        for _ in 0..shots {
            counts[dist.sample(&mut rng)] += 1;
        }
        let probabilities = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        Ok(BitstringDistribution { qubits: qubits.to_vec(), shots, seed, probabilities, counts: Some(counts) })
    }

    /// Outcome label with the first listed qubit first, e.g. `"10000"`.
    pub fn label(&self, index: usize) -> String {
        (0..self.qubits.len()).map(|i| if index >> i & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn probability_of(&self, label: &str) -> Option<f64> {
        if label.len() != self.qubits.len() {
            return None;
        }
        let mut idx = 0usize;
        for (i, ch) in label.chars().enumerate() {
            match ch {
                '1' => idx |= 1 << i,
                '0' => {}
                _ => return None,
            }
        }
        self.probabilities.get(idx).copied()
    }
}

/// X-basis readout of `qubits`: eigenvalue `+1` reads as bit 0.
pub fn sample_x_basis(s: &StateVector, qubits: &[usize], shots: u64, seed: u64) -> Result<BitstringDistribution> {
    let probs = s.x_basis_probabilities(qubits)?;
    BitstringDistribution::sample(qubits, probs, shots, seed)
}
