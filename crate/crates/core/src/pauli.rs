//! Pauli strings and weighted sums of Pauli strings.
//!
//! A [`PauliString`] stores one bit of X-part and one bit of Z-part per site
//! (packed into `u64` words) plus a phase exponent `k` for the prefactor `i^k`.
//! The letter on a site is read off the bit pair: `(1,0) = X`, `(0,1) = Z`,
//! `(1,1) = Y`. The operator is `i^k ⊗_j σ_j` with `Y` meaning the Hermitian
//! Pauli matrix, not `XZ`.
//!
//! Sites are 0-based internally. The textual notation (`"Z1 X2 X4 X6 Z7"`)
//! uses 1-based site labels, so site label `j` maps to internal index `j - 1`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest site count for which dense matrices are built.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

const WORD: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Letter::I => [[l, o], [o, l]],
            Letter::X => [[o, l], [l, o]],
            Letter::Y => [[o, -i], [i, o]],
            Letter::Z => [[l, o], [o, -l]],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// `i^k` for `k` taken mod 4.
pub fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

fn words(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(p, q)| (p & q).count_ones()).sum()
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    pub fn single(n: usize, site: usize, letter: Letter) -> Result<Self> {
        let mut p = Self::identity(n);
        p.set(site, letter)?;
        Ok(p)
    }

    /// Builds a string from `(site, letter)` pairs on 0-based sites.
    pub fn from_sites(n: usize, sites: &[(usize, Letter)]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &(s, l) in sites {
            p.set(s, l)?;
        }
        Ok(p)
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (s, &l) in letters.iter().enumerate() {
            p.set(s, l).expect("site within length");
        }
        p
    }

    /// Parses the 1-based textual form, e.g. `"Z1 X2 X4 X6 Z7"` or `"-i X1 Y3"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let err = |msg: String| Error::Parse { line: 1, msg };
        let mut p = Self::identity(n);
        let mut rest = text.trim();
        let mut phase = 0u8;
        if let Some(r) = rest.strip_prefix('-') {
            phase = 2;
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r.trim_start();
        }
        if let Some(r) = rest.strip_prefix('i') {
            phase = (phase + 1) & 3;
            rest = r.trim_start();
        }
        for tok in rest.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') => Letter::X,
                Some('Y') => Letter::Y,
                Some('Z') => Letter::Z,
                Some('I') => Letter::I,
                _ => return Err(err(format!("bad token {tok:?}"))),
            };
            let label: usize = chars
                .as_str()
                .parse()
                .map_err(|_| err(format!("bad site label in {tok:?}")))?;
            if label == 0 || label > n {
                return Err(err(format!("site label {label} outside 1..={n}")));
            }
            if p.letter(label - 1) != Letter::I {
                return Err(err(format!("site {label} given twice")));
            }
            p.set(label - 1, letter)?;
        }
        p.phase = phase;
        Ok(p)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the prefactor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_factor(&self) -> Complex64 {
        i_pow(self.phase)
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k & 3;
        self
    }

    pub fn negated(mut self) -> Self {
        self.phase = (self.phase + 2) & 3;
        self
    }

    pub fn letter(&self, site: usize) -> Letter {
        if site >= self.n {
            return Letter::I;
        }
        let (w, b) = (site / WORD, site % WORD);
        Letter::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn set(&mut self, site: usize, letter: Letter) -> Result<()> {
        if site >= self.n {
            return Err(Error::OutOfRange { index: site, len: self.n });
        }
        let (w, b) = (site / WORD, site % WORD);
        let (xb, zb) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
        Ok(())
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|s| self.letter(s)).collect()
    }

    /// Non-identity sites, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&s| self.letter(s) != Letter::I).collect()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// True when the operator is Hermitian, i.e. the prefactor is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Same letters, phase reset to `+1`.
    pub fn unsigned(&self) -> Self {
        self.clone().with_phase(0)
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// X and Z masks for strings that fit in one word (state-vector indexing).
    pub fn masks(&self) -> (u64, u64) {
        (self.x[0], self.z[0])
    }

    /// Group product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, got: other.n });
        }
        let x: Vec<u64> = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z: Vec<u64> = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        // letters → X^x Z^z form, multiply, and convert back
        let k = self.phase as u32
            + other.phase as u32
            + popcount_and(&self.x, &self.z)
            + popcount_and(&other.x, &other.z)
            + 2 * popcount_and(&self.z, &other.x)
            + 3 * popcount_and(&x, &z);
        Ok(PauliString { n: self.n, x, z, phase: (k & 3) as u8 })
    }

    /// Symplectic commutation test.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        (popcount_and(&self.x, &other.z) + popcount_and(&self.z, &other.x)) % 2 == 0
    }

    /// Conjugation `CZ · self · CZ` for a controlled-Z on sites `a`, `b`.
    pub fn conjugate_by_cz(&self, a: usize, b: usize) -> Result<PauliString> {
        for s in [a, b] {
            if s >= self.n {
                return Err(Error::OutOfRange { index: s, len: self.n });
            }
        }
        if a == b {
            return Err(Error::param("controlled-Z needs two distinct sites"));
        }
        let la = self.letter(a);
        let lb = self.letter(b);
        let mut rest = self.clone();
        rest.set(a, Letter::I)?;
        rest.set(b, Letter::I)?;
        let n = self.n;
        let mut on_a = PauliString::single(n, a, la)?;
        if la.bits().0 {
            on_a = on_a.multiply(&PauliString::single(n, b, Letter::Z)?)?;
        }
        let mut on_b = PauliString::single(n, b, lb)?;
        if lb.bits().0 {
            on_b = PauliString::single(n, a, Letter::Z)?.multiply(&on_b)?;
        }
        rest.multiply(&on_a)?.multiply(&on_b)
    }

    /// `self` applied to a state vector (little-endian qubit order).
    pub fn apply(&self, amps: &[Complex64], out: &mut [Complex64]) {
        let (xm, zm) = self.masks();
        let base = i_pow(self.phase + (xm & zm).count_ones() as u8);
        for (b, &a) in amps.iter().enumerate() {
            let sign = if (zm & b as u64).count_ones() % 2 == 1 { -base } else { base };
            out[b ^ xm as usize] = sign * a;
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        PauliSum::from_string(1.0, self.clone()).to_matrix()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i ",
            2 => "-",
            _ => "-i ",
        };
        let body: Vec<String> = self
            .support()
            .into_iter()
            .map(|s| format!("{}{}", self.letter(s).symbol(), s + 1))
            .collect();
        if body.is_empty() {
            write!(f, "{prefix}I")
        } else {
            write!(f, "{prefix}{}", body.join(" "))
        }
    }
}

fn fold_sign(c: f64, p: PauliString) -> (f64, PauliString) {
    let k = p.phase();
    if k >= 2 {
        (-c, p.with_phase(k - 2))
    } else {
        (c, p)
    }
}

/// Real-weighted sum of Pauli strings on a common number of sites.
///
/// Terms are kept canonical: a `±1` prefactor is folded into the coefficient,
/// duplicate strings are merged in first-seen order and exact zeros dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum { n, terms: Vec::new() }
    }

    pub fn from_string(coefficient: f64, p: PauliString) -> Self {
        let mut s = PauliSum::new(p.n_sites());
        s.push(coefficient, p).expect("same size");
        s
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut s = PauliSum::new(n);
        for (c, p) in terms {
            s.push(c, p)?;
        }
        Ok(s)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coefficient: f64, p: PauliString) -> Result<()> {
        if p.n_sites() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: p.n_sites() });
        }
        let (c, p) = fold_sign(coefficient, p);
        match self.terms.iter_mut().find(|(_, q)| *q == p) {
            Some(t) => t.0 += c,
            None => self.terms.push((c, p)),
        }
        self.terms.retain(|(c, _)| *c != 0.0);
        Ok(())
    }

    /// Merges duplicates in bulk; faster than repeated `push` for long sums.
    pub fn canonicalize(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut out: Vec<(f64, PauliString)> = Vec::new();
        for (c, p) in terms {
            if p.n_sites() != n {
                return Err(Error::SizeMismatch { expected: n, got: p.n_sites() });
            }
            let (c, p) = fold_sign(c, p);
            match index.get(&p) {
                Some(&i) => out[i].0 += c,
                None => {
                    index.insert(p.clone(), out.len());
                    out.push((c, p));
                }
            }
        }
        out.retain(|(c, _)| *c != 0.0);
        Ok(PauliSum { n, terms: out })
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_hermitian())
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        let terms = self.terms.iter().map(|(c, p)| (c * factor, p.clone())).collect();
        PauliSum::canonicalize(self.n, terms).expect("same size")
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        let terms = self.terms.iter().chain(other.terms.iter()).cloned().collect();
        PauliSum::canonicalize(self.n, terms)
    }

    pub fn multiply(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                terms.push((a * b, p.multiply(q)?));
            }
        }
        PauliSum::canonicalize(self.n, terms)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn to_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n > limit {
            return Err(Error::DenseLimit { what: "dense Pauli matrix", n: self.n, limit });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (c, p) in &self.terms {
            let (xm, zm) = p.masks();
            let base = i_pow(p.phase() + (xm & zm).count_ones() as u8) * *c;
            for col in 0..dim {
                let sign = if (zm & col as u64).count_ones() % 2 == 1 { -base } else { base };
                m[(col ^ xm as usize, col)] += sign;
            }
        }
        Ok(m)
    }

    /// Real dense matrix; only valid when no term carries an odd number of `Y`.
    pub fn to_real_matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.to_matrix()?;
        if m.iter().any(|v| v.im.abs() > 1e-14) {
            return Err(Error::param("operator has imaginary matrix elements"));
        }
        Ok(m.map(|v| v.re))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, p)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*({p})")?;
        }
        Ok(())
    }
}

/// Anything a Pauli expectation value can be taken on.
pub trait PauliExpectation {
    fn n_qubits(&self) -> usize;

    /// `⟨P⟩` including the prefactor of `P`; complex in general.
    fn expect_string(&self, p: &PauliString) -> Complex64;

    /// Expectation of a Hermitian sum.
    fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        if obs.n_sites() != self.n_qubits() {
            return Err(Error::SizeMismatch { expected: self.n_qubits(), got: obs.n_sites() });
        }
        if !obs.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        Ok(obs.terms().iter().map(|(c, p)| c * self.expect_string(p).re).sum())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses with the site count set by the highest label.
    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .split_whitespace()
            .filter_map(|t| t.trim_start_matches(['X', 'Y', 'Z', 'I']).parse::<usize>().ok())
            .max()
            .unwrap_or(1);
        PauliString::parse(s, n)
    }
}
