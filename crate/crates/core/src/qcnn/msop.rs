//! Symbolic expansion of the multi-scale string order parameter.
//!
//! At pooling level `f` the stabilizer generators are
//! `C^(f)_j = Z_{j−3^f} X_j Z_{j+3^f}`. They commute and square to one, so a
//! product of generators is a bitmask over sites and an operator polynomial
//! is a map from masks to coefficients. One pooling step rewrites a run
//! `C^(f)_j C^(f)_{j+2·3^f} … C^(f)_k` as `L^(f−1)_j (C^(f−1)_j … C^(f−1)_k) R^(f−1)_k`.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::qcnn_size;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};

/// Default memory budget for the symbolic expansion.
pub const DEFAULT_MEMORY_CAP_BYTES: usize = 2 << 30;
/// Rough footprint of one stored monomial, hash table overhead included.
pub const BYTES_PER_TERM: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MsopPart {
    /// `½(𝒮^I − 𝒮^II)`.
    Full,
    /// `𝒮^I` alone.
    First,
    /// `𝒮^II` alone.
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionLimits {
    /// Largest number of distinct monomials held at once.
    pub max_terms: usize,
    /// Keep going past the cap by dropping new monomials instead of failing.
    pub allow_truncate: bool,
}

impl Default for ExpansionLimits {
    fn default() -> Self {
        ExpansionLimits { max_terms: DEFAULT_MEMORY_CAP_BYTES / BYTES_PER_TERM, allow_truncate: false }
    }
}

/// One weighted product of string order parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MsopTerm {
    pub coefficient: f64,
    /// `(j, k)` pairs of the factors `𝒮_jk`, in ascending order.
    pub factors: Vec<(usize, usize)>,
    /// Product of the factors, sign included.
    pub pauli: PauliString,
}

impl MsopTerm {
    /// `"S02*S46"`; indices above 9 are separated by a comma, `"S10,14"`.
    pub fn factor_label(&self) -> String {
        self.factors
            .iter()
            .map(|&(j, k)| if j < 10 && k < 10 { format!("S{j}{k}") } else { format!("S{j},{k}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MsopExpansion {
    pub d: usize,
    pub n: usize,
    pub part: MsopPart,
    pub terms: Vec<MsopTerm>,
    /// Products generated before duplicates were merged.
    pub raw_products: u128,
    pub truncated: bool,
}

type Poly = HashMap<u64, f64>;

fn pow3(f: usize) -> usize {
    3usize.pow(f as u32)
}

struct Expander {
    n: usize,
    limits: ExpansionLimits,
    raw: u128,
    truncated: bool,
}

impl Expander {
    fn bit(&self, j: isize) -> Result<u64> {
        if j < 1 || j as usize > self.n {
            return Err(Error::Unsupported(format!("generator index {j} outside 1..={}", self.n)));
        }
        Ok(1u64 << j)
    }

    /// `L^(f)_j` (`left`) or `R^(f)_j` as a polynomial in level-`f` generators.
    fn edge(&self, f: usize, j: usize, left: bool) -> Result<Vec<(u64, f64)>> {
        let n = self.n;
        if f == 0 && ((left && (j == 1 || j == 4)) || (!left && (j + 3 == n || j == n))) {
            return Ok(vec![(0, 1.0)]);
        }
        let s = pow3(f) as isize;
        let j = j as isize;
        Ok(if left {
            let (a, b) = (self.bit(j - 4 * s)?, self.bit(j - 2 * s)?);
            vec![(a | b, 0.5), (a, -0.5), (b, 0.5), (0, 0.5)]
        } else {
            let (a, b) = (self.bit(j + 2 * s)?, self.bit(j + 4 * s)?);
            vec![(0, 0.5), (a, 0.5), (b, -0.5), (a | b, 0.5)]
        })
    }

    fn insert(&mut self, poly: &mut Poly, mask: u64, c: f64) -> Result<()> {
        if let Some(v) = poly.get_mut(&mask) {
            *v += c;
            return Ok(());
        }
        if poly.len() >= self.limits.max_terms {
            if self.limits.allow_truncate {
                self.truncated = true;
                return Ok(());
            }
            return Err(Error::TermCapExceeded { cap: self.limits.max_terms, count: poly.len() + 1 });
        }
        poly.insert(mask, c);
        Ok(())
    }

    /// Conjugates a level-`f` monomial by the level-`f` convolution and pooling.
    fn conjugate(&mut self, f: usize, mask: u64) -> Result<Vec<(u64, f64)>> {
        let stride = 2 * pow3(f);
        let inner = 2 * pow3(f - 1);
        let mut out: Vec<(u64, f64)> = vec![(0, 1.0)];
        let mut j = 1;
        while j <= self.n {
            let starts_run = mask >> j & 1 == 1 && (j < stride + 1 || mask >> (j - stride) & 1 == 0);
            if starts_run {
                let mut k = j;
                while k + stride <= self.n && mask >> (k + stride) & 1 == 1 {
                    k += stride;
                }
                let mut core = 0u64;
                let mut i = j;
                while i <= k {
                    core |= self.bit(i as isize)?;
                    i += inner;
                }
                let l = self.edge(f - 1, j, true)?;
                let r = self.edge(f - 1, k, false)?;
                let mut factor = Poly::new();
                for &(lm, lc) in &l {
                    for &(rm, rc) in &r {
                        *factor.entry(lm ^ core ^ rm).or_insert(0.0) += lc * rc;
                    }
                }
                let mut next = Poly::with_capacity(out.len() * factor.len());
                for &(m, c) in &out {
                    for (&fm, &fc) in &factor {
                        *next.entry(m ^ fm).or_insert(0.0) += c * fc;
                    }
                }
                out = next.into_iter().filter(|(_, c)| *c != 0.0).collect();
            }
            j += 1;
        }
        Ok(out)
    }

    fn run_count(&self, f: usize, mask: u64) -> u32 {
        let stride = 2 * pow3(f);
        (1..=self.n).filter(|&j| mask >> j & 1 == 1 && (j < stride + 1 || mask >> (j - stride) & 1 == 0)).count() as u32
    }

    fn descend(&mut self, d: usize, top: Poly) -> Result<Poly> {
        let mut poly = top;
        for f in (1..=d).rev() {
            let mut next = Poly::new();
            let mut items: Vec<(u64, f64)> = poly.into_iter().collect();
            items.sort_by_key(|t| t.0);
            for (mask, c) in items {
                self.raw += 16u128.pow(self.run_count(f, mask));
                for (m, v) in self.conjugate(f, mask)? {
                    self.insert(&mut next, m, c * v)?;
                }
            }
            next.retain(|_, c| *c != 0.0);
            poly = next;
        }
        Ok(poly)
    }
}

fn generator(n: usize, i: usize) -> Result<PauliString> {
    let mut sites = vec![(i - 1, Letter::X)];
    if i >= 2 {
        sites.push((i - 2, Letter::Z));
    }
    if i < n {
        sites.push((i, Letter::Z));
    }
    PauliString::from_sites(n, &sites)
}

/// `𝒮_jk = Z_j X_{j+1} X_{j+3} … X_{k−1} Z_k` with out-of-range sites dropped.
pub fn sop(n: usize, j: usize, k: usize) -> Result<PauliString> {
    if k < j + 2 || (k - j) % 2 == 1 || k > n + 1 {
        return Err(Error::param(format!("S{j},{k} is not a string order parameter on {n} sites")));
    }
    let mut sites = Vec::new();
    if j >= 1 {
        sites.push((j - 1, Letter::Z));
    }
    if k <= n {
        sites.push((k - 1, Letter::Z));
    }
    sites.extend((j + 1..k).step_by(2).map(|i| (i - 1, Letter::X)));
    PauliString::from_sites(n, &sites)
}

/// Splits a level-0 mask into stride-2 runs, each being one `𝒮_{j−1,k+1}`.
fn factors_of(n: usize, mask: u64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 1..=n {
        if mask >> j & 1 == 1 && (j < 3 || mask >> (j - 2) & 1 == 0) {
            let mut k = j;
            while k + 2 <= n && mask >> (k + 2) & 1 == 1 {
                k += 2;
            }
            out.push((j - 1, k + 1));
        }
    }
    out.sort();
    out
}

pub fn msop_expand(d: usize) -> Result<MsopExpansion> {
    msop_expand_with(d, MsopPart::Full, ExpansionLimits::default())
}

pub fn msop_expand_with(d: usize, part: MsopPart, limits: ExpansionLimits) -> Result<MsopExpansion> {
    let n = qcnn_size(d)?;
    if n >= 64 {
        return Err(Error::Unsupported(format!("expansion beyond 63 sites (d = {d})")));
    }
    let mut ex = Expander { n, limits, raw: 0, truncated: false };
    let c = (n + 1) / 2;
    let s = pow3(d);
    let (a, b, m) = (1u64 << (c - s), 1u64 << c, 1u64 << (c + s));
    let mut top = Poly::new();
    match part {
        MsopPart::Full => {
            for mask in [a, b, m] {
                top.insert(mask, 0.5);
            }
            top.insert(a | b | m, -0.5);
        }
        MsopPart::First => {
            for mask in [a, b, m] {
                top.insert(mask, 1.0);
            }
        }
        MsopPart::Second => {
            top.insert(a | b | m, 1.0);
        }
    }
    let poly = ex.descend(d, top)?;
    let mut masks: Vec<(u64, f64)> = poly.into_iter().collect();
    masks.sort_by_key(|t| t.0);
    let gens: Vec<PauliString> = (1..=n).map(|i| generator(n, i)).collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(masks.len());
    for (mask, coefficient) in masks {
        let mut p = PauliString::identity(n);
        for (i, g) in gens.iter().enumerate() {
            if mask >> (i + 1) & 1 == 1 {
                p = p.multiply(g)?;
            }
        }
        terms.push(MsopTerm { coefficient, factors: factors_of(n, mask), pauli: p });
    }
    terms.sort_by(|x, y| (x.factors.len(), &x.factors).cmp(&(y.factors.len(), &y.factors)));
    Ok(MsopExpansion { d, n, part, terms, raw_products: ex.raw, truncated: ex.truncated })
}

impl MsopExpansion {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The observable as a Pauli sum.
    pub fn to_pauli_sum(&self) -> Result<PauliSum> {
        let terms = self.terms.iter().map(|t| (t.coefficient, t.pauli.clone())).collect();
        PauliSum::canonicalize(self.n, terms)
    }

    /// Terms ordered by measurement setting, then by factor list.
    pub fn sorted_by_setting(&self) -> MsopExpansion {
        let strings: Vec<PauliString> = self.terms.iter().map(|t| t.pauli.clone()).collect();
        let report = super::settings::measurement_settings(&strings);
        let mut idx: Vec<usize> = (0..self.terms.len()).collect();
        idx.sort_by_key(|&i| report.assignment[i]);
        MsopExpansion { terms: idx.into_iter().map(|i| self.terms[i].clone()).collect(), ..self.clone() }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::param(format!("csv: {e}"));
        out.write_record(["coefficient", "sop_factors", "pauli_string"]).map_err(err)?;
        for t in &self.terms {
            out.write_record([t.coefficient.to_string(), t.factor_label(), t.pauli.to_string()]).map_err(err)?;
        }
        out.flush().map_err(|e| Error::param(format!("csv: {e}")))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::param(e.to_string()))
    }
}

/// One parsed row of an expansion dump.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub coefficient: f64,
    pub sop_factors: String,
    pub pauli_string: String,
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != ["coefficient", "sop_factors", "pauli_string"] {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {headers:?}") });
    }
    rd.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcnn::measurement_settings;

    #[test]
    fn sop_strings() {
        assert_eq!(sop(7, 0, 2).unwrap().to_string(), "X1 Z2");
        assert_eq!(sop(7, 3, 5).unwrap().to_string(), "Z3 X4 Z5");
        assert_eq!(sop(7, 0, 8).unwrap().to_string(), "X1 X3 X5 X7");
        assert_eq!(sop(7, 1, 7).unwrap().to_string(), "Z1 X2 X4 X6 Z7");
        assert!(sop(7, 1, 2).is_err());
    }

    #[test]
    fn factor_products_match_strings() {
        let e = msop_expand(1).unwrap();
        for t in &e.terms {
            let mut p = PauliString::identity(7);
            for &(j, k) in &t.factors {
                p = p.multiply(&sop(7, j, k).unwrap()).unwrap();
            }
            assert_eq!(p, t.pauli, "{}", t.factor_label());
        }
    }

    #[test]
    fn d1_table() {
        let e = msop_expand(1).unwrap().sorted_by_setting();
        let got: Vec<(f64, String)> = e.terms.iter().map(|t| (t.coefficient, t.factor_label())).collect();
        let want = [
            (0.25, "S02"),
            (0.25, "S04"),
            (0.25, "S06"),
            (0.25, "S28"),
            (0.25, "S48"),
            (0.25, "S68"),
            (-0.25, "S02*S46"),
            (-0.25, "S24*S68"),
            (0.5, "S35"),
            (-0.5, "S08*S35"),
        ];
        assert_eq!(got.len(), want.len());
        for ((c, l), (wc, wl)) in got.iter().zip(want) {
            assert_eq!((*c, l.as_str()), (wc, wl));
        }
        assert_eq!(e.terms[9].pauli.unsigned().to_string(), "X1 Y3 X4 Y5 X7");
        assert!(!e.truncated);
    }

    #[test]
    fn cap_semantics() {
        let tight = ExpansionLimits { max_terms: 3, allow_truncate: false };
        assert!(matches!(msop_expand_with(1, MsopPart::Full, tight), Err(Error::TermCapExceeded { cap: 3, .. })));
        let e = msop_expand_with(1, MsopPart::Full, ExpansionLimits { allow_truncate: true, ..tight }).unwrap();
        assert!(e.truncated);
        assert!(e.len() <= 3);
    }

    #[test]
    fn csv_round_trip() {
        let e = msop_expand(1).unwrap();
        let text = e.to_csv_string().unwrap();
        let rows = read_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows.iter().map(|r| r.coefficient).sum::<f64>(), 1.0);
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn settings_counts() {
        let full = msop_expand(1).unwrap();
        let strings: Vec<PauliString> = full.terms.iter().map(|t| t.pauli.clone()).collect();
        assert_eq!(measurement_settings(&strings).count(), 3);
        let first = msop_expand_with(1, MsopPart::First, ExpansionLimits::default()).unwrap();
        let strings: Vec<PauliString> = first.terms.iter().map(|t| t.pauli.clone()).collect();
        assert_eq!(measurement_settings(&strings).count(), 2);
    }

    #[test]
    fn d2_product_count() {
        let t = std::time::Instant::now();
        let e = msop_expand(2).unwrap();
        eprintln!("d=2: n={} raw={} merged={} in {:?}", e.n, e.raw_products, e.len(), t.elapsed());
        assert_eq!(e.n, 43);
        assert!(e.raw_products > 10_000);
        assert_eq!(e.raw_products, 33_379_808);
        assert!(!e.truncated);
        let sum: f64 = e.terms.iter().map(|t| t.coefficient * cluster_value(&t.pauli)).sum();
        assert!((sum - 1.0).abs() < 1e-9, "cluster expectation {sum}");
    }

    /// `⟨C|P|C⟩` for the open-chain cluster state: ±1 when `P` is in the
    /// stabilizer group, else 0.
    fn cluster_value(p: &PauliString) -> f64 {
        let n = p.n_sites();
        let full = (1u64 << n) - 1;
        let x = p.x_words()[0];
        if p.z_words()[0] != ((x << 1) ^ (x >> 1)) & full {
            return 0.0;
        }
        let mut prod = PauliString::identity(n);
        for i in (0..n).filter(|i| x >> i & 1 == 1) {
            let mut k = vec![(i, Letter::X)];
            if i > 0 {
                k.push((i - 1, Letter::Z));
            }
            if i + 1 < n {
                k.push((i + 1, Letter::Z));
            }
            prod = prod.multiply(&PauliString::from_sites(n, &k).unwrap()).unwrap();
        }
        let ratio = p.multiply(&prod).unwrap();
        assert!(ratio.is_identity());
        match ratio.phase() {
            0 => 1.0,
            2 => -1.0,
            k => panic!("non-Hermitian ratio phase {k}"),
        }
    }
}
