//! Cluster-Ising chain: Hamiltonian, exact diagonalization, string order and
//! phase boundaries.
//!
//! `H = −Σ_i (Z_{i−1} X_i Z_{i+1} + h1 X_i + h2 X_i X_{i+1})` with open
//! boundaries: out-of-range `Z` and `X` factors are identity, so the last
//! Ising term becomes `X_N` and merges with the field term on that site.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliExpectation, PauliString, PauliSum, DEFAULT_DENSE_LIMIT};
use crate::simulator::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub h1: f64,
    pub h2: f64,
    pub n: usize,
}

impl HamiltonianParams {
    pub fn new(h1: f64, h2: f64, n: usize) -> Result<Self> {
        let p = HamiltonianParams { h1, h2, n };
        p.validate()?;
        Ok(p)
    }

    /// Seven spins, the default chain length.
    pub fn seven(h1: f64, h2: f64) -> Self {
        HamiltonianParams { h1, h2, n: 7 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::param(format!("chain needs at least 3 spins, got {}", self.n)));
        }
        if !self.h1.is_finite() || !self.h2.is_finite() {
            return Err(Error::param("couplings must be finite"));
        }
        Ok(())
    }
}

/// One term of the Hamiltonian before merging.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub coefficient: f64,
    pub string: PauliString,
    /// The term lost a factor to the open boundary.
    pub boundary: bool,
    pub kind: TermKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    Cluster,
    Field,
    Ising,
}

/// All `3N` terms, boundary factors already dropped.
pub fn raw_terms(p: &HamiltonianParams) -> Result<Vec<RawTerm>> {
    p.validate()?;
    let n = p.n;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let mut sites = vec![(i, Letter::X)];
        if i > 0 {
            sites.push((i - 1, Letter::Z));
        }
        if i + 1 < n {
            sites.push((i + 1, Letter::Z));
        }
        out.push(RawTerm {
            coefficient: -1.0,
            string: PauliString::from_sites(n, &sites)?,
            boundary: i == 0 || i + 1 == n,
            kind: TermKind::Cluster,
        });
    }
    for i in 0..n {
        out.push(RawTerm {
            coefficient: -p.h1,
            string: PauliString::single(n, i, Letter::X)?,
            boundary: false,
            kind: TermKind::Field,
        });
    }
    for i in 0..n {
        let mut sites = vec![(i, Letter::X)];
        if i + 1 < n {
            sites.push((i + 1, Letter::X));
        }
        out.push(RawTerm {
            coefficient: -p.h2,
            string: PauliString::from_sites(n, &sites)?,
            boundary: i + 1 == n,
            kind: TermKind::Ising,
        });
    }
    Ok(out)
}

pub fn build_hamiltonian(p: &HamiltonianParams) -> Result<PauliSum> {
    let terms = raw_terms(p)?.into_iter().map(|t| (t.coefficient, t.string)).collect();
    PauliSum::canonicalize(p.n, terms)
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub ground: StateVector,
}

/// Dense diagonalization of a real-symmetric Pauli sum.
pub fn ground_state(h: &PauliSum) -> Result<SpectrumResult> {
    let n = h.n_sites();
    if n > DEFAULT_DENSE_LIMIT {
        return Err(Error::DenseLimit { what: "exact diagonalization", n, limit: DEFAULT_DENSE_LIMIT });
    }
    if !h.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let m: DMatrix<f64> = h.to_real_matrix()?;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    let e1 = if order.len() > 1 { eig.eigenvalues[order[1]] } else { e0 };
    let v = eig.eigenvectors.column(order[0]);
    // fix the sign so the largest component is positive
    let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    let amps = v.iter().map(|&x| Complex64::new(sign * x, 0.0)).collect();
    Ok(SpectrumResult { e0, e1, gap: e1 - e0, ground: StateVector::from_amplitudes(amps)? })
}

/// `Z1 X2 X4 … X_{N−1} Z_N`, defined for odd `n` only.
pub fn string_order_operator(n: usize) -> Result<PauliString> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::param(format!(
            "string order needs an odd chain of at least 3 spins so that the X pattern ends next to Z_N; got {n}"
        )));
    }
    let mut sites = vec![(0, Letter::Z), (n - 1, Letter::Z)];
    sites.extend((1..n - 1).step_by(2).map(|i| (i, Letter::X)));
    PauliString::from_sites(n, &sites)
}

pub fn string_order_observable(n: usize) -> Result<PauliSum> {
    Ok(PauliSum::from_string(1.0, string_order_operator(n)?))
}

pub fn string_order<S: PauliExpectation>(state: &S) -> Result<f64> {
    state.expectation(&string_order_observable(state.n_qubits())?)
}

/// Energies of one `h1` column on a regular `h2` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyColumn {
    pub h1: f64,
    pub h2: Vec<f64>,
    pub e0: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub h1: f64,
    pub h2: f64,
    pub curvature: f64,
}

/// Central-difference second derivative `E0''(h2)` on interior points.
pub fn second_derivative(h2: &[f64], e0: &[f64]) -> Result<Vec<f64>> {
    if h2.len() != e0.len() {
        return Err(Error::SizeMismatch { expected: h2.len(), got: e0.len() });
    }
    if h2.len() < 5 {
        return Err(Error::param(format!("need at least 5 points per column, got {}", h2.len())));
    }
    let step = h2[1] - h2[0];
    if step <= 0.0 {
        return Err(Error::param("h2 grid must increase"));
    }
    for w in h2.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::param("h2 grid is not regular"));
        }
    }
    Ok((1..e0.len() - 1).map(|i| (e0[i + 1] - 2.0 * e0[i] + e0[i - 1]) / (step * step)).collect())
}

/// Local maxima of `|E0''|` along one column, ascending in `h2`.
///
/// A flat run of equal maxima yields one point, the one with smallest `|h2|`.
pub fn column_boundaries(col: &EnergyColumn) -> Result<Vec<BoundaryPoint>> {
    let d2: Vec<f64> = second_derivative(&col.h2, &col.e0)?.into_iter().map(f64::abs).collect();
    let xs = &col.h2[1..col.h2.len() - 1];
    let scale = d2.iter().fold(0.0f64, |a, &b| a.max(b));
    let tol = 1e-9 * (1.0 + scale);
    let mut out = Vec::new();
    let mut i = 0;
    while i < d2.len() {
        let mut j = i;
        while j + 1 < d2.len() && (d2[j + 1] - d2[i]).abs() <= tol {
            j += 1;
        }
        let left_lower = i > 0 && d2[i - 1] < d2[i] - tol;
        let right_lower = j + 1 < d2.len() && d2[j + 1] < d2[i] - tol;
        if left_lower && right_lower && d2[i] > tol {
            let k = (i..=j).min_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs())).unwrap();
            out.push(BoundaryPoint { h1: col.h1, h2: xs[k], curvature: d2[k] });
        }
        i = j + 1;
    }
    Ok(out)
}

pub fn phase_boundaries(grid: &[EnergyColumn]) -> Result<Vec<BoundaryPoint>> {
    let mut out = Vec::new();
    for c in grid {
        out.extend(column_boundaries(c)?);
    }
    Ok(out)
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// One exact-diagonalization grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub h1: f64,
    pub h2: f64,
    pub e0: f64,
    pub gap: f64,
    pub sop: f64,
}

pub fn solve_point(h1: f64, h2: f64, n: usize) -> Result<(SweepPoint, StateVector)> {
    let p = HamiltonianParams::new(h1, h2, n)?;
    let gs = ground_state(&build_hamiltonian(&p)?)?;
    let sop = string_order(&gs.ground)?;
    Ok((SweepPoint { h1, h2, e0: gs.e0, gap: gs.gap, sop }, gs.ground))
}

/// Row-major sweep (`h1` outer, `h2` inner), computed in parallel.
pub fn sweep(h1s: &[f64], h2s: &[f64], n: usize) -> Result<Vec<SweepPoint>> {
    let pts: Vec<(f64, f64)> = h1s.iter().flat_map(|&a| h2s.iter().map(move |&b| (a, b))).collect();
    pts.par_iter().map(|&(a, b)| solve_point(a, b, n).map(|r| r.0)).collect()
}

/// Groups a row-major sweep into per-`h1` energy columns.
pub fn energy_columns(points: &[SweepPoint], h2_count: usize) -> Vec<EnergyColumn> {
    points
        .chunks(h2_count)
        .map(|c| EnergyColumn { h1: c[0].h1, h2: c.iter().map(|p| p.h2).collect(), e0: c.iter().map(|p| p.e0).collect() })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSymmetry {
    pub term: String,
    pub kind: TermKind,
    pub boundary: bool,
    pub commutes_even: bool,
    pub commutes_odd: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub terms: Vec<TermSymmetry>,
}

impl SymmetryReport {
    /// Every bulk term commutes with both parities.
    pub fn bulk_ok(&self) -> bool {
        self.terms.iter().filter(|t| !t.boundary).all(|t| t.commutes_even && t.commutes_odd)
    }
}

/// Parity `Π X` over 1-based even sites (`even = true`) or odd sites.
pub fn parity_operator(n: usize, even: bool) -> Result<PauliString> {
    let start = if even { 1 } else { 0 };
    let sites: Vec<(usize, Letter)> = (start..n).step_by(2).map(|i| (i, Letter::X)).collect();
    PauliString::from_sites(n, &sites)
}

pub fn bulk_symmetry_check(p: &HamiltonianParams) -> Result<SymmetryReport> {
    let pe = parity_operator(p.n, true)?;
    let po = parity_operator(p.n, false)?;
    let terms = raw_terms(p)?
        .into_iter()
        .map(|t| TermSymmetry {
            term: t.string.to_string(),
            kind: t.kind,
            boundary: t.boundary,
            commutes_even: t.string.commutes_with(&pe),
            commutes_odd: t.string.commutes_with(&po),
        })
        .collect();
    Ok(SymmetryReport { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{fidelity, run_circuit, Circuit};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn cluster(n: usize) -> StateVector {
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.ry(q, FRAC_PI_2).unwrap();
        }
        for q in 0..n - 1 {
            c.cz(q, q + 1).unwrap();
        }
        run_circuit(&c, &StateVector::zero(n).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_is_stabilizer_sum() {
        let h = build_hamiltonian(&HamiltonianParams::seven(0.0, 0.0)).unwrap();
        assert_eq!(h.len(), 7);
        for (i, (a, p)) in h.terms().iter().enumerate() {
            assert_eq!(*a, -1.0);
            for (_, q) in &h.terms()[i..] {
                assert!(p.commutes_with(q));
            }
        }
        assert_eq!(h.terms()[0].1.to_string(), "X1 Z2");
        assert_eq!(h.terms()[6].1.to_string(), "Z6 X7");
        let r = ground_state(&h).unwrap();
        assert_abs_diff_eq!(r.e0, -7.0, epsilon = 1e-10);
        assert!(r.gap > 1.0);
        assert_abs_diff_eq!(fidelity(&r.ground, &cluster(7)).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn boundary_ising_term_merges_with_field() {
        let h = build_hamiltonian(&HamiltonianParams::seven(0.3, 0.5)).unwrap();
        assert_eq!(h.len(), 7 + 7 + 6);
        let x7 = PauliString::parse("X7", 7).unwrap();
        let c = h.terms().iter().find(|(_, p)| *p == x7).unwrap().0;
        assert_abs_diff_eq!(c, -0.8, epsilon = 1e-15);
    }

    #[test]
    fn three_site_ground_energy() {
        let h = build_hamiltonian(&HamiltonianParams::new(0.0, 0.0, 3).unwrap()).unwrap();
        let m = h.to_matrix().unwrap();
        assert!((m.adjoint() - &m).norm() == 0.0);
        assert_abs_diff_eq!(ground_state(&h).unwrap().e0, -3.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_is_small() {
        let h = build_hamiltonian(&HamiltonianParams::seven(0.4, -0.7)).unwrap();
        let r = ground_state(&h).unwrap();
        let m = h.to_matrix().unwrap();
        let v = nalgebra::DVector::from_column_slice(r.ground.amplitudes());
        let res = &m * &v - v.clone() * Complex64::new(r.e0, 0.0);
        assert!(res.norm() < 1e-9);
    }

    #[test]
    fn string_order_operator_forms() {
        assert_eq!(string_order_operator(7).unwrap().to_string(), "Z1 X2 X4 X6 Z7");
        assert_eq!(string_order_operator(3).unwrap().to_string(), "Z1 X2 Z3");
        assert!(string_order_operator(6).is_err());
        for n in [3, 5, 7, 9] {
            assert_abs_diff_eq!(string_order(&cluster(n)).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn example_points() {
        let (deep, _) = solve_point(0.0, -0.2, 7).unwrap();
        assert!(deep.sop > 0.8, "{deep:?}");
        let (pm, _) = solve_point(1.1, 1.4, 7).unwrap();
        assert!(pm.sop.abs() < 0.1, "{pm:?}");
        let (zero, _) = solve_point(0.0, 0.0, 7).unwrap();
        assert_abs_diff_eq!(zero.sop, 1.0, epsilon = 1e-10);
        let (big, _) = solve_point(1e6, 0.0, 7).unwrap();
        assert!(big.sop.abs() < 1e-6);
    }

    #[test]
    fn large_field_energy_bound() {
        for h1 in [10.0, 100.0] {
            let (p, _) = solve_point(h1, 0.0, 7).unwrap();
            assert!(p.e0 <= -7.0 * h1 + 1e-9);
            assert!(p.e0 >= -7.0 * h1 - 7.0 - 1e-9);
        }
    }

    #[test]
    fn boundaries_on_zero_field_column() {
        let h2 = linspace(-1.6, 1.6, 161);
        let pts = sweep(&[0.0], &h2, 7).unwrap();
        let col = &energy_columns(&pts, h2.len())[0];
        let b = column_boundaries(col).unwrap();
        assert_eq!(b.len(), 2, "{b:?}");
        assert!(b[0].h2 < 0.0 && b[1].h2 > 0.0);
        assert!((b[0].h2.abs() - b[1].h2.abs()).abs() < 0.05, "{b:?}");
        for p in &b {
            assert!((p.h2.abs() - 1.0).abs() < 0.35, "{p:?}");
        }
    }

    #[test]
    fn flat_and_coarse_columns() {
        let col = EnergyColumn { h1: 0.0, h2: linspace(-1.0, 1.0, 9), e0: vec![-3.0; 9] };
        assert!(column_boundaries(&col).unwrap().is_empty());
        let coarse = EnergyColumn { h1: 0.0, h2: linspace(-1.0, 1.0, 4), e0: vec![0.0; 4] };
        assert!(column_boundaries(&coarse).is_err());
        let irregular = EnergyColumn { h1: 0.0, h2: vec![0.0, 0.1, 0.3, 0.4, 0.5], e0: vec![0.0; 5] };
        assert!(column_boundaries(&irregular).is_err());
    }

    #[test]
    fn plateau_picks_smallest_abs_h2() {
        // |E''| = 0,2,2,0 around h2 = 0.1, 0.2 after differencing
        let h2 = linspace(-0.2, 0.4, 7);
        let e0 = vec![0.0, 0.0, 0.0, 0.0, 0.02, 0.06, 0.10];
        let col = EnergyColumn { h1: 0.0, h2, e0 };
        let b = column_boundaries(&col).unwrap();
        assert_eq!(b.len(), 1);
        assert_abs_diff_eq!(b[0].h2, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn symmetry_report() {
        let r = bulk_symmetry_check(&HamiltonianParams::seven(0.5, 0.5)).unwrap();
        assert!(r.bulk_ok());
        let z2x3z4 = r.terms.iter().find(|t| t.term == "Z2 X3 Z4").unwrap();
        assert!(z2x3z4.commutes_even && z2x3z4.commutes_odd && !z2x3z4.boundary);
        let x1z2 = r.terms.iter().find(|t| t.term == "X1 Z2").unwrap();
        assert!(x1z2.boundary && !x1z2.commutes_even);
        for t in r.terms.iter().filter(|t| t.kind != TermKind::Cluster) {
            assert!(t.commutes_even && t.commutes_odd);
        }
    }
}
