//! Sweeps: the string-order and energy phase diagram, and the
//! fixed-`h1` linecut comparing the QCNN output with the directly measured
//! string order parameter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{measure_setting, simulate_noisy_from, DensityMatrix, DeviceModel, ReadoutOptions};
use crate::noise::schedule::{bases_for, parity_expectation};
use crate::pauli::{PauliExpectation, PauliSum};
use crate::qcnn::{measurement_settings, qcnn_output_noisy};
use crate::simulator::StateVector;
use crate::spinchain::{
    build_hamiltonian, ground_state, linspace, phase_boundaries, string_order_observable, BoundaryPoint, EnergyColumn,
    HamiltonianParams,
};
use crate::vqe::{build_ansatz_circuit, lookup_angles, optimize, prepare_state, AngleRecord, AnsatzParams, VqeConfig};

/// Column sets of the CSV outputs; bump the version when they change.
pub const SCHEMA_VERSION: u32 = 1;

pub const PHASE_DIAGRAM_COLUMNS: [&str; 11] =
    ["h1", "h2", "s_exact", "s_ideal", "s_noisy", "e_exact", "e_ideal", "e_noisy", "fidelity", "converged", "seed"];

pub const LINECUT_COLUMNS: [&str; 12] = [
    "h1", "h2", "s_exact", "s_ideal", "s_noisy", "qcnn_exact", "qcnn_ideal", "qcnn_noisy", "fidelity", "converged",
    "in_spt", "seed",
];

/// How states are executed and read out on the noisy side.
#[derive(Clone, Debug)]
pub struct Backend {
    pub device: DeviceModel,
    pub readout: ReadoutOptions,
    /// Start from `|0…0⟩` (shots with excited qubits discarded) rather than
    /// the thermal product state.
    pub preselection: bool,
}

impl Backend {
    pub fn new(device: DeviceModel, mitigate: bool, preselection: bool, shots: u64, seed: u64) -> Self {
        Backend { device, readout: ReadoutOptions { shots, seed, ..ReadoutOptions::device(mitigate) }, preselection }
    }

    fn with_seed(&self, seed: u64) -> Self {
        Backend { readout: ReadoutOptions { seed, ..self.readout }, ..self.clone() }
    }

    /// State of the register before the first gate.
    pub fn initial_state(&self, n: usize) -> Result<DensityMatrix> {
        if self.preselection {
            return DensityMatrix::zero(n);
        }
        let dim = 1usize << n;
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let p: f64 = (0..n)
                .map(|q| {
                    let t = self.device.qubits[q].thermal_population;
                    if b >> q & 1 == 1 {
                        t
                    } else {
                        1.0 - t
                    }
                })
                .product();
            m[(b, b)] = num_complex::Complex64::new(p, 0.0);
        }
        DensityMatrix::from_matrix(&m)
    }

    /// Noisy execution of the ansatz.
    pub fn prepare(&self, p: &AnsatzParams) -> Result<DensityMatrix> {
        simulate_noisy_from(&build_ansatz_circuit(p)?, &self.device, self.initial_state(p.n)?)
    }

    /// `⟨obs⟩` from one readout per qubit-wise compatible setting.
    pub fn expectation(&self, rho: &DensityMatrix, obs: &PauliSum) -> Result<f64> {
        let strings: Vec<_> = obs.terms().iter().map(|(_, p)| p.clone()).collect();
        let report = measurement_settings(&strings);
        let mut total = 0.0;
        for (k, setting) in report.settings.iter().enumerate() {
            let probe = crate::pauli::PauliString::from_sites(
                rho.n_qubits(),
                &setting.bases.iter().enumerate().filter_map(|(q, b)| b.map(|l| (q, l))).collect::<Vec<_>>(),
            )?;
            let bases = bases_for(&probe);
            let opts = ReadoutOptions { seed: self.readout.seed.wrapping_add(k as u64), ..self.readout };
            let probs = measure_setting(rho, &self.device, &bases, &opts)?;
            for ((c, p), _) in obs.terms().iter().zip(&report.assignment).filter(|(_, &a)| a == k) {
                total += c * parity_expectation(&probs, p)?;
            }
        }
        Ok(total)
    }

    pub fn qcnn(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(qcnn_output_noisy(rho, &self.device, &self.readout)?.y_expect)
    }
}

/// Backend with no decoherence and perfect readout; shots still apply.
pub fn ideal_backend(n: usize, shots: u64, seed: u64) -> Backend {
    Backend {
        device: DeviceModel::noiseless(n),
        readout: ReadoutOptions { shots, seed, ..ReadoutOptions::ideal() },
        preselection: true,
    }
}

/// Per-point seed for sampled readout.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9e37_79b9))
}

/// Angles and preparation quality for one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub params: AnsatzParams,
    pub fidelity: f64,
    pub converged: bool,
}

/// Uses a stored record when one matches, otherwise runs the optimizer.
pub fn prepare_point(h1: f64, h2: f64, n: usize, vqe: &VqeConfig, store: &[AngleRecord]) -> Result<Prepared> {
    if let Some(r) = lookup_angles(store, h1, h2, 1e-9).filter(|r| r.n == n && r.depth == vqe.depth) {
        return Ok(Prepared { params: r.params()?, fidelity: r.fidelity, converged: r.accepted });
    }
    let r = optimize(h1, h2, n, vqe)?;
    Ok(Prepared { params: r.theta_opt, fidelity: r.fidelity, converged: r.accepted })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub h1: f64,
    pub h2: f64,
    pub s_exact: f64,
    pub s_ideal: f64,
    pub s_noisy: f64,
    pub e_exact: f64,
    pub e_ideal: f64,
    pub e_noisy: f64,
    pub fidelity: f64,
    /// False when the optimizer exhausted its restarts below the threshold;
    /// such points are kept and flagged.
    pub converged: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub h1: (f64, f64),
    pub h2: (f64, f64),
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { h1: (0.0, 1.6), h2: (-1.6, 1.6), resolution: 10 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Config(format!("grid resolution must be at least 2, got {}", self.resolution)));
        }
        if !(self.h1.0 <= self.h1.1 && self.h2.0 <= self.h2.1) {
            return Err(Error::Config("grid ranges must be ordered low, high".into()));
        }
        Ok(())
    }

    /// `(h1, h2)` in row-major order, `h1` outer.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let h1s = linspace(self.h1.0, self.h1.1, self.resolution);
        let h2s = linspace(self.h2.0, self.h2.1, self.resolution);
        h1s.iter().flat_map(|&a| h2s.iter().map(move |&b| (a, b))).collect()
    }
}

/// Inputs shared by the sweeps.
#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub n: usize,
    pub vqe: VqeConfig,
    pub store: Vec<AngleRecord>,
    pub noisy: Backend,
    pub shots: u64,
    pub seed: u64,
}

fn exact_point(h1: f64, h2: f64, n: usize) -> Result<(PauliSum, StateVector, f64)> {
    let h = build_hamiltonian(&HamiltonianParams::new(h1, h2, n)?)?;
    let gs = ground_state(&h)?;
    Ok((h, gs.ground, gs.e0))
}

pub fn phase_point(h1: f64, h2: f64, index: usize, setup: &SweepSetup) -> Result<PhasePoint> {
    let n = setup.n;
    let sop = string_order_observable(n)?;
    let (h, ground, e_exact) = exact_point(h1, h2, n)?;
    let prep = prepare_point(h1, h2, n, &setup.vqe, &setup.store)?;
    let seed = point_seed(setup.seed, index);
    let ideal = ideal_backend(n, setup.shots, seed);
    let pure = DensityMatrix::from_pure(&prepare_state(&prep.params)?)?;
    let noisy = setup.noisy.with_seed(seed);
    let rho = noisy.prepare(&prep.params)?;
    Ok(PhasePoint {
        h1,
        h2,
        s_exact: ground.expectation(&sop)?,
        s_ideal: ideal.expectation(&pure, &sop)?,
        s_noisy: noisy.expectation(&rho, &sop)?,
        e_exact,
        e_ideal: ideal.expectation(&pure, &h)?,
        e_noisy: noisy.expectation(&rho, &h)?,
        fidelity: prep.fidelity,
        converged: prep.converged,
        seed,
    })
}

/// Grid points are independent; results come back in grid order.
pub fn phase_diagram(grid: &GridSpec, setup: &SweepSetup) -> Result<Vec<PhasePoint>> {
    grid.validate()?;
    let pts = grid.points();
    pts.par_iter().enumerate().map(|(i, &(a, b))| phase_point(a, b, i, setup)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinecutPoint {
    pub h1: f64,
    pub h2: f64,
    pub s_exact: f64,
    pub s_ideal: f64,
    pub s_noisy: f64,
    pub qcnn_exact: f64,
    pub qcnn_ideal: f64,
    pub qcnn_noisy: f64,
    pub fidelity: f64,
    pub converged: bool,
    pub in_spt: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linecut {
    pub h1: f64,
    pub points: Vec<LinecutPoint>,
    pub boundaries: Vec<BoundaryPoint>,
    /// Open `h2` interval of the SPT phase along the cut.
    pub spt_window: (f64, f64),
}

/// The boundary pair enclosing the point of largest exact string order;
/// missing sides extend to the ends of the sweep.
pub fn spt_window(h2s: &[f64], s_exact: &[f64], boundaries: &[BoundaryPoint]) -> (f64, f64) {
    let peak = s_exact.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0.0, |(i, _)| h2s[i]);
    let lo = boundaries.iter().map(|b| b.h2).filter(|&x| x < peak).fold(f64::NEG_INFINITY, f64::max);
    let hi = boundaries.iter().map(|b| b.h2).filter(|&x| x > peak).fold(f64::INFINITY, f64::min);
    let (first, last) = (h2s[0], h2s[h2s.len() - 1]);
    (if lo.is_finite() { lo } else { first }, if hi.is_finite() { hi } else { last })
}

pub fn linecut(h1: f64, h2s: &[f64], setup: &SweepSetup) -> Result<Linecut> {
    let n = setup.n;
    if n != 7 {
        return Err(Error::Unsupported(format!("the QCNN linecut needs 7 qubits, got {n}")));
    }
    if h2s.len() < 5 {
        return Err(Error::Config(format!("linecut needs at least 5 points, got {}", h2s.len())));
    }
    let sop = string_order_observable(n)?;
    let exact: Vec<(StateVector, f64)> = h2s
        .par_iter()
        .map(|&b| exact_point(h1, b, n).map(|(_, g, e)| (g, e)))
        .collect::<Result<_>>()?;
    let col = EnergyColumn { h1, h2: h2s.to_vec(), e0: exact.iter().map(|e| e.1).collect() };
    let boundaries = phase_boundaries(std::slice::from_ref(&col))?;
    let s_exact: Vec<f64> = exact.iter().map(|(g, _)| g.expectation(&sop)).collect::<Result<_>>()?;
    let window = spt_window(h2s, &s_exact, &boundaries);
    let points = h2s
        .par_iter()
        .enumerate()
        .map(|(i, &h2)| {
            let ground = &exact[i].0;
            let prep = prepare_point(h1, h2, n, &setup.vqe, &setup.store)?;
            let seed = point_seed(setup.seed, i);
            let ideal = ideal_backend(n, setup.shots, seed);
            let pure = DensityMatrix::from_pure(&prepare_state(&prep.params)?)?;
            let noisy = setup.noisy.with_seed(seed);
            let rho = noisy.prepare(&prep.params)?;
            let exact_rho = DensityMatrix::from_pure(ground)?;
            Ok(LinecutPoint {
                h1,
                h2,
                s_exact: s_exact[i],
                s_ideal: ideal.expectation(&pure, &sop)?,
                s_noisy: noisy.expectation(&rho, &sop)?,
                qcnn_exact: ideal_backend(n, 0, 0).qcnn(&exact_rho)?,
                qcnn_ideal: ideal.qcnn(&pure)?,
                qcnn_noisy: noisy.qcnn(&rho)?,
                fidelity: prep.fidelity,
                converged: prep.converged,
                in_spt: h2 > window.0 && h2 < window.1,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Linecut { h1, points, boundaries, spt_window: window })
}

/// Deep-SPT point of a linecut: the one with the largest exact string order.
pub fn deep_spt_point(cut: &Linecut) -> Option<&LinecutPoint> {
    cut.points.iter().filter(|p| p.in_spt).max_by(|a, b| a.s_exact.total_cmp(&b.s_exact))
}

fn fmt(x: f64) -> String {
    format!("{x:.12}")
}

pub fn phase_diagram_csv(points: &[PhasePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::param(format!("csv: {e}"));
    w.write_record(PHASE_DIAGRAM_COLUMNS).map_err(err)?;
    for p in points {
        w.write_record([
            fmt(p.h1),
            fmt(p.h2),
            fmt(p.s_exact),
            fmt(p.s_ideal),
            fmt(p.s_noisy),
            fmt(p.e_exact),
            fmt(p.e_ideal),
            fmt(p.e_noisy),
            fmt(p.fidelity),
            p.converged.to_string(),
            p.seed.to_string(),
        ])
        .map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::param(e.to_string()))?).map_err(|e| Error::param(e.to_string()))
}

pub fn linecut_csv(cut: &Linecut) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::param(format!("csv: {e}"));
    w.write_record(LINECUT_COLUMNS).map_err(err)?;
    for p in &cut.points {
        w.write_record([
            fmt(p.h1),
            fmt(p.h2),
            fmt(p.s_exact),
            fmt(p.s_ideal),
            fmt(p.s_noisy),
            fmt(p.qcnn_exact),
            fmt(p.qcnn_ideal),
            fmt(p.qcnn_noisy),
            fmt(p.fidelity),
            p.converged.to_string(),
            p.in_spt.to_string(),
            p.seed.to_string(),
        ])
        .map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::param(e.to_string()))?).map_err(|e| Error::param(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(noisy: Backend) -> SweepSetup {
        SweepSetup { n: 7, vqe: VqeConfig::default(), store: vec![], noisy, shots: 0, seed: 0 }
    }

    #[test]
    fn cluster_point_is_ideal() {
        let s = setup(ideal_backend(7, 0, 0));
        let p = phase_point(0.0, 0.0, 0, &s).unwrap();
        assert!((p.s_exact - 1.0).abs() < 1e-10);
        assert!((p.s_ideal - 1.0).abs() < 1e-6);
        assert!((p.s_noisy - p.s_ideal).abs() < 1e-9);
        assert!((p.e_noisy - p.e_ideal).abs() < 1e-9);
        assert!(p.converged);
    }

    #[test]
    fn grouped_energy_matches_exact() {
        let h = build_hamiltonian(&HamiltonianParams::seven(0.4, -0.3)).unwrap();
        let g = ground_state(&h).unwrap();
        let rho = DensityMatrix::from_pure(&g.ground).unwrap();
        let e = ideal_backend(7, 0, 0).expectation(&rho, &h).unwrap();
        assert!((e - g.e0).abs() < 1e-9);
    }

    #[test]
    fn thermal_start_without_preselection() {
        let b = Backend::new(DeviceModel::table_one(), true, false, 0, 0);
        let rho = b.initial_state(7).unwrap();
        let p0 = rho.get(0, 0).re;
        let want: f64 = DeviceModel::table_one().qubits.iter().map(|q| 1.0 - q.thermal_population).product();
        assert!((p0 - want).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_brackets_peak() {
        let h2s = linspace(-1.0, 1.0, 5);
        let b = |h2| BoundaryPoint { h1: 0.0, h2, curvature: 1.0 };
        assert_eq!(spt_window(&h2s, &[0.0, 0.5, 1.0, 0.5, 0.0], &[b(-0.5), b(0.5)]), (-0.5, 0.5));
        assert_eq!(spt_window(&h2s, &[0.0, 0.5, 1.0, 0.5, 0.0], &[b(0.5)]), (-1.0, 0.5));
    }

    #[test]
    fn csv_headers_are_stable() {
        let text = phase_diagram_csv(&[]).unwrap();
        assert_eq!(text.trim(), PHASE_DIAGRAM_COLUMNS.join(","));
        let cut = Linecut { h1: 0.2, points: vec![], boundaries: vec![], spt_window: (0.0, 0.0) };
        assert_eq!(linecut_csv(&cut).unwrap().trim(), LINECUT_COLUMNS.join(","));
    }
}
