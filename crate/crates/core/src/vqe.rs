//! Variational ground-state preparation with a brick-layout `Ry`/`CZ` ansatz.
//!
//! Layout for `n` qubits and depth `m`: one `Ry` on every qubit, then `m`
//! repetitions of
//!
//! ```text
//! CZ on (1,2),(3,4),(5,6),…   Ry on every qubit touched by those CZs
//! CZ on (2,3),(4,5),(6,7),…   Ry on every qubit touched by those CZs
//! ```
//!
//! For `n = 7, m = 1` this gives 7 + 6 + 6 = 19 angles, and
//! `θ = (π/2,…,π/2 | 0,… )` prepares the cluster state exactly.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, Gradient, IterState, State, KV};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::{Circuit, StateVector};
use crate::spinchain::{build_hamiltonian, ground_state, HamiltonianParams};

/// One rotation slot: `layer` 0 is the initial layer, then two per block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub layer: usize,
    pub qubit: usize,
}

/// Step of the ansatz in time order; `Ry` refers to an angle index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Ry { slot: usize, qubit: usize },
    Cz { a: usize, b: usize },
}

fn cz_pairs(n: usize, odd: bool) -> Vec<(usize, usize)> {
    let start = usize::from(odd);
    (start..n.saturating_sub(1)).step_by(2).map(|q| (q, q + 1)).collect()
}

fn touched(pairs: &[(usize, usize)]) -> Vec<usize> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

/// Gate schedule of the ansatz together with its slot table.
pub fn ansatz_steps(n: usize, depth: usize) -> (Vec<Slot>, Vec<Step>) {
    let mut slots = Vec::new();
    let mut steps = Vec::new();
    let add_layer = |layer: usize, qubits: &[usize], slots: &mut Vec<Slot>, steps: &mut Vec<Step>| {
        for &qubit in qubits {
            steps.push(Step::Ry { slot: slots.len(), qubit });
            slots.push(Slot { layer, qubit });
        }
    };
    add_layer(0, &(0..n).collect::<Vec<_>>(), &mut slots, &mut steps);
    for block in 0..depth {
        for (k, odd) in [false, true].into_iter().enumerate() {
            let pairs = cz_pairs(n, odd);
            steps.extend(pairs.iter().map(|&(a, b)| Step::Cz { a, b }));
            add_layer(1 + 2 * block + k, &touched(&pairs), &mut slots, &mut steps);
        }
    }
    (slots, steps)
}

pub fn angle_count(n: usize, depth: usize) -> usize {
    ansatz_steps(n, depth).0.len()
}

/// Maps an angle into `(−π, π]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub n: usize,
    pub depth: usize,
    pub angles: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(n: usize, depth: usize, angles: Vec<f64>) -> Result<Self> {
        if n < 2 || depth == 0 {
            return Err(Error::param(format!("ansatz needs n ≥ 2 and depth ≥ 1 (n={n}, depth={depth})")));
        }
        let want = angle_count(n, depth);
        if angles.len() != want {
            return Err(Error::SizeMismatch { expected: want, got: angles.len() });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("non-finite ansatz angle"));
        }
        Ok(AnsatzParams { n, depth, angles })
    }

    pub fn zeros(n: usize, depth: usize) -> Result<Self> {
        Self::new(n, depth, vec![0.0; angle_count(n, depth)])
    }

    /// Angles that prepare the cluster state.
    pub fn cluster(n: usize, depth: usize) -> Result<Self> {
        let mut p = Self::zeros(n, depth)?;
        p.angles[..n].fill(FRAC_PI_2);
        Ok(p)
    }

    pub fn layout(&self) -> Vec<Slot> {
        ansatz_steps(self.n, self.depth).0
    }

    pub fn canonicalized(&self) -> Self {
        AnsatzParams { angles: self.angles.iter().map(|&a| canonical_angle(a)).collect(), ..self.clone() }
    }

    /// The first-layer angles.
    pub fn first_layer(&self) -> &[f64] {
        &self.angles[..self.n]
    }
}

pub fn build_ansatz_circuit(p: &AnsatzParams) -> Result<Circuit> {
    let p = AnsatzParams::new(p.n, p.depth, p.angles.clone())?;
    let mut c = Circuit::new(p.n);
    for s in ansatz_steps(p.n, p.depth).1 {
        match s {
            Step::Ry { slot, qubit } => c.ry(qubit, p.angles[slot])?,
            Step::Cz { a, b } => c.cz(a, b)?,
        };
    }
    Ok(c)
}

pub fn prepare_state(p: &AnsatzParams) -> Result<StateVector> {
    let c = build_ansatz_circuit(p)?;
    crate::simulator::run_circuit(&c, &StateVector::zero(p.n)?)
}

/// Real-amplitude energy evaluator for Hamiltonians built from `X` and `Z` only.
#[derive(Clone, Debug)]
pub struct EnergyModel {
    n: usize,
    depth: usize,
    steps: Vec<Step>,
    terms: Vec<(f64, usize, usize)>,
    target: Option<Vec<f64>>,
}

impl EnergyModel {
    pub fn new(h: &PauliSum, depth: usize) -> Result<Self> {
        let n = h.n_sites();
        if n > 20 {
            return Err(Error::DenseLimit { what: "ansatz simulation", n, limit: 20 });
        }
        let mut terms = Vec::with_capacity(h.len());
        for (c, p) in h.terms() {
            let (x, z) = p.masks();
            if x & z != 0 || p.phase() % 2 == 1 {
                return Err(Error::Unsupported(format!("term {p} is not a real X/Z string")));
            }
            let sign = if p.phase() == 2 { -1.0 } else { 1.0 };
            terms.push((sign * c, x as usize, z as usize));
        }
        let (_, steps) = ansatz_steps(n, depth);
        Ok(EnergyModel { n, depth, steps, terms, target: None })
    }

    /// Attaches a real target state for fidelity evaluation.
    pub fn with_target(mut self, target: &StateVector) -> Result<Self> {
        if target.n_qubits() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: target.n_qubits() });
        }
        if target.amplitudes().iter().any(|a| a.im.abs() > 1e-12) {
            return Err(Error::Unsupported("fidelity target must be real".into()));
        }
        self.target = Some(target.amplitudes().iter().map(|a| a.re).collect());
        Ok(self)
    }

    pub fn n_angles(&self) -> usize {
        angle_count(self.n, self.depth)
    }

    pub fn state(&self, angles: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.n];
        v[0] = 1.0;
        for s in &self.steps {
            match *s {
                Step::Ry { slot, qubit } => {
                    let (s, c) = (angles[slot] / 2.0).sin_cos();
                    let bit = 1usize << qubit;
                    for i in 0..v.len() {
                        if i & bit == 0 {
                            let (a, b) = (v[i], v[i | bit]);
                            v[i] = c * a - s * b;
                            v[i | bit] = s * a + c * b;
                        }
                    }
                }
                Step::Cz { a, b } => {
                    let m = (1usize << a) | (1usize << b);
                    for (i, x) in v.iter_mut().enumerate() {
                        if i & m == m {
                            *x = -*x;
                        }
                    }
                }
            }
        }
        v
    }

    fn energy_of(&self, v: &[f64]) -> f64 {
        let mut e = 0.0;
        for &(c, x, z) in &self.terms {
            let mut acc = 0.0;
            for (b, &a) in v.iter().enumerate() {
                let t = v[b ^ x] * a;
                if (z & b).count_ones() & 1 == 1 {
                    acc -= t;
                } else {
                    acc += t;
                }
            }
            e += c * acc;
        }
        e
    }

    pub fn energy(&self, angles: &[f64]) -> f64 {
        self.energy_of(&self.state(angles))
    }

    /// Exact gradient by the two-term shift rule.
    pub fn gradient_shift(&self, angles: &[f64]) -> Vec<f64> {
        let mut th = angles.to_vec();
        (0..angles.len())
            .map(|i| {
                th[i] = angles[i] + FRAC_PI_2;
                let up = self.energy(&th);
                th[i] = angles[i] - FRAC_PI_2;
                let down = self.energy(&th);
                th[i] = angles[i];
                0.5 * (up - down)
            })
            .collect()
    }

    pub fn gradient_fd(&self, angles: &[f64], step: f64) -> Vec<f64> {
        let mut th = angles.to_vec();
        (0..angles.len())
            .map(|i| {
                th[i] = angles[i] + step;
                let up = self.energy(&th);
                th[i] = angles[i] - step;
                let down = self.energy(&th);
                th[i] = angles[i];
                (up - down) / (2.0 * step)
            })
            .collect()
    }

    /// `|⟨target|θ⟩|²`, or `NaN` without a target.
    pub fn fidelity(&self, angles: &[f64]) -> f64 {
        match &self.target {
            Some(t) => {
                let v = self.state(angles);
                let o: f64 = t.iter().zip(&v).map(|(a, b)| a * b).sum();
                o * o
            }
            None => f64::NAN,
        }
    }
}

impl CostFunction for EnergyModel {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.energy(p))
    }
}

impl Gradient for EnergyModel {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Self::Param) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.gradient_shift(p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VqeConfig {
    pub depth: usize,
    pub max_restarts: usize,
    pub max_iters: u64,
    pub grad_tol: f64,
    pub accept_fidelity: f64,
    pub lbfgs_memory: usize,
    pub seed: u64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            depth: 1,
            max_restarts: 25,
            max_iters: 2000,
            grad_tol: 1e-6,
            accept_fidelity: 0.9,
            lbfgs_memory: 7,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub theta_opt: AnsatzParams,
    pub fidelity: f64,
    pub energy: f64,
    pub exact_energy: f64,
    pub iterations: u64,
    /// Per-iteration `(energy, infidelity)`, starting with the initial point.
    pub trace: Vec<(f64, f64)>,
    pub accepted: bool,
    /// Index of the run that produced this result.
    pub run_index: usize,
    /// Number of runs performed.
    pub runs: usize,
    pub seed: u64,
}

#[derive(Default)]
struct Record {
    trace: Vec<(f64, f64)>,
    best: Option<(f64, Vec<f64>)>,
}

struct TraceObserver {
    model: Arc<EnergyModel>,
    record: Arc<Mutex<Record>>,
}

type LbfgsState = IterState<Vec<f64>, Vec<f64>, (), (), (), f64>;

impl Observe<LbfgsState> for TraceObserver {
    fn observe_init(&mut self, _name: &str, state: &LbfgsState, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        self.push(state);
        Ok(())
    }

    fn observe_iter(&mut self, state: &LbfgsState, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        self.push(state);
        Ok(())
    }
}

impl TraceObserver {
    fn push(&self, state: &LbfgsState) {
        let Some(p) = state.get_param() else { return };
        let e = self.model.energy(p);
        let f = self.model.fidelity(p);
        let mut r = self.record.lock().expect("trace lock");
        r.trace.push((e, 1.0 - f));
        if r.best.as_ref().is_none_or(|(b, _)| e < *b) {
            r.best = Some((e, p.clone()));
        }
    }
}

/// One L-BFGS run from `init`.
pub fn minimize(model: &Arc<EnergyModel>, init: Vec<f64>, cfg: &VqeConfig) -> Result<(Vec<f64>, u64, Vec<(f64, f64)>)> {
    let record = Arc::new(Mutex::new(Record::default()));
    let obs = TraceObserver { model: model.clone(), record: record.clone() };
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), cfg.lbfgs_memory)
        .with_tolerance_grad(cfg.grad_tol)
        .map_err(|e| Error::param(e.to_string()))?;
    let init_energy = model.energy(&init);
    let run = Executor::new(model.as_ref().clone(), solver)
        .configure(|s| s.param(init.clone()).max_iters(cfg.max_iters))
        .add_observer(obs, ObserverMode::Always)
        .run();
    let record = std::mem::take(&mut *record.lock().expect("trace lock"));
    let (param, iters) = match run {
        Ok(res) => {
            let st = res.state();
            let p = st.get_best_param().or(st.get_param()).cloned().unwrap_or(init.clone());
            (p, st.get_iter())
        }
        // a failed line search keeps the best point seen so far
        Err(_) => {
            let n = record.trace.len().saturating_sub(1) as u64;
            (record.best.map(|b| b.1).unwrap_or(init.clone()), n)
        }
    };
    let param = if model.energy(&param) <= init_energy { param } else { init };
    Ok((param, iters, record.trace))
}

fn run_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Uniform initial angles on `(−π, π]` for run `index`.
pub fn initial_angles(count: usize, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = run_rng(seed, index);
    (0..count).map(|_| canonical_angle(rng.random_range(-PI..PI))).collect()
}

/// Minimizes `⟨θ|H(h1,h2)|θ⟩` with restarts until the fidelity to the exact
/// ground state exceeds `cfg.accept_fidelity`.
pub fn optimize(h1: f64, h2: f64, n: usize, cfg: &VqeConfig) -> Result<OptimizationResult> {
    let h = build_hamiltonian(&HamiltonianParams::new(h1, h2, n)?)?;
    let gs = ground_state(&h)?;
    optimize_hamiltonian(&h, &gs.ground, gs.e0, cfg)
}

pub fn optimize_hamiltonian(h: &PauliSum, ground: &StateVector, e0: f64, cfg: &VqeConfig) -> Result<OptimizationResult> {
    if cfg.max_restarts == 0 {
        return Err(Error::param("restart budget must be at least 1"));
    }
    let model = Arc::new(EnergyModel::new(h, cfg.depth)?.with_target(ground)?);
    let n = h.n_sites();
    let count = model.n_angles();
    let batch = rayon::current_num_threads().max(1);
    let mut best: Option<OptimizationResult> = None;
    let mut index = 0;
    while index < cfg.max_restarts {
        let end = (index + batch).min(cfg.max_restarts);
        let runs: Vec<Result<OptimizationResult>> = (index..end)
            .into_par_iter()
            .map(|i| {
                let init = initial_angles(count, cfg.seed, i);
                let (theta, iterations, trace) = minimize(&model, init, cfg)?;
                let fidelity = model.fidelity(&theta);
                let energy = model.energy(&theta);
                let theta_opt = AnsatzParams::new(n, cfg.depth, theta)?.canonicalized();
                Ok(OptimizationResult {
                    theta_opt,
                    fidelity,
                    energy,
                    exact_energy: e0,
                    iterations,
                    trace,
                    accepted: fidelity > cfg.accept_fidelity,
                    run_index: i,
                    runs: 0,
                    seed: cfg.seed,
                })
            })
            .collect();
        for r in runs {
            let r = r?;
            if r.accepted {
                return Ok(OptimizationResult { runs: r.run_index + 1, ..r });
            }
            if best.as_ref().is_none_or(|b| r.fidelity > b.fidelity) {
                best = Some(r);
            }
        }
        index = end;
    }
    let b = best.expect("at least one run");
    Ok(OptimizationResult { runs: cfg.max_restarts, ..b })
}

/// Moves every first-layer angle into `[−π/2, π/2]` without changing the
/// prepared state `U(θ)|0…0⟩` beyond a global phase.
///
/// `Ry(θ ± π) = Ry(θ)·(∓iY)`; the `Y` is carried forward on its qubit. Each
/// `CZ` it crosses leaves a `Z` on the partner, which is moved back to the
/// start by negating the earlier rotations on that qubit, where it acts
/// trivially on `|0⟩`. The `Y` is absorbed by the next rotation on its qubit.
pub fn rewrite_angles(p: &AnsatzParams) -> AnsatzParams {
    rewrite_with_residual(p).0
}

/// Same as [`rewrite_angles`], also returning the mask `S` of input qubits
/// with `U(θ̃) ∝ U(θ)·Z_S` as operators.
pub fn rewrite_with_residual(p: &AnsatzParams) -> (AnsatzParams, u64) {
    let (_, steps) = ansatz_steps(p.n, p.depth);
    let mut th = p.angles.clone();
    let mut residual = 0u64;
    for q in 0..p.n {
        let slot = q;
        if th[slot].abs() <= FRAC_PI_2 {
            continue;
        }
        let start = steps.iter().position(|s| matches!(s, Step::Ry { slot: k, .. } if *k == slot)).expect("slot in schedule");
        let Some(absorb) = steps[start + 1..]
            .iter()
            .position(|s| matches!(s, Step::Ry { qubit, .. } if *qubit == q))
            .map(|k| k + start + 1)
        else {
            continue;
        };
        th[slot] -= PI * th[slot].signum();
        for t in start + 1..absorb {
            if let Step::Cz { a, b } = steps[t] {
                let partner = match (a == q, b == q) {
                    (true, _) => b,
                    (_, true) => a,
                    _ => continue,
                };
                residual ^= 1 << partner;
                for s in &steps[..t] {
                    if let Step::Ry { slot, qubit } = *s {
                        if qubit == partner {
                            th[slot] = -th[slot];
                        }
                    }
                }
            }
        }
        if let Step::Ry { slot, .. } = steps[absorb] {
            th[slot] += PI;
        }
    }
    (AnsatzParams { angles: th, ..p.clone() }.canonicalized(), residual)
}

/// Optimized angles for one Hamiltonian point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleRecord {
    pub h1: f64,
    pub h2: f64,
    pub n: usize,
    pub depth: usize,
    pub angles: Vec<f64>,
    pub fidelity: f64,
    pub energy: f64,
    pub accepted: bool,
    pub seed: u64,
}

impl AngleRecord {
    pub fn from_result(h1: f64, h2: f64, r: &OptimizationResult) -> Self {
        AngleRecord {
            h1,
            h2,
            n: r.theta_opt.n,
            depth: r.theta_opt.depth,
            angles: r.theta_opt.angles.clone(),
            fidelity: r.fidelity,
            energy: r.energy,
            accepted: r.accepted,
            seed: r.seed,
        }
    }

    pub fn params(&self) -> Result<AnsatzParams> {
        AnsatzParams::new(self.n, self.depth, self.angles.clone())
    }
}

/// Writes one JSON object per line.
pub fn write_angle_store(path: &Path, records: &[AngleRecord]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::param(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_angle_store(path: &Path) -> Result<Vec<AngleRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: AngleRecord = serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        r.params()?;
        out.push(r);
    }
    Ok(out)
}

/// Record nearest to `(h1, h2)` within `tol` in both coordinates.
pub fn lookup_angles(records: &[AngleRecord], h1: f64, h2: f64, tol: f64) -> Option<&AngleRecord> {
    records.iter().find(|r| (r.h1 - h1).abs() <= tol && (r.h2 - h2).abs() <= tol)
}

/// Complex statevector copy of the real ansatz output.
pub fn state_from_real(v: &[f64]) -> Result<StateVector> {
    StateVector::from_amplitudes(v.iter().map(|&a| Complex64::new(a, 0.0)).collect())
}
