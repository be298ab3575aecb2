//! The seven-qubit QCNN as a full unitary, with mid-circuit measurements, and
//! as two CZ layers followed by classical post-processing.
//!
//! Qubits are 0-based here; the comments use the 1-based labels `q1 … q7`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Letter;
use crate::simulator::{run_circuit, Circuit, Control, Gate, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QcnnVariant {
    Full,
    Intermediate,
    Equivalent,
}

/// Output qubit of the `d = 1` network (`q4`).
pub const OUTPUT_QUBIT: usize = 3;

fn require_seven(n: usize) -> Result<()> {
    if n != 7 {
        return Err(Error::Unsupported(format!("QCNN circuits are built for 7 qubits only, got {n}")));
    }
    Ok(())
}

/// Nearest-neighbour CZs in two layers: `(1,2),(3,4),(5,6)` then `(2,3),(4,5),(6,7)`.
pub fn cz_layers(n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for start in [0, 1] {
        for q in (start..n - 1).step_by(2) {
            c.cz(q, q + 1)?;
        }
    }
    Ok(c)
}

pub fn build_equivalent_circuit(n: usize) -> Result<Circuit> {
    require_seven(n)?;
    let mut c = cz_layers(n)?;
    c.measure_x(&(0..n).collect::<Vec<_>>())?;
    Ok(c)
}

/// C layer: all nearest-neighbour CZs, `CZ14`, `CZ47`, then
/// `CxCxNOT_{35;4}`, `CxNOT_{2;1}`, `CxNOT_{6;7}` with X-basis controls.
pub fn convolution_layer() -> Result<Circuit> {
    let mut c = Circuit::new(7);
    for q in 0..6 {
        c.cz(q, q + 1)?;
    }
    c.cz(0, 3)?.cz(3, 6)?;
    c.controlled(&[Control::x(2), Control::x(4)], 3, Letter::X)?;
    c.controlled(&[Control::x(1)], 0, Letter::X)?;
    c.controlled(&[Control::x(5)], 6, Letter::X)?;
    Ok(c)
}

/// P layer with measurements deferred: `Z` on `q4`, `q1`, `q7`, `q4` controlled
/// by `q2`, `q3`, `q5`, `q6` reading `−`.
pub fn pooling_layer() -> Result<Circuit> {
    let mut c = Circuit::new(7);
    for (ctrl, target) in POOLING {
        c.controlled(&[Control::x(ctrl)], target, Letter::Z)?;
    }
    Ok(c)
}

/// `(measured qubit, corrected qubit)` pairs of the pooling layer.
pub const POOLING: [(usize, usize); 4] = [(1, 3), (2, 0), (4, 6), (5, 3)];

/// FC layer: `CZ14`, `CZ47`, `CxZ_{4;1}`, `CxZ_{4;7}`, `CxCxZ_{17;4}`.
pub fn fully_connected_layer() -> Result<Circuit> {
    let mut c = Circuit::new(7);
    c.cz(0, 3)?.cz(3, 6)?;
    c.controlled(&[Control::x(3)], 0, Letter::Z)?;
    c.controlled(&[Control::x(3)], 6, Letter::Z)?;
    c.controlled(&[Control::x(0), Control::x(6)], 3, Letter::Z)?;
    Ok(c)
}

/// Deferred-measurement network `U = U_FC · U_P · U_C`, read out as `X4`.
pub fn build_full_circuit(d: usize) -> Result<Circuit> {
    if d != 1 {
        return Err(Error::Unsupported(format!("full QCNN circuit only for d = 1, got d = {d}")));
    }
    let mut c = convolution_layer()?;
    c.extend(&pooling_layer()?)?;
    c.extend(&fully_connected_layer()?)?;
    c.measure_x(&[OUTPUT_QUBIT])?;
    Ok(c)
}

/// Unitary part of the intermediate form: the second `CZ14`/`CZ47` pair has
/// been commuted into the C layer, where it cancels the first pair and leaves
/// `CxCxZ_{35;1}`, `CxCxZ_{35;7}`, `CxZ_{2;4}`, `CxZ_{6;4}` behind.
pub fn intermediate_convolution() -> Result<Circuit> {
    let mut c = Circuit::new(7);
    for q in 0..6 {
        c.cz(q, q + 1)?;
    }
    let c35 = [Control::x(2), Control::x(4)];
    c.controlled(&c35, 0, Letter::Z)?;
    c.controlled(&c35, 6, Letter::Z)?;
    c.controlled(&c35, 3, Letter::X)?;
    c.controlled(&[Control::x(1)], 3, Letter::Z)?;
    c.controlled(&[Control::x(1)], 0, Letter::X)?;
    c.controlled(&[Control::x(5)], 3, Letter::Z)?;
    c.controlled(&[Control::x(5)], 6, Letter::X)?;
    Ok(c)
}

/// Projects `q` onto the X eigenstate `+` (`minus = false`) or `−`.
/// Returns the outcome probability and the renormalized state.
pub fn project_x(s: &StateVector, q: usize, minus: bool) -> Result<(f64, Option<StateVector>)> {
    if q >= s.n_qubits() {
        return Err(Error::OutOfRange { index: q, len: s.n_qubits() });
    }
    let bit = 1usize << q;
    let sign = if minus { -1.0 } else { 1.0 };
    let a = s.amplitudes();
    // (I ± X)/2
    let out: Vec<_> = (0..a.len()).map(|b| (a[b] + a[b ^ bit] * sign) * 0.5).collect();
    let p: f64 = out.iter().map(|v| v.norm_sqr()).sum();
    if p < 1e-15 {
        return Ok((p, None));
    }
    Ok((p, Some(StateVector::from_amplitudes(out)?)))
}

fn branch(s: &StateVector, qubits: &[usize], outcome: usize) -> Result<(f64, Option<StateVector>)> {
    let mut weight = 1.0;
    let mut cur = s.clone();
    for (i, &q) in qubits.iter().enumerate() {
        let (p, next) = project_x(&cur, q, outcome >> i & 1 == 1)?;
        weight *= p;
        match next {
            Some(n) => cur = n,
            None => return Ok((0.0, None)),
        }
    }
    Ok((weight, Some(cur)))
}

/// `[P(y = 0), P(y = 1)]` for the intermediate form, by exact enumeration of
/// all mid-circuit measurement branches.
pub fn intermediate_y_distribution(s: &StateVector) -> Result<[f64; 2]> {
    require_seven(s.n_qubits())?;
    let after_c = run_circuit(&intermediate_convolution()?, s)?;
    let measured = [1, 2, 4, 5];
    let mut py = [0.0; 2];
    for m in 0..16 {
        let (w, Some(mut st)) = branch(&after_c, &measured, m)? else { continue };
        for (i, &(_, target)) in POOLING.iter().enumerate() {
            if m >> i & 1 == 1 {
                st.apply_gate(&Gate::Pauli { qubit: target, letter: Letter::Z })?;
            }
        }
        st.apply_gate(&Gate::Controlled { controls: vec![Control::x(3)], target: 0, letter: Letter::Z })?;
        st.apply_gate(&Gate::Controlled { controls: vec![Control::x(3)], target: 6, letter: Letter::Z })?;
        for e in 0..4 {
            let (w2, Some(mut end)) = branch(&st, &[0, 6], e)? else { continue };
            if e == 3 {
                end.apply_gate(&Gate::Pauli { qubit: 3, letter: Letter::Z })?;
            }
            let px = end.x_basis_probabilities(&[OUTPUT_QUBIT])?;
            py[1] += w * w2 * px[0];
            py[0] += w * w2 * px[1];
        }
    }
    Ok(py)
}

/// `[P(y = 0), P(y = 1)]` of the full form; `y = 1` when `X4` reads `+1`.
pub fn full_y_distribution(s: &StateVector) -> Result<[f64; 2]> {
    require_seven(s.n_qubits())?;
    let out = run_circuit(&build_full_circuit(1)?, s)?;
    let px = out.x_basis_probabilities(&[OUTPUT_QUBIT])?;
    Ok([px[1], px[0]])
}

/// `[P(y = 0), P(y = 1)]` of the equivalent form.
pub fn equivalent_y_distribution(s: &StateVector) -> Result<[f64; 2]> {
    require_seven(s.n_qubits())?;
    let out = run_circuit(&cz_layers(7)?, s)?;
    let px = out.x_basis_probabilities(&(0..7).collect::<Vec<_>>())?;
    let p1: f64 = px.iter().enumerate().filter(|(x, _)| super::classify::classify_pattern(*x) == 1).map(|(_, p)| p).sum();
    Ok([1.0 - p1, p1])
}

pub fn y_distribution(form: QcnnVariant, s: &StateVector) -> Result<[f64; 2]> {
    match form {
        QcnnVariant::Full => full_y_distribution(s),
        QcnnVariant::Intermediate => intermediate_y_distribution(s),
        QcnnVariant::Equivalent => equivalent_y_distribution(s),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub form_a: QcnnVariant,
    pub form_b: QcnnVariant,
    pub trials: usize,
    /// Largest total-variation distance of the `y` distributions.
    pub max_deviation: f64,
}

/// Compares two forms on the given input states.
pub fn equivalence_check(a: QcnnVariant, b: QcnnVariant, states: &[StateVector]) -> Result<EquivalenceReport> {
    let mut max_deviation: f64 = 0.0;
    for s in states {
        let (pa, pb) = (y_distribution(a, s)?, y_distribution(b, s)?);
        let tv = 0.5 * ((pa[0] - pb[0]).abs() + (pa[1] - pb[1]).abs());
        max_deviation = max_deviation.max(tv);
    }
    Ok(EquivalenceReport { form_a: a, form_b: b, trials: states.len(), max_deviation })
}

/// Haar-random seven-qubit inputs for [`equivalence_check`].
pub fn random_inputs(trials: usize, seed: u64) -> Result<Vec<StateVector>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| StateVector::haar_random(7, &mut rng)).collect()
}
