//! C interface to `spt-qcnn`.
//!
//! Objects cross the boundary as opaque handles returned through out-pointers
//! and released with the matching `spt_*_free`. Every fallible
//! call returns an [`SptStatus`]; on failure the message is kept per thread
//! and can be copied out with [`spt_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_complex::Complex64;
use spt_qcnn::experiments::Backend;
use spt_qcnn::noise::{DensityMatrix, DeviceModel};
use spt_qcnn::qcnn::{msop_expand, qcnn_output, qcnn_output_density, MsopExpansion};
use spt_qcnn::simulator::StateVector;
use spt_qcnn::spinchain::{build_hamiltonian, ground_state, string_order, HamiltonianParams};
use spt_qcnn::vqe::{optimize, prepare_state, rewrite_angles, AnsatzParams, OptimizationResult, VqeConfig};
use spt_qcnn::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeMismatch = 3,
    OutOfRange = 4,
    Unsupported = 5,
    Io = 6,
    Config = 7,
    Numerical = 8,
    Panic = 9,
}

impl From<&Error> for SptStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::SizeMismatch { .. } => SptStatus::SizeMismatch,
            Error::OutOfRange { .. } | Error::DenseLimit { .. } | Error::TermCapExceeded { .. } => SptStatus::OutOfRange,
            Error::InvalidParameter(_) | Error::NonHermitian | Error::Parse { .. } => SptStatus::InvalidArgument,
            Error::NotCptp(_) | Error::Singular { .. } => SptStatus::Numerical,
            Error::Unsupported(_) => SptStatus::Unsupported,
            Error::Io { .. } => SptStatus::Io,
            Error::Config(_) => SptStatus::Config,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: SptStatus, msg: impl Into<String>) -> SptStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SptStatus>) -> SptStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SptStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SptStatus::Panic, msg)
        }
    }
}

trait IntoStatus<T> {
    fn st(self) -> Result<T, SptStatus>;
}

impl<T> IntoStatus<T> for spt_qcnn::Result<T> {
    fn st(self) -> Result<T, SptStatus> {
        self.map_err(|e| fail(SptStatus::from(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SptStatus> {
    p.as_ref().ok_or_else(|| fail(SptStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SptStatus> {
    p.as_mut().ok_or_else(|| fail(SptStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], SptStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SptStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], SptStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(SptStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copies `s` into `buf` as a NUL-terminated string, truncating if needed.
/// Returns the full length without the terminator.
unsafe fn copy_str(s: &str, buf: *mut c_char, len: usize) -> usize {
    if !buf.is_null() && len > 0 {
        let n = s.len().min(len - 1);
        std::ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    s.len()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Pure state on `n` qubits.
pub struct SptState(StateVector);

/// Density matrix on `n` qubits.
pub struct SptDensity(DensityMatrix);

/// Noise parameters of a device.
pub struct SptDevice(DeviceModel);

/// Result of a variational ground-state search.
pub struct SptVqeResult(OptimizationResult);

/// Pauli expansion of the multiscale string order parameter.
pub struct SptMsop(MsopExpansion);

/// Settings for [`spt_vqe_optimize`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SptVqeOptions {
    pub depth: usize,
    pub max_restarts: usize,
    pub max_iters: u64,
    pub accept_fidelity: f64,
    pub seed: u64,
}

/// Library defaults for [`SptVqeOptions`].
#[no_mangle]
pub extern "C" fn spt_vqe_options_default() -> SptVqeOptions {
    let d = VqeConfig::default();
    SptVqeOptions {
        depth: d.depth,
        max_restarts: d.max_restarts,
        max_iters: d.max_iters,
        accept_fidelity: d.accept_fidelity,
        seed: d.seed,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of the calling thread into `buf`.
///
/// Returns the message length (excluding the terminator), so a call with
/// `len == 0` sizes the buffer.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn spt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_str(&e.borrow(), buf, len))
}

/// Exact ground state of the cluster-Ising chain.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn spt_ground_state(h1: f64, h2: f64, n: usize, out_state: *mut *mut SptState) -> SptStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let h = build_hamiltonian(&HamiltonianParams::new(h1, h2, n).st()?).st()?;
        *slot = boxed(SptState(ground_state(&h).st()?.ground));
        Ok(())
    })
}

/// State from `2^n` amplitudes given as separate real and imaginary arrays.
///
/// # Safety
/// `re` and `im` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn spt_state_from_amplitudes(
    re: *const f64,
    im: *const f64,
    len: usize,
    out_state: *mut *mut SptState,
) -> SptStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        let amps = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        *slot = boxed(SptState(StateVector::from_amplitudes(amps).st()?));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spt_state_free(state: *mut SptState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_state_num_qubits(state: *const SptState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_qubits())
}

/// Copies the amplitudes out; `len` must equal `2^n`.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spt_state_amplitudes(
    state: *const SptState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SptStatus {
    guard(|| {
        let amps = deref(state, "state")?.0.amplitudes();
        if len != amps.len() {
            return Err(fail(SptStatus::SizeMismatch, format!("buffer holds {len}, state has {}", amps.len())));
        }
        let (re, im) = (slice_mut(re, len, "re")?, slice_mut(im, len, "im")?);
        for (k, a) in amps.iter().enumerate() {
            re[k] = a.re;
            im[k] = a.im;
        }
        Ok(())
    })
}

/// Direct string order parameter `⟨Z X…X Z⟩` on a pure state.
///
/// # Safety
/// `state` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_state_string_order(state: *const SptState, out_value: *mut f64) -> SptStatus {
    guard(|| {
        let s = deref(state, "state")?;
        *out(out_value, "out_value")? = string_order(&s.0).st()?;
        Ok(())
    })
}

/// Exact seven-qubit QCNN output `2⟨y⟩ − 1` on a pure state.
///
/// # Safety
/// `state` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_state_qcnn_output(state: *const SptState, out_value: *mut f64) -> SptStatus {
    guard(|| {
        let s = deref(state, "state")?;
        *out(out_value, "out_value")? = qcnn_output(&s.0, 0, 0).st()?.y_expect;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle and `out_density` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_density_from_state(state: *const SptState, out_density: *mut *mut SptDensity) -> SptStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let slot = out(out_density, "out_density")?;
        *slot = boxed(SptDensity(DensityMatrix::from_pure(&s.0).st()?));
        Ok(())
    })
}

/// # Safety
/// `rho` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spt_density_free(rho: *mut SptDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// # Safety
/// `rho` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_density_string_order(rho: *const SptDensity, out_value: *mut f64) -> SptStatus {
    guard(|| {
        let r = deref(rho, "rho")?;
        *out(out_value, "out_value")? = string_order(&r.0).st()?;
        Ok(())
    })
}

/// Exact (noiseless) QCNN output on a density matrix.
///
/// # Safety
/// `rho` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_density_qcnn_output(rho: *const SptDensity, out_value: *mut f64) -> SptStatus {
    guard(|| {
        let r = deref(rho, "rho")?;
        *out(out_value, "out_value")? = qcnn_output_density(&r.0, 0, 0).st()?.y_expect;
        Ok(())
    })
}

/// Built-in seven-qubit device with the tabulated coherence, readout and
/// gate parameters.
///
/// # Safety
/// `out_device` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_device_table_one(out_device: *mut *mut SptDevice) -> SptStatus {
    guard(|| {
        *out(out_device, "out_device")? = boxed(SptDevice(DeviceModel::table_one()));
        Ok(())
    })
}

/// Device without any noise.
///
/// # Safety
/// `out_device` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_device_noiseless(n: usize, out_device: *mut *mut SptDevice) -> SptStatus {
    guard(|| {
        *out(out_device, "out_device")? = boxed(SptDevice(DeviceModel::noiseless(n)));
        Ok(())
    })
}

/// Device from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out_device` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_device_load(path: *const c_char, out_device: *mut *mut SptDevice) -> SptStatus {
    guard(|| {
        let slot = out(out_device, "out_device")?;
        if path.is_null() {
            return Err(fail(SptStatus::NullPointer, "path is null"));
        }
        let p = CStr::from_ptr(path).to_str().map_err(|_| fail(SptStatus::InvalidArgument, "path is not UTF-8"))?;
        *slot = boxed(SptDevice(DeviceModel::load(Path::new(p)).st()?));
        Ok(())
    })
}

/// # Safety
/// `device` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spt_device_free(device: *mut SptDevice) {
    if !device.is_null() {
        drop(Box::from_raw(device));
    }
}

/// Optimizes the layered ansatz against the exact ground state at `(h1, h2)`.
/// A null `options` uses the defaults.
///
/// # Safety
/// `options` must be null or readable; `out_result` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_optimize(
    h1: f64,
    h2: f64,
    n: usize,
    options: *const SptVqeOptions,
    out_result: *mut *mut SptVqeResult,
) -> SptStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        let o = options.as_ref().copied().unwrap_or_else(|| spt_vqe_options_default());
        let cfg = VqeConfig {
            depth: o.depth,
            max_restarts: o.max_restarts,
            max_iters: o.max_iters,
            accept_fidelity: o.accept_fidelity,
            seed: o.seed,
            ..VqeConfig::default()
        };
        *slot = boxed(SptVqeResult(optimize(h1, h2, n, &cfg).st()?));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_result_free(result: *mut SptVqeResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Fidelity with the exact ground state; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_result_fidelity(result: *const SptVqeResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.fidelity)
}

/// Variational energy; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_result_energy(result: *const SptVqeResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.energy)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_result_accepted(result: *const SptVqeResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.accepted)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_result_num_angles(result: *const SptVqeResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.theta_opt.angles.len())
}

/// Copies the optimized angles; with `rewrite` the first layer is mapped
/// into `[−π/2, π/2]`. `len` must equal the angle count.
///
/// # Safety
/// `result` must be a live handle and `angles` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spt_vqe_result_angles(
    result: *const SptVqeResult,
    rewrite: bool,
    angles: *mut f64,
    len: usize,
) -> SptStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let p = if rewrite { rewrite_angles(&r.0.theta_opt) } else { r.0.theta_opt.clone() };
        if len != p.angles.len() {
            return Err(fail(SptStatus::SizeMismatch, format!("buffer holds {len}, ansatz has {}", p.angles.len())));
        }
        slice_mut(angles, len, "angles")?.copy_from_slice(&p.angles);
        Ok(())
    })
}

/// Noiseless state prepared by the ansatz with the given angles.
///
/// # Safety
/// `angles` must point to `len` readable doubles and `out_state` be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_ansatz_state(
    n: usize,
    depth: usize,
    angles: *const f64,
    len: usize,
    out_state: *mut *mut SptState,
) -> SptStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let p = AnsatzParams::new(n, depth, slice(angles, len, "angles")?.to_vec()).st()?;
        *slot = boxed(SptState(prepare_state(&p).st()?));
        Ok(())
    })
}

/// Runs the ansatz on `device` and returns the noisy density matrix.
/// Without `preselection` the register starts in the thermal product state.
///
/// # Safety
/// `device` must be a live handle, `angles` readable for `len` doubles and
/// `out_density` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_noisy_ansatz(
    device: *const SptDevice,
    n: usize,
    depth: usize,
    angles: *const f64,
    len: usize,
    preselection: bool,
    out_density: *mut *mut SptDensity,
) -> SptStatus {
    guard(|| {
        let d = deref(device, "device")?;
        let slot = out(out_density, "out_density")?;
        let p = AnsatzParams::new(n, depth, slice(angles, len, "angles")?.to_vec()).st()?;
        let b = Backend::new(d.0.clone(), true, preselection, 0, 0);
        *slot = boxed(SptDensity(b.prepare(&p).st()?));
        Ok(())
    })
}

/// QCNN output with the device's gate and readout noise; `shots == 0`
/// evaluates probabilities exactly.
///
/// # Safety
/// `device` and `rho` must be live handles and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_noisy_qcnn_output(
    device: *const SptDevice,
    rho: *const SptDensity,
    mitigate: bool,
    shots: u64,
    seed: u64,
    out_value: *mut f64,
) -> SptStatus {
    guard(|| {
        let (d, r) = (deref(device, "device")?, deref(rho, "rho")?);
        let b = Backend::new(d.0.clone(), mitigate, true, shots, seed);
        *out(out_value, "out_value")? = b.qcnn(&r.0).st()?;
        Ok(())
    })
}

/// Direct string order parameter measured through the device readout.
///
/// # Safety
/// `device` and `rho` must be live handles and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_noisy_string_order(
    device: *const SptDevice,
    rho: *const SptDensity,
    mitigate: bool,
    shots: u64,
    seed: u64,
    out_value: *mut f64,
) -> SptStatus {
    guard(|| {
        let (d, r) = (deref(device, "device")?, deref(rho, "rho")?);
        let b = Backend::new(d.0.clone(), mitigate, true, shots, seed);
        let obs = spt_qcnn::spinchain::string_order_observable(r.0.n_qubits()).st()?;
        *out(out_value, "out_value")? = b.expectation(&r.0, &obs).st()?;
        Ok(())
    })
}

/// Pauli expansion of the depth-`d` multiscale string order parameter.
///
/// # Safety
/// `out_msop` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spt_msop_expand(d: usize, out_msop: *mut *mut SptMsop) -> SptStatus {
    guard(|| {
        let slot = out(out_msop, "out_msop")?;
        *slot = boxed(SptMsop(msop_expand(d).st()?));
        Ok(())
    })
}

/// # Safety
/// `msop` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spt_msop_free(msop: *mut SptMsop) {
    if !msop.is_null() {
        drop(Box::from_raw(msop));
    }
}

/// # Safety
/// `msop` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_msop_num_terms(msop: *const SptMsop) -> usize {
    msop.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `msop` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spt_msop_num_qubits(msop: *const SptMsop) -> usize {
    msop.as_ref().map_or(0, |m| m.0.n)
}

/// Coefficient and Pauli string (e.g. `"X1 Z2"`, sign included) of term
/// `index`. The string is copied into `buf` as with
/// [`spt_last_error_message`]; its full length goes to `out_len`.
///
/// # Safety
/// `msop` must be a live handle, `buf` null or writable for `len` bytes,
/// `out_coefficient` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn spt_msop_term(
    msop: *const SptMsop,
    index: usize,
    out_coefficient: *mut f64,
    buf: *mut c_char,
    len: usize,
    out_len: *mut usize,
) -> SptStatus {
    guard(|| {
        let m = deref(msop, "msop")?;
        let t = m
            .0
            .terms
            .get(index)
            .ok_or_else(|| fail(SptStatus::OutOfRange, format!("term {index} of {}", m.0.len())))?;
        *out(out_coefficient, "out_coefficient")? = t.coefficient;
        *out(out_len, "out_len")? = copy_str(&t.pauli.to_string(), buf, len);
        Ok(())
    })
}
