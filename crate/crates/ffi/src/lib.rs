//! C ABI for the qrex library.
//!
//! Objects are exposed as opaque handles created by constructor functions
//! and released by the matching `*_free`. Every fallible call
//! returns a [`QrexStatus`]; the message of the most recent failure on the
//! calling thread is available from [`qrex_last_error`]. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`qrex_string_free`].

mod error;

use std::ffi::{c_char, CStr, CString};

use qrex::hamiltonians::{defected_ising_1d, HamiltonianSpec};
use qrex::harness::{parse_config_str, run_scenario, Format, Report, RunOptions, DEFAULT_MAX_DIM};
use qrex::lindblad::{detailed_balance_residual, theta, WeightFunction, WeightKind};
use qrex::replica::{build_replica_exchange_generator, ReplicaOptions, ReplicaSystem, SwapMode};
use qrex::spectral::spectral_gap;

pub use error::QrexStatus;
use error::{guard, last_error_ptr, lib_err, null_err};

/// Opaque Hamiltonian handle.
pub struct QrexHamiltonian(HamiltonianSpec);

/// Opaque handle to a single or replica-exchange generator with its Gibbs state.
pub struct QrexGenerator(ReplicaSystem);

/// Opaque scenario report handle.
pub struct QrexReport(Report);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrexWeight {
    Gaussian = 0,
    Metropolis = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrexSwapMode {
    /// System generator only.
    None = 0,
    /// Auxiliary copy of the A register with a local swap.
    LocalA = 1,
    /// Second full replica at `beta2` with a global swap.
    Global = 2,
}

/// Which generator of a handle a query refers to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrexTarget {
    System = 0,
    Joint = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrexFormat {
    Csv = 0,
    Json = 1,
}

type FfiResult = Result<(), (QrexStatus, String)>;

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (QrexStatus, String)> {
    if p.is_null() {
        return Err(null_err(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (QrexStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> FfiResult {
    if out.is_null() {
        return Err(null_err(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, (QrexStatus, String)> {
    p.as_ref().ok_or_else(|| null_err(name))
}

fn to_c_string(s: String) -> Result<*mut c_char, (QrexStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|_| (QrexStatus::InvalidArgument, "string contains NUL".into()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qrex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or NULL.
///
/// The pointer stays valid until the next qrex call on the same thread.
#[no_mangle]
pub extern "C" fn qrex_last_error() -> *const c_char {
    last_error_ptr()
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from a qrex out-parameter that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `θ(x) = ½[erfc((1+2x)/(2√2)) + e^{−x} erfc((1−2x)/(2√2))]`.
#[no_mangle]
pub extern "C" fn qrex_theta(x: f64) -> f64 {
    theta(x)
}

/// Parse a Hamiltonian from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_hamiltonian_from_json(json: *const c_char, out: *mut *mut QrexHamiltonian) -> QrexStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let spec = HamiltonianSpec::from_json_str(text).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QrexHamiltonian(spec))), "out")
    })
}

/// Defected Ising ring on `n ≥ 3` qubits with defect strength `j` on bond (0, 1) and A = {0, 1}.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_hamiltonian_defected_ising_1d(n: usize, j: f64, out: *mut *mut QrexHamiltonian) -> QrexStatus {
    guard(|| {
        let spec = defected_ising_1d(n, j).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QrexHamiltonian(spec))), "out")
    })
}

/// Copy of `h` with the defect bond set to strength `j`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_hamiltonian_with_defect(
    h: *const QrexHamiltonian,
    j: f64,
    out: *mut *mut QrexHamiltonian,
) -> QrexStatus {
    guard(|| {
        let spec = handle(h, "h")?.0.with_defect_strength(j).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QrexHamiltonian(spec))), "out")
    })
}

/// Number of qubits of `h`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_hamiltonian_num_qubits(h: *const QrexHamiltonian, out: *mut usize) -> QrexStatus {
    guard(|| write_out(out, handle(h, "h")?.0.n, "out"))
}

/// JSON description of `h`; release with `qrex_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_hamiltonian_to_json(h: *const QrexHamiltonian, out: *mut *mut c_char) -> QrexStatus {
    guard(|| {
        let s = handle(h, "h")?.0.to_json_value().to_string();
        write_out(out, to_c_string(s)?, "out")
    })
}

/// # Safety
/// `h` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrex_hamiltonian_free(h: *mut QrexHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Build the generator of `h` at inverse temperature `beta` with single-site Pauli couplings.
///
/// `beta2` is only read in global mode. Superoperators larger than
/// 4096 × 4096 are refused with `ResourceGuard`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_generator_build(
    h: *const QrexHamiltonian,
    beta: f64,
    weight: QrexWeight,
    mode: QrexSwapMode,
    beta2: f64,
    out: *mut *mut QrexGenerator,
) -> QrexStatus {
    guard(|| {
        let spec = &handle(h, "h")?.0;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err((QrexStatus::InvalidArgument, format!("beta must be finite and > 0, got {beta}")));
        }
        let kind = match weight {
            QrexWeight::Gaussian => WeightKind::Gaussian,
            QrexWeight::Metropolis => WeightKind::Metropolis,
        };
        let mode = match mode {
            QrexSwapMode::None => SwapMode::None,
            QrexSwapMode::LocalA => SwapMode::LocalOnA,
            QrexSwapMode::Global => SwapMode::Global { beta2 },
        };
        let d = spec.dim();
        let joint = match mode {
            SwapMode::None => d,
            SwapMode::LocalOnA => d << spec.partition.as_ref().map_or(0, |p| p.a.len()),
            SwapMode::Global { .. } => d * d,
        };
        if joint * joint > DEFAULT_MAX_DIM {
            return Err((
                QrexStatus::ResourceGuard,
                format!("superoperator dimension {} exceeds {DEFAULT_MAX_DIM}", joint * joint),
            ));
        }
        let w = WeightFunction { kind, beta };
        let rs = build_replica_exchange_generator(spec, beta, w, w, mode, ReplicaOptions::default()).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(QrexGenerator(rs))), "out")
    })
}

/// Hilbert-space dimension of the chosen generator.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_generator_dim(g: *const QrexGenerator, target: QrexTarget, out: *mut usize) -> QrexStatus {
    guard(|| {
        let rs = &handle(g, "g")?.0;
        let d = match target {
            QrexTarget::System => rs.system_sigma.dim(),
            QrexTarget::Joint => rs.sigma.dim(),
        };
        write_out(out, d, "out")
    })
}

/// KMS spectral gap of the chosen generator.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_generator_gap(g: *const QrexGenerator, target: QrexTarget, out: *mut f64) -> QrexStatus {
    guard(|| {
        let rs = &handle(g, "g")?.0;
        let rep = match target {
            QrexTarget::System => spectral_gap(&rs.system.heisenberg, &rs.system_sigma),
            QrexTarget::Joint => spectral_gap(&rs.generator.heisenberg, &rs.sigma),
        }
        .map_err(lib_err)?;
        write_out(out, rep.gap, "out")
    })
}

/// Detailed-balance residual of the chosen generator with respect to its Gibbs state.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_generator_detailed_balance(
    g: *const QrexGenerator,
    target: QrexTarget,
    out: *mut f64,
) -> QrexStatus {
    guard(|| {
        let rs = &handle(g, "g")?.0;
        let r = match target {
            QrexTarget::System => detailed_balance_residual(&rs.system.heisenberg, &rs.system_sigma),
            QrexTarget::Joint => detailed_balance_residual(&rs.generator.heisenberg, &rs.sigma),
        }
        .map_err(lib_err)?;
        write_out(out, r, "out")
    })
}

/// # Safety
/// `g` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrex_generator_free(g: *mut QrexGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Run an experiment configuration given as JSON text.
///
/// `parallel` is the worker count, or 0 for the default pool. When a
/// `verify` check fails the report is still written to `out` and the call
/// returns `InvariantFailure`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_run_config(config_json: *const c_char, parallel: usize, out: *mut *mut QrexReport) -> QrexStatus {
    guard(|| {
        let cfg = parse_config_str(read_str(config_json, "config_json")?).map_err(lib_err)?;
        let opts = RunOptions { parallel: (parallel > 0).then_some(parallel) };
        let report = run_scenario(&cfg, opts).map_err(lib_err)?;
        let passed = report.passed;
        write_out(out, Box::into_raw(Box::new(QrexReport(report))), "out")?;
        if passed {
            Ok(())
        } else {
            Err((QrexStatus::InvariantFailure, "one or more checks failed".into()))
        }
    })
}

/// Whether every check of the report passed.
///
/// # Safety
/// `r` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_report_passed(r: *const QrexReport, out: *mut bool) -> QrexStatus {
    guard(|| write_out(out, handle(r, "r")?.0.passed, "out"))
}

/// Number of records in the report.
///
/// # Safety
/// `r` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_report_len(r: *const QrexReport, out: *mut usize) -> QrexStatus {
    guard(|| write_out(out, handle(r, "r")?.0.records.len(), "out"))
}

/// Serialize the report; release the string with `qrex_string_free`.
///
/// # Safety
/// `r` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrex_report_encode(r: *const QrexReport, format: QrexFormat, out: *mut *mut c_char) -> QrexStatus {
    guard(|| {
        let fmt = match format {
            QrexFormat::Csv => Format::Csv,
            QrexFormat::Json => Format::Json,
        };
        let bytes = handle(r, "r")?.0.encode(fmt).map_err(lib_err)?;
        let s = String::from_utf8(bytes).map_err(|_| (QrexStatus::Numerical, "report is not UTF-8".into()))?;
        write_out(out, to_c_string(s)?, "out")
    })
}

/// # Safety
/// `r` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrex_report_free(r: *mut QrexReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
