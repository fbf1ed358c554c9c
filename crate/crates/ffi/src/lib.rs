//! C ABI for the entropy-gap library.
//!
//! Conventions:
//! - States are opaque handles (`EgState*`), created by the `eg_state_*`
//!   constructors and released with `eg_state_free`.
//! - Every fallible function returns an [`EgStatus`] code; on failure a
//!   thread-local message is readable via `eg_last_error_message` until the
//!   next failing call on the same thread.
//! - Strings returned through `char**` out-parameters are UTF-8,
//!   NUL-terminated, owned by the caller, and released with `eg_string_free`.
//! - A relative entropy of `+Infinity` (disjoint supports) is returned as the
//!   IEEE-754 positive infinity.
//!
//! The batch drivers are exposed JSON-in/JSON-out (`eg_run_suite_json`,
//! `eg_scan_json`, `eg_markov_report_json`) so bindings only need a JSON
//! codec, not the full type surface.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use entropy_gap::entropy::{self, ExtendedReal};
use entropy_gap::markov::{self, EnsembleKind};
use entropy_gap::report::{run_suite, RunConfig};
use entropy_gap::states::MultipartiteState;
use entropy_gap::Error;

/// Opaque handle to a multipartite quantum state.
pub struct EgState(MultipartiteState);

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgStatus {
    EgOk = 0,
    EgNullPointer = 1,
    EgInvalidArgument = 2,
    EgNotHermitian = 3,
    EgNotPsd = 4,
    EgConvergenceFailure = 5,
    EgDimensionMismatch = 6,
    EgSupportDeficient = 7,
    EgInvalidState = 8,
    EgIoError = 9,
    EgParseError = 10,
    EgInternalPanic = 11,
}

/// Random ensembles accessible through the ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgEnsemble {
    EgEnsembleHs = 0,
    EgEnsemblePure = 1,
    EgEnsembleMarkovClassicalC = 2,
}

impl From<EgEnsemble> for EnsembleKind {
    fn from(k: EgEnsemble) -> Self {
        match k {
            EgEnsemble::EgEnsembleHs => EnsembleKind::Hs,
            EgEnsemble::EgEnsemblePure => EnsembleKind::Pure,
            EgEnsemble::EgEnsembleMarkovClassicalC => EnsembleKind::MarkovClassicalC,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> EgStatus {
    match err {
        Error::NotHermitian { .. } => EgStatus::EgNotHermitian,
        Error::NotPsd { .. } => EgStatus::EgNotPsd,
        Error::ConvergenceFailure { .. } => EgStatus::EgConvergenceFailure,
        Error::DimensionMismatch(_) => EgStatus::EgDimensionMismatch,
        Error::SupportDeficient(_) => EgStatus::EgSupportDeficient,
        Error::InvalidState(_) => EgStatus::EgInvalidState,
        Error::InvalidAlpha(_) | Error::InvalidDistribution(_) | Error::InfeasibleShape { .. } => {
            EgStatus::EgInvalidArgument
        }
        Error::InvalidConfig(_) => EgStatus::EgInvalidArgument,
        Error::Io(_) => EgStatus::EgIoError,
        Error::Json(_) => EgStatus::EgParseError,
    }
}

fn fail(err: &Error) -> EgStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Run a closure, translating errors and panics into status codes.
fn guarded<F: FnOnce() -> Result<EgStatus, Error>>(f: F) -> EgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(err)) => fail(&err),
        Err(_) => {
            set_error("internal panic");
            EgStatus::EgInternalPanic
        }
    }
}

unsafe fn c_str_arg<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn out_string(text: String, out: *mut *mut c_char) -> Result<EgStatus, Error> {
    let c = CString::new(text.replace('\0', " ")).expect("NULs stripped");
    unsafe { *out = c.into_raw() };
    Ok(EgStatus::EgOk)
}

/// Message describing the most recent failure on this thread. The pointer is
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn eg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn eg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a `char**` out-parameter of this library
/// and not freed before.
#[no_mangle]
pub unsafe extern "C" fn eg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a state handle. NULL is ignored.
///
/// # Safety
/// `state` must have been created by an `eg_state_*` constructor and not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn eg_state_free(state: *mut EgState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Parse a state from the JSON state-file schema
/// `{"dims": [...], "labels": [...], "kind": "state"|"substate",
///   "matrix": [[re, im], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eg_state_from_json(
    json: *const c_char,
    out: *mut *mut EgState,
) -> EgStatus {
    if out.is_null() {
        set_error("out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    let Some(text) = c_str_arg(json) else {
        set_error("json pointer is NULL or not UTF-8");
        return EgStatus::EgNullPointer;
    };
    guarded(|| {
        let state = MultipartiteState::from_json_str(text)?;
        *out = Box::into_raw(Box::new(EgState(state)));
        Ok(EgStatus::EgOk)
    })
}

/// Draw a state from a seeded ensemble over the given subsystem dimensions.
///
/// # Safety
/// `dims` must point to `n_dims` readable entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_state_random(
    kind: EgEnsemble,
    dims: *const usize,
    n_dims: usize,
    seed: u64,
    out: *mut *mut EgState,
) -> EgStatus {
    if dims.is_null() || out.is_null() {
        set_error("dims or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    let dims = std::slice::from_raw_parts(dims, n_dims).to_vec();
    guarded(|| {
        let state = EnsembleKind::from(kind).sample(&dims, seed)?;
        *out = Box::into_raw(Box::new(EgState(state)));
        Ok(EgStatus::EgOk)
    })
}

/// Serialize a state back to the JSON state-file schema.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_state_to_json(
    state: *const EgState,
    out: *mut *mut c_char,
) -> EgStatus {
    if state.is_null() || out.is_null() {
        set_error("state or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    guarded(|| out_string((*state).0.to_json_string(), out))
}

/// Total Hilbert-space dimension of the state; 0 for a NULL handle.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn eg_state_dim(state: *const EgState) -> usize {
    if state.is_null() {
        0
    } else {
        (*state).0.dim()
    }
}

/// von Neumann entropy in nats.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_von_neumann_entropy(
    state: *const EgState,
    out: *mut f64,
) -> EgStatus {
    if state.is_null() || out.is_null() {
        set_error("state or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    guarded(|| {
        *out = entropy::von_neumann_entropy(&(*state).0)?;
        Ok(EgStatus::EgOk)
    })
}

/// Umegaki relative entropy `S(rho||sigma)` in nats; positive infinity when
/// the support condition fails.
///
/// # Safety
/// Both handles must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_relative_entropy(
    rho: *const EgState,
    sigma: *const EgState,
    out: *mut f64,
) -> EgStatus {
    if rho.is_null() || sigma.is_null() || out.is_null() {
        set_error("state or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    guarded(|| {
        let v = entropy::relative_entropy(&(*rho).0, &(*sigma).0)?;
        *out = match v {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::Infinity => f64::INFINITY,
        };
        Ok(EgStatus::EgOk)
    })
}

/// Conditional mutual information `I(A:B|C)` of a tripartite state, in nats.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_cmi(state: *const EgState, out: *mut f64) -> EgStatus {
    if state.is_null() || out.is_null() {
        set_error("state or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    guarded(|| {
        *out = entropy::cmi(&(*state).0)?;
        Ok(EgStatus::EgOk)
    })
}

/// Trace of the Markov operator `exp(log rho_AC + log rho_BC - log rho_C)`.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_markov_operator_trace(
    state: *const EgState,
    out: *mut f64,
) -> EgStatus {
    if state.is_null() || out.is_null() {
        set_error("state or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    guarded(|| {
        *out = markov::trace_of_markov_operator(&(*state).0)?;
        Ok(EgStatus::EgOk)
    })
}

/// Full Markov trace-criterion diagnostics as a JSON document.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_markov_report_json(
    state: *const EgState,
    tol: f64,
    out: *mut *mut c_char,
) -> EgStatus {
    if state.is_null() || out.is_null() {
        set_error("state or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    guarded(|| {
        let report = markov::check_markov_trace_theorem(&(*state).0, tol)?;
        out_string(serde_json::to_string_pretty(&report)?, out)
    })
}

/// Run a verifier suite from a JSON `RunConfig`
/// (`{"suite": "super-ssa", "dims": [2,2,2], "n_samples": 100, ...}`) and
/// return the full report as JSON. `all_pass`, when non-NULL, receives
/// whether every sample passed.
///
/// # Safety
/// `config_json` must be a NUL-terminated UTF-8 string; `out` must be valid;
/// `all_pass` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn eg_run_suite_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
    all_pass: *mut bool,
) -> EgStatus {
    if out.is_null() {
        set_error("out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    let Some(text) = c_str_arg(config_json) else {
        set_error("config pointer is NULL or not UTF-8");
        return EgStatus::EgNullPointer;
    };
    guarded(|| {
        let config: RunConfig = serde_json::from_str(text)?;
        let report = run_suite(&config)?;
        if !all_pass.is_null() {
            *all_pass = report.all_pass();
        }
        out_string(report.to_json_string(), out)
    })
}

/// Scan the Markov-operator trace statistic over a seeded ensemble and
/// return the summary as JSON.
///
/// # Safety
/// `dims` must point to `n_dims` readable entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_scan_json(
    kind: EgEnsemble,
    dims: *const usize,
    n_dims: usize,
    n_samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> EgStatus {
    if dims.is_null() || out.is_null() {
        set_error("dims or out pointer is NULL");
        return EgStatus::EgNullPointer;
    }
    let dims = std::slice::from_raw_parts(dims, n_dims).to_vec();
    guarded(|| {
        let summary = markov::scan_trace_statistic(&dims, n_samples, seed, kind.into())?;
        out_string(serde_json::to_string_pretty(&summary)?, out)
    })
}
