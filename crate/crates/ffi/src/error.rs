use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qrex::Error;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    ResourceGuard = 4,
    Numerical = 5,
    InvariantFailure = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

pub(crate) fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

pub(crate) fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

pub(crate) fn last_error_ptr() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

pub(crate) fn status_of(e: &Error) -> QrexStatus {
    match e {
        Error::Config(_) => QrexStatus::Config,
        Error::ResourceGuard(_) => QrexStatus::ResourceGuard,
        Error::InvalidArgument(_) | Error::InvalidHamiltonian(_) | Error::DimensionMismatch(_) | Error::CutFailure(_) => {
            QrexStatus::InvalidArgument
        }
        _ => QrexStatus::Numerical,
    }
}

/// Runs `f`, recording errors and panics in the thread-local slot.
pub(crate) fn guard(f: impl FnOnce() -> Result<(), (QrexStatus, String)>) -> QrexStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrexStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            QrexStatus::Panic
        }
    }
}

pub(crate) fn lib_err(e: Error) -> (QrexStatus, String) {
    (status_of(&e), e.to_string())
}

pub(crate) fn null_err(name: &str) -> (QrexStatus, String) {
    (QrexStatus::NullPointer, format!("{name} is null"))
}
