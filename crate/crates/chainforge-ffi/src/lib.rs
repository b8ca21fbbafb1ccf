//! C ABI over the chainforge kernel.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `_free` function. Every call returns a [`CfStatus`], and on
//! failure [`cf_last_error`] describes what went wrong on the calling thread.
//! Strings handed out by the library are released with [`cf_string_free`].

use chainforge::chain::ZeroChain;
use chainforge::error::Error;
use chainforge::flat::{flat_norm, FlatMode};
use chainforge::geom::Point;
use chainforge::harness::presets::{run_preset, Tolerances};
use chainforge::harness::{run_pipeline, ExperimentConfig};
use chainforge::region::Region;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes. The assertion and config codes match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullArgument = 1,
    AssertionFailed = 2,
    ConfigError = 3,
    KernelError = 4,
    Panic = 5,
}

/// Flat-norm variant: absolute (an unmatched point costs its unit mass) or
/// relative (points may also leave through the boundary).
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfFlatMode {
    Absolute = 0,
    Relative = 1,
}

/// A mod-2 0-chain in the plane or in space.
pub struct CfZeroChain {
    chain: ZeroChain,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CfStatus, msg: &str) -> CfStatus {
    set_error(msg);
    status
}

fn kernel(e: Error) -> CfStatus {
    let status = if e.is_config() { CfStatus::ConfigError } else { CfStatus::KernelError };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> CfStatus) -> CfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CfStatus::Panic, "panic inside chainforge"))
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CfStatus> {
    if s.is_null() {
        return Err(fail(CfStatus::NullArgument, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(CfStatus::ConfigError, "string is not UTF-8"))
}

/// # Safety
/// `out` must be null or writable.
unsafe fn hand_out(text: String, out: *mut *mut c_char) -> CfStatus {
    if out.is_null() {
        return fail(CfStatus::NullArgument, "null output pointer");
    }
    *out = CString::new(text).expect("JSON has no nul bytes").into_raw();
    CfStatus::Ok
}

/// Message of the last failed call on this thread. Valid until the next call
/// that fails on the same thread; never null.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Empty chain in dimension 2 or 3. Returns null for other dimensions.
#[no_mangle]
pub extern "C" fn cf_zero_chain_new(dim: usize) -> *mut CfZeroChain {
    if dim != 2 && dim != 3 {
        set_error("dimension must be 2 or 3");
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(CfZeroChain { chain: ZeroChain::empty(dim) }))
}

/// Add one point mod 2: adding a point already present removes it.
///
/// # Safety
/// `chain` must come from [`cf_zero_chain_new`]; `coords` must point to `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_zero_chain_add_point(chain: *mut CfZeroChain, coords: *const f64, len: usize) -> CfStatus {
    if chain.is_null() || coords.is_null() {
        return fail(CfStatus::NullArgument, "null chain or coordinates");
    }
    let chain = &mut *chain;
    let dim = chain.chain.dim();
    if len != dim {
        return fail(CfStatus::ConfigError, &format!("expected {dim} coordinates, got {len}"));
    }
    let c = std::slice::from_raw_parts(coords, len);
    match Point::from_slice(c) {
        Some(p) if p.is_finite() => {
            chain.chain = chain.chain.add(&ZeroChain::new(dim, vec![p]));
            CfStatus::Ok
        }
        _ => fail(CfStatus::ConfigError, "non-finite coordinate"),
    }
}

/// Number of points of the chain; 0 for a null handle.
///
/// # Safety
/// `chain` must be null or come from [`cf_zero_chain_new`].
#[no_mangle]
pub unsafe extern "C" fn cf_zero_chain_mass(chain: *const CfZeroChain) -> usize {
    chain.as_ref().map_or(0, |c| c.chain.mass())
}

/// Flat norm of the chain in the closed unit disk (ball in 3D).
///
/// # Safety
/// `chain` must come from [`cf_zero_chain_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_zero_chain_flat_norm(chain: *const CfZeroChain, mode: CfFlatMode, out: *mut f64) -> CfStatus {
    if chain.is_null() || out.is_null() {
        return fail(CfStatus::NullArgument, "null chain or output");
    }
    let chain = &*chain;
    guard(|| {
        let mode = match mode {
            CfFlatMode::Absolute => FlatMode::Absolute,
            CfFlatMode::Relative => FlatMode::Relative,
        };
        match flat_norm(&chain.chain, &Region::unit_disk(), mode) {
            Ok(w) => {
                *out = w.value;
                CfStatus::Ok
            }
            Err(e) => kernel(e),
        }
    })
}

/// # Safety
/// `chain` must be null or come from [`cf_zero_chain_new`], and is not used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn cf_zero_chain_free(chain: *mut CfZeroChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Run an experiment config (the CLI's JSON, with its `pipeline` field) and
/// hand out the summary JSON. Returns [`CfStatus::AssertionFailed`] with the
/// summary still written when a check fails.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `summary_out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cf_run_pipeline(config_json: *const c_char, seed: u64, inject_fault: bool, summary_out: *mut *mut c_char) -> CfStatus {
    let text = match read_str(config_json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guard(|| {
        let report = match ExperimentConfig::from_json(text).and_then(|cfg| run_pipeline(&cfg, seed, inject_fault)) {
            Ok(r) => r,
            Err(e) => return kernel(e),
        };
        let json = serde_json::to_string(&report).expect("report serializes");
        match hand_out(json, summary_out) {
            CfStatus::Ok if !report.passed => fail(CfStatus::AssertionFailed, "pipeline assertions failed"),
            s => s,
        }
    })
}

/// Run one acceptance preset by name or number and hand out its outcome JSON.
///
/// # Safety
/// `name` must be a NUL-terminated string; `outcome_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_run_preset(name: *const c_char, seed: u64, outcome_out: *mut *mut c_char) -> CfStatus {
    let name = match read_str(name) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guard(|| {
        let o = match run_preset(name, seed, &Tolerances::default()) {
            Ok(o) => o,
            Err(e) => return kernel(e),
        };
        let json = serde_json::to_string(&o).expect("outcome serializes");
        match hand_out(json, outcome_out) {
            CfStatus::Ok if !o.passed => fail(CfStatus::AssertionFailed, &o.summary),
            s => s,
        }
    })
}

/// # Safety
/// `s` must be null or a string handed out by this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_handle_round_trip() {
        unsafe {
            let h = cf_zero_chain_new(2);
            assert!(!h.is_null());
            let a = [0.8, 0.0];
            let b = [-0.8, 0.0];
            assert_eq!(cf_zero_chain_add_point(h, a.as_ptr(), 2), CfStatus::Ok);
            assert_eq!(cf_zero_chain_add_point(h, b.as_ptr(), 2), CfStatus::Ok);
            assert_eq!(cf_zero_chain_mass(h), 2);
            let mut v = f64::NAN;
            assert_eq!(cf_zero_chain_flat_norm(h, CfFlatMode::Absolute, &mut v), CfStatus::Ok);
            assert!((v - 1.6).abs() < 1e-12, "{v}");
            // Each point is 0.2 from the circle.
            assert_eq!(cf_zero_chain_flat_norm(h, CfFlatMode::Relative, &mut v), CfStatus::Ok);
            assert!((v - 0.4).abs() < 1e-12, "{v}");
            assert_eq!(cf_zero_chain_add_point(h, a.as_ptr(), 2), CfStatus::Ok);
            assert_eq!(cf_zero_chain_mass(h), 1);
            cf_zero_chain_free(h);
        }
    }

    #[test]
    fn bad_arguments_report_codes() {
        assert!(cf_zero_chain_new(4).is_null());
        unsafe {
            let h = cf_zero_chain_new(3);
            let a = [0.1, 0.2];
            assert_eq!(cf_zero_chain_add_point(h, a.as_ptr(), 2), CfStatus::ConfigError);
            let msg = CStr::from_ptr(cf_last_error()).to_str().unwrap();
            assert!(msg.contains("expected 3"), "{msg}");
            assert_eq!(cf_zero_chain_add_point(ptr::null_mut(), a.as_ptr(), 2), CfStatus::NullArgument);
            let mut v = 0.0;
            assert_eq!(cf_zero_chain_flat_norm(ptr::null(), CfFlatMode::Relative, &mut v), CfStatus::NullArgument);
            cf_zero_chain_free(h);
        }
    }

    #[test]
    fn pipeline_status_follows_checks() {
        let cfg = CString::new(r#"{"pipeline":"flatnorm","generator":{"points":5},"replicates":3}"#).unwrap();
        let mut out = ptr::null_mut();
        unsafe {
            assert_eq!(cf_run_pipeline(cfg.as_ptr(), 1, false, &mut out), CfStatus::Ok);
            let s = CStr::from_ptr(out).to_str().unwrap().to_owned();
            assert!(s.contains("\"passed\":true"), "{s}");
            cf_string_free(out);
            assert_eq!(cf_run_pipeline(cfg.as_ptr(), 1, true, &mut out), CfStatus::AssertionFailed);
            cf_string_free(out);
            let bad = CString::new("{\"pipeline\":\"nope\"}").unwrap();
            assert_eq!(cf_run_pipeline(bad.as_ptr(), 1, false, &mut out), CfStatus::ConfigError);
        }
    }
}
