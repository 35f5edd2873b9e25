//! C ABI for the tempsec library.
//!
//! Instances are opaque handles created from JSON and released with
//! [`tempsec_instance_free`]. Every function returns a [`TsStatus`]; on
//! failure [`tempsec_last_error`] describes the problem. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tempsec::config::parse_config;
use tempsec::experiments::{theoretical_bound, BoundFlag, Experiment};
use tempsec::online::{epsilon_default, Variant};
use tempsec::oracles::opt_offline_exact;
use tempsec::{ArrivalRealization, Error, Instance};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    Config = 4,
    Solver = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsVariant {
    Cardinality = 0,
    Packing = 1,
    Lengths = 2,
}

impl From<TsVariant> for Variant {
    fn from(v: TsVariant) -> Self {
        match v {
            TsVariant::Cardinality => Variant::Cardinality,
            TsVariant::Packing => Variant::Packing,
            TsVariant::Lengths => Variant::Lengths,
        }
    }
}

/// Bit set in [`TsBound::flags`] when the bound is negative.
pub const TS_BOUND_VACUOUS: u32 = 1;
/// Bit set when a lower-order term is omitted.
pub const TS_BOUND_ASYMPTOTIC: u32 = 2;
/// Bit set when a hidden constant is taken as one.
pub const TS_BOUND_CONSTANT_FREE: u32 = 4;

/// Opaque instance handle.
pub struct TsInstance {
    inner: Instance,
}

/// Aggregate of a Monte Carlo run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TsSummary {
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_alg: f64,
    pub mean_opt: f64,
    pub bound: f64,
    pub trials: u64,
    pub invariant_failures: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TsBound {
    pub value: f64,
    /// NaN unless the guarantee has a separate leading term.
    pub leading: f64,
    /// NaN unless the guarantee has a separate error term.
    pub epsilon_term: f64,
    pub flags: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TsEpsilon {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::InvalidArgument(_) | Error::OutOfOrder { .. } => TsStatus::InvalidArgument,
        Error::InvalidInstance(_) | Error::InvalidConstraints(_) => TsStatus::InvalidInstance,
        Error::Config(_) | Error::Json(_) => TsStatus::Config,
        Error::Solver(_) => TsStatus::Solver,
        Error::Io(_) => TsStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), TsStatusError>) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TsStatus::Ok
        }
        Ok(Err(TsStatusError(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside tempsec");
            TsStatus::Panic
        }
    }
}

struct TsStatusError(TsStatus, String);

impl From<Error> for TsStatusError {
    fn from(e: Error) -> Self {
        TsStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> TsStatusError {
    TsStatusError(TsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, TsStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| TsStatusError(TsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Parses an instance from JSON and stores a new handle in `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tempsec_instance_from_json(json: *const c_char, out: *mut *mut TsInstance) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Instance::from_json_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(TsInstance { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `instance` must come from [`tempsec_instance_from_json`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn tempsec_instance_free(instance: *mut TsInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of items; 0 for null.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tempsec_instance_len(instance: *const TsInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.len())
}

/// Runs the experiment described by `config_json` (the configuration file
/// schema; its `instance` section is ignored) on `instance`.
///
/// # Safety
/// Pointers must be valid; `config_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tempsec_run_trials(
    instance: *const TsInstance,
    config_json: *const c_char,
    threads: u32,
    out: *mut TsSummary,
) -> TsStatus {
    guard(|| {
        let inst = instance.as_ref().ok_or_else(|| null("instance"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let config = parse_config(str_arg(config_json, "config_json")?, "config_json", &[], None)?;
        let exp = Experiment::new(config, inst.inner.clone())?;
        let agg = exp.run(threads.max(1) as usize)?;
        let summary = exp.summary(&agg)?;
        *out = TsSummary {
            ratio: summary.ratio,
            ci_low: summary.ci_low,
            ci_high: summary.ci_high,
            mean_alg: summary.mean_alg,
            mean_opt: summary.mean_opt,
            bound: summary.bound,
            trials: summary.trials as u64,
            invariant_failures: summary.invariant_failures as u64,
        };
        Ok(())
    })
}

/// Exact offline optimum for arrival times `times[0..n]` (indexed by item).
///
/// # Safety
/// `times` must point to `n` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tempsec_opt_offline_exact(
    instance: *const TsInstance,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        let inst = instance.as_ref().ok_or_else(|| null("instance"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let times = if n == 0 {
            Vec::new()
        } else if times.is_null() {
            return Err(null("times"));
        } else {
            std::slice::from_raw_parts(times, n).to_vec()
        };
        let arrivals = ArrivalRealization::from_times(times)?;
        *out = opt_offline_exact(&inst.inner, &arrivals)?.value;
        Ok(())
    })
}

/// Closed-form guarantee for a variant.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tempsec_theoretical_bound(
    variant: TsVariant,
    gamma: f64,
    capacity: f64,
    d: usize,
    out: *mut TsBound,
) -> TsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let b = theoretical_bound(variant.into(), gamma, capacity, d)?;
        let flags = b.flags.iter().fold(0, |acc, f| {
            acc | match f {
                BoundFlag::Vacuous => TS_BOUND_VACUOUS,
                BoundFlag::Asymptotic => TS_BOUND_ASYMPTOTIC,
                BoundFlag::ConstantFree => TS_BOUND_CONSTANT_FREE,
            }
        });
        *out = TsBound {
            value: b.value,
            leading: b.leading.unwrap_or(f64::NAN),
            epsilon_term: b.epsilon_term.unwrap_or(f64::NAN),
            flags,
        };
        Ok(())
    })
}

/// Default packing shrink factor for sparsity `d` and capacity ratio `b`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tempsec_epsilon_default(d: usize, b: f64, out: *mut TsEpsilon) -> TsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let e = epsilon_default(d, b)?;
        *out = TsEpsilon {
            value: e.value,
            raw: e.raw,
            clamped: e.clamped,
        };
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tempsec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn tempsec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
