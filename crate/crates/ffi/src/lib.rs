//! C ABI over `qso-lab`.
//!
//! Groups and operators are opaque handles created by `*_new`/`*_parse` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`QsoStatus`]; the message for the last failure on the calling thread is
//! available from [`qso_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use qso_lab::dynamics::{envelope_f, iterate, Verdict};
use qso_lab::group::{closure_of_indices, GroupSpec};
use qso_lab::operator::build_operator;
use qso_lab::simplex::{haar_center, sample_interior, SimplexPoint};
use qso_lab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsoStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Invalid = 3,
    Dimension = 4,
    Bound = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsoVerdict {
    ConvergedToCenter = 0,
    CycleDetected = 1,
    BudgetExhausted = 2,
}

/// Outcome of [`qso_iterate`]. `preperiod`/`period` are 0 unless a cycle was found.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QsoTrajectorySummary {
    pub steps: usize,
    pub verdict: QsoVerdict,
    pub preperiod: usize,
    pub period: usize,
    pub initial_sup_norm: f64,
    pub final_sup_norm: f64,
    pub final_center_distance: f64,
    pub max_sup_norm_increase: f64,
}

/// Opaque finite Abelian group.
pub struct QsoGroup {
    spec: GroupSpec,
}

/// Opaque group-induced operator.
pub struct QsoOperator {
    op: qso_lab::QsoOperator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> QsoStatus {
    match e {
        Error::MalformedGroup(_) | Error::InvalidFactor(_) => QsoStatus::Parse,
        Error::DimensionMismatch { .. } => QsoStatus::Dimension,
        Error::OrderBound { .. } | Error::DenseStorageBound { .. } => QsoStatus::Bound,
        _ => QsoStatus::Invalid,
    }
}

fn fail(e: Error) -> QsoStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> QsoStatus {
    set_error(&format!("null pointer: {what}"));
    QsoStatus::NullPointer
}

fn guard<F: FnOnce() -> QsoStatus>(f: F) -> QsoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            QsoStatus::Panic
        }
    }
}

unsafe fn slice_in<'a, T>(data: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(data, len))
    }
}

unsafe fn write_out(out: *mut f64, out_len: usize, values: &[f64]) -> QsoStatus {
    if out.is_null() {
        return null("out");
    }
    if out_len != values.len() {
        return fail(Error::DimensionMismatch {
            expected: values.len(),
            found: out_len,
        });
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    QsoStatus::Ok
}

/// Message for the last failed call on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qso_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a descriptor such as `"Z4xZ2"`.
///
/// # Safety
/// `descriptor` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qso_group_parse(descriptor: *const c_char, out: *mut *mut QsoGroup) -> QsoStatus {
    guard(|| {
        if descriptor.is_null() {
            return null("descriptor");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(text) = CStr::from_ptr(descriptor).to_str() else {
            set_error("descriptor is not UTF-8");
            return QsoStatus::Parse;
        };
        match qso_lab::parse_group_spec(text) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(QsoGroup { spec }));
                QsoStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `|G|`, or 0 for a null handle.
///
/// # Safety
/// `group` must be null or a live handle from [`qso_group_parse`].
#[no_mangle]
pub unsafe extern "C" fn qso_group_order(group: *const QsoGroup) -> usize {
    group.as_ref().map_or(0, |g| g.spec.order())
}

/// # Safety
/// `group` must be null or a handle from [`qso_group_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qso_group_free(group: *mut QsoGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Builds the operator for the subgroup generated by `generators` (flat
/// indices) and the measure `mu` (`|G|` weights, or NULL for uniform).
///
/// # Safety
/// `group` must be a live handle; `generators` must hold `n_generators`
/// values (may be NULL when zero); `mu` must be NULL or hold `mu_len` values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qso_operator_new(
    group: *const QsoGroup,
    generators: *const usize,
    n_generators: usize,
    mu: *const f64,
    mu_len: usize,
    out: *mut *mut QsoOperator,
) -> QsoStatus {
    guard(|| {
        let Some(group) = group.as_ref() else {
            return null("group");
        };
        if out.is_null() {
            return null("out");
        }
        let Some(gens) = slice_in(generators, n_generators) else {
            return null("generators");
        };
        let spec = &group.spec;
        let h = match closure_of_indices(spec, gens) {
            Ok(h) => h,
            Err(e) => return fail(e),
        };
        let measure = if mu.is_null() {
            haar_center(spec)
        } else {
            match SimplexPoint::on_group(spec, slice::from_raw_parts(mu, mu_len)) {
                Ok(m) => m,
                Err(e) => return fail(e),
            }
        };
        match build_operator(spec, &h, &measure) {
            Ok(op) => {
                *out = Box::into_raw(Box::new(QsoOperator { op }));
                QsoStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `|G|` of the operator's group, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qso_operator_order(op: *const QsoOperator) -> usize {
    op.as_ref().map_or(0, |o| o.op.group().order())
}

/// Writes `V(x)` into `out`. Both buffers hold `len = |G|` values.
///
/// # Safety
/// `op` must be a live handle; `x` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qso_operator_apply(
    op: *const QsoOperator,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QsoStatus {
    guard(|| {
        let Some(op) = op.as_ref() else {
            return null("op");
        };
        let Some(raw) = slice_in(x, len) else {
            return null("x");
        };
        let result = SimplexPoint::on_group(op.op.group(), raw).and_then(|x| op.op.apply(&x));
        match result {
            Ok(y) => write_out(out, len, y.weights()),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `op` must be null or a handle from [`qso_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qso_operator_free(op: *mut QsoOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Iterates from `x0` until within `tol` of the center, a cycle, or
/// `max_steps`. `final_state` may be NULL; otherwise it receives `len` values.
///
/// # Safety
/// `op` must be a live handle; `x0` must hold `len` values; `summary` must
/// be writable; `final_state` must be NULL or hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qso_iterate(
    op: *const QsoOperator,
    x0: *const f64,
    len: usize,
    max_steps: usize,
    tol: f64,
    summary: *mut QsoTrajectorySummary,
    final_state: *mut f64,
) -> QsoStatus {
    guard(|| {
        let Some(op) = op.as_ref() else {
            return null("op");
        };
        let Some(raw) = slice_in(x0, len) else {
            return null("x0");
        };
        if summary.is_null() {
            return null("summary");
        }
        let report = match SimplexPoint::on_group(op.op.group(), raw).and_then(|x| iterate(&op.op, &x, max_steps, tol)) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let verdict = match report.verdict {
            Verdict::ConvergedToCenter => QsoVerdict::ConvergedToCenter,
            Verdict::CycleDetected => QsoVerdict::CycleDetected,
            Verdict::BudgetExhausted => QsoVerdict::BudgetExhausted,
        };
        let (preperiod, period) = report.cycle.map_or((0, 0), |c| (c.preperiod, c.period));
        *summary = QsoTrajectorySummary {
            steps: report.steps,
            verdict,
            preperiod,
            period,
            initial_sup_norm: report.sup_norm_series[0],
            final_sup_norm: *report.sup_norm_series.last().expect("series holds x0"),
            final_center_distance: report.final_center_distance(),
            max_sup_norm_increase: if report.steps > 0 { report.max_sup_norm_increase() } else { 0.0 },
        };
        if final_state.is_null() {
            QsoStatus::Ok
        } else {
            write_out(final_state, len, report.final_state.weights())
        }
    })
}

/// The envelope `f(p)` for `p` in `(0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qso_envelope_f(p: f64, out: *mut f64) -> QsoStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match envelope_f(p) {
            Ok(v) => {
                *out = v;
                QsoStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Seeded uniform sample from the open simplex on `group`.
///
/// # Safety
/// `group` must be a live handle; `out` must hold `len = |G|` values.
#[no_mangle]
pub unsafe extern "C" fn qso_sample_interior(
    group: *const QsoGroup,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> QsoStatus {
    guard(|| {
        let Some(group) = group.as_ref() else {
            return null("group");
        };
        write_out(out, len, sample_interior(&group.spec, seed).weights())
    })
}
