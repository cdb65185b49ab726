//! C ABI over the stratification pipeline. All entry points are
//! panic-safe: mathematical assertion failures surface as status codes, and
//! every returned object is an opaque handle freed by its matching
//! destructor.

use qplane::atlas::{
    check_conductor, parse_point, plane_point_from_center, quiver_dot, sweep, to_json,
    Algebra, AtlasError, PointSpec, StratumReport, SweepReport,
};
use qplane::field::CycScalar;
use qplane::heis::{verify_heis_identities, HeisReport};
use qplane::ncalg::Chart;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result discipline of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    /// success
    QpOk = 0,
    /// a pointer or encoded argument was unusable
    QpInvalidArgument = 1,
    /// a mathematical check rejected the input
    QpMathError = 2,
    /// an internal invariant failed
    QpInternal = 3,
}

enum ReportBody {
    Stratum(StratumReport),
    Sweep(SweepReport),
    Heis(Vec<HeisReport>),
}

/// Opaque result of a stratification, sweep, or identity check.
pub struct QpReport {
    body: ReportBody,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let sanitized: Vec<u8> = msg.bytes().filter(|b| *b != 0).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn status_of(e: &AtlasError) -> QpStatus {
    match e {
        AtlasError::Conductor(_) | AtlasError::Point(_) => QpStatus::QpInvalidArgument,
        _ => QpStatus::QpMathError,
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or NULL.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, QpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(QpStatus::QpInvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        QpStatus::QpInvalidArgument
    })
}

fn deliver(out: *mut *mut QpReport, body: ReportBody) -> QpStatus {
    let handle = Box::new(QpReport { body });
    unsafe { *out = Box::into_raw(handle) };
    clear_error();
    QpStatus::QpOk
}

fn guarded(out: *mut *mut QpReport, f: impl FnOnce() -> Result<ReportBody, (QpStatus, String)>) -> QpStatus {
    if out.is_null() {
        set_error("null output pointer");
        return QpStatus::QpInvalidArgument;
    }
    unsafe { *out = ptr::null_mut() };
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(body)) => deliver(out, body),
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in native code".to_string());
            set_error(&msg);
            QpStatus::QpInternal
        }
    }
}

fn stratify_body(n: u32, spec: &PointSpec) -> Result<ReportBody, (QpStatus, String)> {
    qplane::atlas::stratify(n, spec, None)
        .map(ReportBody::Stratum)
        .map_err(|e| (status_of(&e), e.to_string()))
}

/// Stratify a point of the quantum plane given by central coordinates
/// "u,v,w,g" (cyclotomic polynomial strings in z). A monomial witness is
/// searched first.
///
/// # Safety
/// `point` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a `QpReport*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_plane_stratify(
    n: u32,
    point: *const c_char,
    out: *mut *mut QpReport,
) -> QpStatus {
    let text = match read_str(point) {
        Ok(s) => s.to_owned(),
        Err(status) => return status,
    };
    guarded(out, move || {
        check_conductor(n).map_err(|e| (status_of(&e), e.to_string()))?;
        let coords = parse_point(n, &text, 4).map_err(|e| (status_of(&e), e.to_string()))?;
        let coords: [CycScalar; 4] =
            [coords[0].clone(), coords[1].clone(), coords[2].clone(), coords[3].clone()];
        let spec =
            plane_point_from_center(n, &coords).map_err(|e| (status_of(&e), e.to_string()))?;
        stratify_body(n, &spec)
    })
}

/// Stratify a point of a blow-up algebra. `ideal` is "xz" or "xyz"; `point`
/// holds the three family parameters; `twist` is the extra rho exponent of
/// the z-image (origin blow-up only).
///
/// # Safety
/// `ideal` and `point` must be valid NUL-terminated strings; `out` must be a
/// valid pointer to a `QpReport*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_blowup_stratify(
    n: u32,
    ideal: *const c_char,
    point: *const c_char,
    twist: i64,
    out: *mut *mut QpReport,
) -> QpStatus {
    let ideal = match read_str(ideal) {
        Ok(s) => s.to_owned(),
        Err(status) => return status,
    };
    let text = match read_str(point) {
        Ok(s) => s.to_owned(),
        Err(status) => return status,
    };
    guarded(out, move || {
        check_conductor(n).map_err(|e| (status_of(&e), e.to_string()))?;
        let coords = parse_point(n, &text, 3).map_err(|e| (status_of(&e), e.to_string()))?;
        let spec = match ideal.as_str() {
            "xz" => PointSpec::LineBlowup {
                a: coords[0].clone(),
                b: coords[1].clone(),
                d: coords[2].clone(),
            },
            "xyz" => PointSpec::OriginBlowup {
                a: coords[0].clone(),
                b: coords[1].clone(),
                c: coords[2].clone(),
                j: twist,
            },
            other => {
                return Err((
                    QpStatus::QpInvalidArgument,
                    format!("unknown ideal \"{other}\", expected \"xz\" or \"xyz\""),
                ))
            }
        };
        stratify_body(n, &spec)
    })
}

/// Stratify a point of a chart section algebra. `chart` is "line" or
/// "origin"; `point` holds the three family parameters.
///
/// # Safety
/// `chart` and `point` must be valid NUL-terminated strings; `out` must be a
/// valid pointer to a `QpReport*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_chart_stratify(
    n: u32,
    chart: *const c_char,
    point: *const c_char,
    out: *mut *mut QpReport,
) -> QpStatus {
    let chart = match read_str(chart) {
        Ok(s) => s.to_owned(),
        Err(status) => return status,
    };
    let text = match read_str(point) {
        Ok(s) => s.to_owned(),
        Err(status) => return status,
    };
    guarded(out, move || {
        check_conductor(n).map_err(|e| (status_of(&e), e.to_string()))?;
        let coords = parse_point(n, &text, 3).map_err(|e| (status_of(&e), e.to_string()))?;
        let chart = match chart.as_str() {
            "line" => Chart::Line,
            "origin" => Chart::Origin,
            other => {
                return Err((
                    QpStatus::QpInvalidArgument,
                    format!("unknown chart \"{other}\", expected \"line\" or \"origin\""),
                ))
            }
        };
        let spec = PointSpec::Section {
            chart,
            a: coords[0].clone(),
            b: coords[1].clone(),
            c: coords[2].clone(),
        };
        stratify_body(n, &spec)
    })
}

/// Sweep the canonical point family of an algebra. `algebra` is "plane",
/// "xz", or "xyz".
///
/// # Safety
/// `algebra` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a `QpReport*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_sweep(
    n: u32,
    algebra: *const c_char,
    out: *mut *mut QpReport,
) -> QpStatus {
    let algebra = match read_str(algebra) {
        Ok(s) => s.to_owned(),
        Err(status) => return status,
    };
    guarded(out, move || {
        let algebra = match algebra.as_str() {
            "plane" => Algebra::Plane,
            "xz" => Algebra::LineBlowup,
            "xyz" => Algebra::OriginBlowup,
            other => {
                return Err((
                    QpStatus::QpInvalidArgument,
                    format!("unknown algebra \"{other}\", expected \"plane\", \"xz\", or \"xyz\""),
                ))
            }
        };
        sweep(n, algebra, None).map(ReportBody::Sweep).map_err(|e| (status_of(&e), e.to_string()))
    })
}

/// Verify the finite Heisenberg pair identities for every unit exponent.
/// Returns `QpMathError` if any identity fails.
///
/// # Safety
/// `out` must be a valid pointer to a `QpReport*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_heis_check(n: u32, out: *mut *mut QpReport) -> QpStatus {
    guarded(out, move || {
        check_conductor(n).map_err(|e| (status_of(&e), e.to_string()))?;
        let mut rows = Vec::new();
        for k in 1..n as i64 {
            if num_gcd(k, n as i64) != 1 {
                continue;
            }
            let row = verify_heis_identities(n, k)
                .map_err(|e| (QpStatus::QpMathError, e.to_string()))?;
            rows.push(row);
        }
        if rows.iter().any(|r| !r.ok) {
            return Err((QpStatus::QpMathError, "a Heisenberg identity failed".into()));
        }
        Ok(ReportBody::Heis(rows))
    })
}

fn num_gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

/// Serialize a report as pretty-printed JSON inside the versioned
/// conventions envelope. The string must be released with
/// `qp_string_free`.
///
/// # Safety
/// `report` must be a live handle from this library; `out` must be a valid
/// pointer to a `char*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_report_json(
    report: *const QpReport,
    out: *mut *mut c_char,
) -> QpStatus {
    if report.is_null() || out.is_null() {
        set_error("null argument");
        return QpStatus::QpInvalidArgument;
    }
    *out = ptr::null_mut();
    let handle = &*report;
    let json = match catch_unwind(AssertUnwindSafe(|| match &handle.body {
        ReportBody::Stratum(r) => to_json(r),
        ReportBody::Sweep(r) => to_json(r),
        ReportBody::Heis(r) => to_json(r),
    })) {
        Ok(s) => s,
        Err(_) => {
            set_error("serialization panicked");
            return QpStatus::QpInternal;
        }
    };
    match CString::new(json) {
        Ok(c) => {
            *out = c.into_raw();
            clear_error();
            QpStatus::QpOk
        }
        Err(_) => {
            set_error("report contained an interior NUL byte");
            QpStatus::QpInternal
        }
    }
}

/// Render the quiver of a stratification report in Graphviz DOT form.
/// Fails with `QpInvalidArgument` for sweep or identity-check reports.
/// The string must be released with `qp_string_free`.
///
/// # Safety
/// `report` must be a live handle from this library; `out` must be a valid
/// pointer to a `char*` slot.
#[no_mangle]
pub unsafe extern "C" fn qp_report_dot(
    report: *const QpReport,
    out: *mut *mut c_char,
) -> QpStatus {
    if report.is_null() || out.is_null() {
        set_error("null argument");
        return QpStatus::QpInvalidArgument;
    }
    *out = ptr::null_mut();
    let handle = &*report;
    let quiver = match &handle.body {
        ReportBody::Stratum(r) => &r.quiver,
        _ => {
            set_error("this report kind has no single quiver");
            return QpStatus::QpInvalidArgument;
        }
    };
    match CString::new(quiver_dot(quiver)) {
        Ok(c) => {
            *out = c.into_raw();
            clear_error();
            QpStatus::QpOk
        }
        Err(_) => {
            set_error("diagram contained an interior NUL byte");
            QpStatus::QpInternal
        }
    }
}

/// Release a report handle. NULL is ignored.
///
/// # Safety
/// `report` must be NULL or a handle produced by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn qp_report_free(report: *mut QpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Release a string produced by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string produced by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn qp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Thread-local description of the last failure, or NULL if the most recent
/// call on this thread succeeded. The pointer is owned by the library and
/// valid until the next fallible call on the same thread.
#[no_mangle]
pub extern "C" fn qp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map(|c| c.as_ptr()).unwrap_or(ptr::null())
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
