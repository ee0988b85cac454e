//! C ABI over the coarse-lab core: opaque handles, status codes, and a
//! thread-local last-error message.
//!
//! Every function returns a [`CoarseStatus`]; results come back through out
//! pointers. Handles are created by `*_new`/`*_from_*` functions and released
//! with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use coarse_lab::cone::cone_metric;
use coarse_lab::generators::Family;
use coarse_lab::geodesic::{connectivity_threshold, upper_control};
use coarse_lab::io::parse_space;
use coarse_lab::maps::{closeness_constant, uniformity_control};
use coarse_lab::metric::validate_metric;
use coarse_lab::suite::{run_suite, SuiteConfig};
use coarse_lab::{CoarseError, ControlTable, FiniteMetricSpace, MapWitness};

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    Io = 4,
    OutOfRange = 5,
    CheckFailed = 6,
    Panic = 7,
}

/// A finite metric space.
pub struct CoarseSpace(Arc<FiniteMetricSpace>);

/// A map between two spaces.
pub struct CoarseMap(MapWitness);

/// A monotone scale → bound table.
pub struct CoarseControl(ControlTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &CoarseError) -> CoarseStatus {
    match e {
        CoarseError::Parse(_) | CoarseError::Json(_) => CoarseStatus::Parse,
        CoarseError::Io(_) => CoarseStatus::Io,
        CoarseError::OutOfRange { .. } | CoarseError::IndexOutOfRange(_) => CoarseStatus::OutOfRange,
        CoarseError::TriangleFailure(..) => CoarseStatus::CheckFailed,
        _ => CoarseStatus::InvalidInput,
    }
}

enum Failure {
    Null,
    Core(CoarseError),
}

impl From<CoarseError> for Failure {
    fn from(e: CoarseError) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status and last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CoarseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CoarseStatus::Ok
        }
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument".into());
            CoarseStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CoarseStatus::Panic
        }
    }
}

unsafe fn href<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(CoarseError::Parse("string is not UTF-8".into())))
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null);
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn coarse_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a space from its JSON file format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_from_json(json: *const c_char, out_space: *mut *mut CoarseSpace) -> CoarseStatus {
    guard(|| {
        let s = parse_space(text(json)?)?;
        *out(out_space)? = boxed(CoarseSpace(Arc::new(s)));
        Ok(())
    })
}

/// Builds a model space: `family` is `zplus`, `grid2_l1`, `binary_tree`, or
/// `cayley_ball(free2)` style.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_generate(
    family: *const c_char,
    size: usize,
    out_space: *mut *mut CoarseSpace,
) -> CoarseStatus {
    guard(|| {
        let f: Family = text(family)?.parse()?;
        *out(out_space)? = boxed(CoarseSpace(Arc::new(f.generate(size))));
        Ok(())
    })
}

/// # Safety
/// `space` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_free(space: *mut CoarseSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_len(space: *const CoarseSpace, len: *mut usize) -> CoarseStatus {
    guard(|| {
        *out(len)? = href(space)?.0.len();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_dist(
    space: *const CoarseSpace,
    i: usize,
    j: usize,
    dist: *mut f64,
) -> CoarseStatus {
    guard(|| {
        let s = &href(space)?.0;
        s.check_index(i)?;
        s.check_index(j)?;
        *out(dist)? = s.dist(i, j);
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid; `label` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_index_of(
    space: *const CoarseSpace,
    label: *const c_char,
    index: *mut usize,
) -> CoarseStatus {
    guard(|| {
        *out(index)? = href(space)?.0.index_of(text(label)?)?;
        Ok(())
    })
}

/// Counts metric-axiom violations (exhaustive triangle scan).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_space_validate(space: *const CoarseSpace, violations: *mut usize) -> CoarseStatus {
    guard(|| {
        *out(violations)? = validate_metric(&href(space)?.0).total;
        Ok(())
    })
}

/// Largest step needed to connect the space.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_connectivity_threshold(space: *const CoarseSpace, c: *mut f64) -> CoarseStatus {
    guard(|| {
        *out(c)? = connectivity_threshold(&href(space)?.0);
        Ok(())
    })
}

/// Cone distance between `(x, i)` and `(y, j)` over `base`; levels start at 1.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_cone_metric(
    base: *const CoarseSpace,
    x: usize,
    i: u32,
    y: usize,
    j: u32,
    dist: *mut f64,
) -> CoarseStatus {
    guard(|| {
        *out(dist)? = cone_metric(&href(base)?.0, (x, i), (y, j))?;
        Ok(())
    })
}

/// Creates a map from an index table of length `len(source)`.
///
/// # Safety
/// `table` must hold `len` entries; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_map_new(
    source: *const CoarseSpace,
    target: *const CoarseSpace,
    table: *const usize,
    len: usize,
    out_map: *mut *mut CoarseMap,
) -> CoarseStatus {
    guard(|| {
        let (s, t) = (href(source)?.0.clone(), href(target)?.0.clone());
        if len != s.len() {
            return Err(
                CoarseError::InvalidParameter(format!("table has {len} entries for {} points", s.len())).into(),
            );
        }
        let map = slice(table, len)?.to_vec();
        *out(out_map)? = boxed(CoarseMap(MapWitness::new(s, t, map)?));
        Ok(())
    })
}

/// # Safety
/// `map` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coarse_map_free(map: *mut CoarseMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// `max_x d(f x, g x)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_closeness(f: *const CoarseMap, g: *const CoarseMap, c: *mut f64) -> CoarseStatus {
    guard(|| {
        *out(c)? = closeness_constant(&href(f)?.0, &href(g)?.0)?;
        Ok(())
    })
}

/// Uniformity control of `map` on strictly increasing `scales`.
///
/// # Safety
/// `scales` must hold `n` entries; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_uniformity_control(
    map: *const CoarseMap,
    scales: *const f64,
    n: usize,
    out_control: *mut *mut CoarseControl,
) -> CoarseStatus {
    guard(|| {
        let t = uniformity_control(&href(map)?.0, slice(scales, n)?)?;
        *out(out_control)? = boxed(CoarseControl(t));
        Ok(())
    })
}

/// Least upper control of `space` at step `c` on `scales`.
///
/// # Safety
/// `scales` must hold `n` entries; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_upper_control(
    space: *const CoarseSpace,
    c: f64,
    scales: *const f64,
    n: usize,
    out_control: *mut *mut CoarseControl,
) -> CoarseStatus {
    guard(|| {
        let t = upper_control(&href(space)?.0, c, slice(scales, n)?)?;
        *out(out_control)? = boxed(CoarseControl(t));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_control_len(control: *const CoarseControl, len: *mut usize) -> CoarseStatus {
    guard(|| {
        *out(len)? = href(control)?.0.len();
        Ok(())
    })
}

/// The `k`-th `(scale, bound)` entry.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_control_entry(
    control: *const CoarseControl,
    k: usize,
    scale: *mut f64,
    bound: *mut f64,
) -> CoarseStatus {
    guard(|| {
        let t = &href(control)?.0;
        if k >= t.len() {
            return Err(CoarseError::IndexOutOfRange(k).into());
        }
        *out(scale)? = t.scales()[k];
        *out(bound)? = t.bounds()[k];
        Ok(())
    })
}

/// Bound at `query`, snapping up to the next tabulated scale.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coarse_control_at(control: *const CoarseControl, query: f64, bound: *mut f64) -> CoarseStatus {
    guard(|| {
        *out(bound)? = href(control)?.0.at(query)?;
        Ok(())
    })
}

/// # Safety
/// `control` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coarse_control_free(control: *mut CoarseControl) {
    if !control.is_null() {
        drop(Box::from_raw(control));
    }
}

/// Runs the invariant suite on a tower such as `zplus:64,128,256`. Writes
/// whether every row passed and the CSV report (free with
/// [`coarse_string_free`]).
///
/// # Safety
/// `tower` must be NUL-terminated; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarse_suite_run(
    tower: *const c_char,
    all_pass: *mut bool,
    csv: *mut *mut c_char,
) -> CoarseStatus {
    guard(|| {
        let cfg = SuiteConfig::with_tower(text(tower)?.parse()?);
        let report = run_suite(&cfg)?;
        *out(all_pass)? = report.passes();
        let c = CString::new(report.to_csv()).map_err(|_| CoarseError::Parse("report contains NUL".into()))?;
        *out(csv)? = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coarse_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
