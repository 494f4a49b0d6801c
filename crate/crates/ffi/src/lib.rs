//! C interface to the `mopchr` library.
//!
//! Every function returns a [`MopchrStatus`]. On failure the message is kept
//! per thread and read with [`mopchr_last_error`]. Objects are opaque handles
//! released with their `_free` function; strings returned to C are released
//! with [`mopchr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mopchr::christoffel::transform_nnrr;
use mopchr::cli::input::{self, SystemSource};
use mopchr::lattice::{lattice_for_system, type2_coeffs, CellStatus, NnrrLattice};
use mopchr::numerics::{format_rational, Backend, Rational, Scalar};
use mopchr::MopError;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MopchrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed input: bad shorthand, bad UTF-8, index of the wrong rank.
    InvalidArgument = 2,
    /// Parameters outside a family's admissible range.
    Domain = 3,
    /// Breakdown, singular system, non-normal index or failed convergence.
    Numerical = 4,
    /// The operation needs another scalar backend.
    Backend = 5,
    /// The requested coefficient or cell is not available.
    NotFound = 6,
    /// The output buffer is too small; the needed length is reported.
    BufferTooSmall = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

/// State of one lattice cell.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MopchrCellStatus {
    Normal = 0,
    Boundary = 1,
    Partial = 2,
    Breakdown = 3,
    /// Outside the filled region.
    Absent = 4,
}

/// A system of moment functionals, parsed but not yet evaluated.
pub struct MopchrSystem {
    source: SystemSource,
}

enum Coefficients {
    Exact(NnrrLattice<Rational>),
    Float(NnrrLattice<f64>),
}

/// Filled nearest-neighbour recurrence coefficients.
pub struct MopchrLattice {
    coeffs: Coefficients,
    breakdowns: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(MopchrStatus, String);

impl From<MopError> for Failure {
    fn from(e: MopError) -> Self {
        let code = match e {
            MopError::Usage(_) => MopchrStatus::InvalidArgument,
            MopError::Domain(_) => MopchrStatus::Domain,
            MopError::Backend { .. } => MopchrStatus::Backend,
            _ => MopchrStatus::Numerical,
        };
        Failure(code, e.to_string())
    }
}

fn fail(code: MopchrStatus, msg: impl Into<String>) -> Failure {
    Failure(code, msg.into())
}

/// Runs `f`, records any error message and converts panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MopchrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MopchrStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal error: panic in mopchr");
            MopchrStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(MopchrStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(MopchrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn object<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(MopchrStatus::NullArgument, format!("{what} is null")))
}

unsafe fn output<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(MopchrStatus::NullArgument, format!("{what} is null")))
}

unsafe fn index<'a>(lat: &MopchrLattice, p: *const usize, len: usize) -> Result<&'a [usize], Failure> {
    if p.is_null() {
        return Err(fail(MopchrStatus::NullArgument, "index is null"));
    }
    if len != lat.rank() {
        return Err(fail(MopchrStatus::InvalidArgument, format!("index has length {len}, lattice rank is {}", lat.rank())));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

impl MopchrLattice {
    fn new(coeffs: Coefficients) -> Self {
        let breakdowns = match &coeffs {
            Coefficients::Exact(l) => l.breakdowns().len(),
            Coefficients::Float(l) => l.breakdowns().len(),
        };
        MopchrLattice { coeffs, breakdowns }
    }

    fn rank(&self) -> usize {
        match &self.coeffs {
            Coefficients::Exact(l) => l.rank(),
            Coefficients::Float(l) => l.rank(),
        }
    }

    fn dmax(&self) -> usize {
        match &self.coeffs {
            Coefficients::Exact(l) => l.dmax(),
            Coefficients::Float(l) => l.dmax(),
        }
    }

    fn status(&self, n: &[usize]) -> Option<CellStatus> {
        match &self.coeffs {
            Coefficients::Exact(l) => l.status(n),
            Coefficients::Float(l) => l.status(n),
        }
    }

    /// `a_{n,j}` (`which = 'a'`) or `b_{n,j}` as a float.
    fn coefficient(&self, which: char, n: &[usize], j: usize) -> Option<f64> {
        fn pick<T: Scalar>(l: &NnrrLattice<T>, which: char, n: &[usize], j: usize) -> Option<f64> {
            let v = if which == 'a' { l.a(n, j) } else { l.b(n, j) };
            v.map(|v| v.to_complex().re)
        }
        match &self.coeffs {
            Coefficients::Exact(l) => pick(l, which, n, j),
            Coefficients::Float(l) => pick(l, which, n, j),
        }
    }
}

fn backend_for(src: &SystemSource) -> Result<Backend, Failure> {
    Ok(input::backend(src, false, None)?)
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mopchr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mopchr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a family shorthand such as `charlier:a=1,2` or `@file.json`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mopchr_system_parse(spec: *const c_char, out: *mut *mut MopchrSystem) -> MopchrStatus {
    guard(|| {
        let out = output(out, "out")?;
        *out = ptr::null_mut();
        let source = input::system(text(spec, "spec")?)?;
        *out = Box::into_raw(Box::new(MopchrSystem { source }));
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must come from [`mopchr_system_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mopchr_system_free(sys: *mut MopchrSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of functionals `r`.
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mopchr_system_rank(sys: *const MopchrSystem, out: *mut usize) -> MopchrStatus {
    guard(|| {
        let sys = object(sys, "sys")?;
        *output(out, "out")? = match &sys.source {
            SystemSource::Family(f) => f.rank(),
            SystemSource::Moments(m) => m.len(),
        };
        Ok(())
    })
}

/// Whether the system runs on the exact rational backend.
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mopchr_system_is_exact(sys: *const MopchrSystem, out: *mut bool) -> MopchrStatus {
    guard(|| {
        let sys = object(sys, "sys")?;
        *output(out, "out")? = backend_for(&sys.source)? == Backend::Rational;
        Ok(())
    })
}

/// Fills the recurrence coefficients for every `|n| ≤ dmax`.
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mopchr_nnrr(sys: *const MopchrSystem, dmax: usize, out: *mut *mut MopchrLattice) -> MopchrStatus {
    guard(|| {
        let out = output(out, "out")?;
        *out = ptr::null_mut();
        let src = &object(sys, "sys")?.source;
        let coeffs = match backend_for(src)? {
            Backend::Rational => Coefficients::Exact(lattice_for_system(&src.build()?, dmax)?),
            _ => Coefficients::Float(lattice_for_system(&src.build()?, dmax)?),
        };
        *out = Box::into_raw(Box::new(MopchrLattice::new(coeffs)));
        Ok(())
    })
}

/// Coefficients of `Φν` for `Φ` given as `roots=5,7;mults=1,2` (real
/// rational roots), up to `|k| ≤ dmax`. Cells past a breakdown are marked,
/// and their count is available from [`mopchr_lattice_breakdowns`].
///
/// # Safety
/// `sys` must be a live handle, `phi` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mopchr_transform(
    sys: *const MopchrSystem,
    phi: *const c_char,
    dmax: usize,
    out: *mut *mut MopchrLattice,
) -> MopchrStatus {
    guard(|| {
        let out = output(out, "out")?;
        *out = ptr::null_mut();
        let src = &object(sys, "sys")?.source;
        let p = input::phi_flag(text(phi, "phi")?, None)?;
        let coeffs = match backend_for(src)? {
            Backend::Rational => Coefficients::Exact(transform_nnrr(&src.build()?, &p.spec(dmax)?)?.lattice),
            _ => Coefficients::Float(transform_nnrr(&src.build()?, &p.spec(dmax)?)?.lattice),
        };
        *out = Box::into_raw(Box::new(MopchrLattice::new(coeffs)));
        Ok(())
    })
}

/// Releases a lattice. Null is ignored.
///
/// # Safety
/// `lat` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_free(lat: *mut MopchrLattice) {
    if !lat.is_null() {
        drop(Box::from_raw(lat));
    }
}

/// Rank, depth and whether the values are exact.
///
/// # Safety
/// `lat` must be a live handle; each output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_info(
    lat: *const MopchrLattice,
    rank: *mut usize,
    dmax: *mut usize,
    exact: *mut bool,
) -> MopchrStatus {
    guard(|| {
        let lat = object(lat, "lat")?;
        if let Some(r) = rank.as_mut() {
            *r = lat.rank();
        }
        if let Some(d) = dmax.as_mut() {
            *d = lat.dmax();
        }
        if let Some(e) = exact.as_mut() {
            *e = matches!(lat.coeffs, Coefficients::Exact(_));
        }
        Ok(())
    })
}

/// Number of recorded breakdowns.
///
/// # Safety
/// `lat` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_breakdowns(lat: *const MopchrLattice, out: *mut usize) -> MopchrStatus {
    guard(|| {
        *output(out, "out")? = object(lat, "lat")?.breakdowns;
        Ok(())
    })
}

/// Status of cell `n` (`len` must equal the rank).
///
/// # Safety
/// `lat` must be a live handle, `n` must point to `len` values and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_cell(
    lat: *const MopchrLattice,
    n: *const usize,
    len: usize,
    out: *mut MopchrCellStatus,
) -> MopchrStatus {
    guard(|| {
        let lat = object(lat, "lat")?;
        let n = index(lat, n, len)?;
        *output(out, "out")? = match lat.status(n) {
            None => MopchrCellStatus::Absent,
            Some(CellStatus::Normal) => MopchrCellStatus::Normal,
            Some(CellStatus::Boundary) => MopchrCellStatus::Boundary,
            Some(CellStatus::Partial) => MopchrCellStatus::Partial,
            Some(CellStatus::Breakdown) => MopchrCellStatus::Breakdown,
        };
        Ok(())
    })
}

unsafe fn coefficient(
    which: char,
    lat: *const MopchrLattice,
    n: *const usize,
    len: usize,
    j: usize,
    out: *mut f64,
) -> MopchrStatus {
    guard(|| {
        let lat = object(lat, "lat")?;
        let n = index(lat, n, len)?;
        if j >= lat.rank() {
            return Err(fail(MopchrStatus::InvalidArgument, format!("axis {j} out of range")));
        }
        let v = lat
            .coefficient(which, n, j)
            .ok_or_else(|| fail(MopchrStatus::NotFound, format!("{which}_{{{n:?},{j}}} is not available")))?;
        *output(out, "out")? = v;
        Ok(())
    })
}

/// `a_{n,j}` as a double.
///
/// # Safety
/// As for [`mopchr_lattice_cell`].
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_a(
    lat: *const MopchrLattice,
    n: *const usize,
    len: usize,
    j: usize,
    out: *mut f64,
) -> MopchrStatus {
    coefficient('a', lat, n, len, j, out)
}

/// `b_{n,j}` as a double.
///
/// # Safety
/// As for [`mopchr_lattice_cell`].
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_b(
    lat: *const MopchrLattice,
    n: *const usize,
    len: usize,
    j: usize,
    out: *mut f64,
) -> MopchrStatus {
    coefficient('b', lat, n, len, j, out)
}

/// `a_{n,j}` (`which_b` false) or `b_{n,j}` as an exact `"p/q"` string.
/// Needs an exact lattice. Release the string with [`mopchr_string_free`].
///
/// # Safety
/// As for [`mopchr_lattice_cell`].
#[no_mangle]
pub unsafe extern "C" fn mopchr_lattice_exact(
    lat: *const MopchrLattice,
    n: *const usize,
    len: usize,
    j: usize,
    which_b: bool,
    out: *mut *mut c_char,
) -> MopchrStatus {
    guard(|| {
        let out = output(out, "out")?;
        *out = ptr::null_mut();
        let lat = object(lat, "lat")?;
        let n = index(lat, n, len)?;
        let Coefficients::Exact(l) = &lat.coeffs else {
            return Err(fail(MopchrStatus::Backend, "exact values need a rational lattice"));
        };
        let v = if which_b { l.b(n, j) } else { l.a(n, j) };
        let v = v.ok_or_else(|| fail(MopchrStatus::NotFound, format!("coefficient at {n:?}, axis {j} is not available")))?;
        *out = CString::new(format_rational(v)).expect("no NUL in a rational").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mopchr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Coefficients of the type II polynomial `P_n`, constant term first, as
/// doubles. `*needed` is set to `|n| + 1`; if `cap` is smaller the call
/// returns `BufferTooSmall` and writes nothing.
///
/// # Safety
/// `lat` must be a live handle, `n` must point to `len` values, `buf` to
/// `cap` writable doubles (may be null when `cap` is 0) and `needed` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn mopchr_type2_coeffs(
    lat: *const MopchrLattice,
    n: *const usize,
    len: usize,
    buf: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> MopchrStatus {
    guard(|| {
        let lat = object(lat, "lat")?;
        let n = index(lat, n, len)?;
        let coeffs: Vec<f64> = match &lat.coeffs {
            Coefficients::Exact(l) => type2_coeffs(l, n)?.coeffs().iter().map(|c| c.to_complex().re).collect(),
            Coefficients::Float(l) => type2_coeffs(l, n)?.coeffs().to_vec(),
        };
        *output(needed, "needed")? = coeffs.len();
        if cap < coeffs.len() {
            return Err(fail(MopchrStatus::BufferTooSmall, format!("need {} doubles, have {cap}", coeffs.len())));
        }
        if buf.is_null() {
            return Err(fail(MopchrStatus::NullArgument, "buf is null"));
        }
        std::slice::from_raw_parts_mut(buf, coeffs.len()).copy_from_slice(&coeffs);
        Ok(())
    })
}

/// Runs the command-line interface with `argv[0..argc]` and returns its exit
/// code (0 pass, 1 check failure, 2 bad input). Output goes to stdout.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mopchr_cli_main(argc: c_int, argv: *const *const c_char) -> c_int {
    if argv.is_null() || argc < 0 {
        set_error("argv is null");
        return 2;
    }
    let args: Option<Vec<String>> = (0..argc as usize)
        .map(|i| {
            let p = *argv.add(i);
            (!p.is_null()).then(|| CStr::from_ptr(p).to_string_lossy().into_owned())
        })
        .collect();
    let Some(args) = args else {
        set_error("argv holds a null entry");
        return 2;
    };
    catch_unwind(|| mopchr::cli::main_with(args)).unwrap_or_else(|_| {
        set_error("internal error: panic in mopchr");
        2
    })
}
