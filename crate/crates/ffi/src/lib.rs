//! C ABI for orbitlab.
//!
//! Objects cross the boundary as opaque handles. Each constructor has a
//! matching `*_free`. Every fallible call returns an `OrbitlabStatus`; on
//! failure the message is available from `orbitlab_last_error()` on the
//! same thread until the next failing call.
//! Strings returned through `char **` belong to the caller and must be
//! released with `orbitlab_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orbitlab::cli::{execute, ExperimentConfig, GalleryId, LemmaName, Request, TargetArg};
use orbitlab::operators::{DiagonalOperator, MatrixOperator, Operator, RootOfUnity};
use orbitlab::output::canonical_json;
use orbitlab::seqspace::{Scalar, SeqVec, Tail};
use orbitlab::witness::telescope_check;
use orbitlab::{Error, ExitCode};

/// Result codes. Non-negative values coincide with the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitlabStatus {
    Ok = 0,
    Config = 1,
    NotPowerBounded = 2,
    TolAmbiguous = 3,
    Precondition = 4,
    Exhausted = 5,
    ParityFailure = 6,
    NullPointer = -1,
    InvalidUtf8 = -2,
    Panic = -3,
}

impl From<ExitCode> for OrbitlabStatus {
    fn from(c: ExitCode) -> Self {
        match c {
            ExitCode::Success => OrbitlabStatus::Ok,
            ExitCode::Config => OrbitlabStatus::Config,
            ExitCode::NotPowerBounded => OrbitlabStatus::NotPowerBounded,
            ExitCode::TolAmbiguous => OrbitlabStatus::TolAmbiguous,
            ExitCode::Precondition => OrbitlabStatus::Precondition,
            ExitCode::Exhausted => OrbitlabStatus::Exhausted,
            ExitCode::ParityFailure => OrbitlabStatus::ParityFailure,
        }
    }
}

/// Tail kinds for `orbitlab_vector_from_coords`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitlabTailKind {
    Null = 0,
    Limit = 1,
}

/// Commands for `orbitlab_run_json`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitlabCommand {
    Decompose = 0,
    AnalyzeOrbit = 1,
    AnalyzeDiff = 2,
    Witness = 3,
    Gallery = 4,
    Lemma = 5,
}

/// Opaque operator handle.
pub struct OrbitlabOperator(Operator);

/// Opaque sequence-vector handle.
pub struct OrbitlabVector(SeqVec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: OrbitlabStatus, msg: impl Into<String>) -> OrbitlabStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> OrbitlabStatus {
    let status = OrbitlabStatus::from(e.exit_code());
    fail(status, e.to_string())
}

/// Run `f`, converting panics into `OrbitlabStatus::Panic`.
fn guard(f: impl FnOnce() -> OrbitlabStatus) -> OrbitlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(OrbitlabStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, OrbitlabStatus> {
    if p.is_null() {
        return Err(fail(OrbitlabStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(OrbitlabStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn out_string(out: *mut *mut c_char, s: String) -> OrbitlabStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            OrbitlabStatus::Ok
        }
        Err(_) => fail(OrbitlabStatus::InvalidUtf8, "output contains a NUL byte"),
    }
}

fn scalars(re_im: *const f64, len: usize) -> Vec<Scalar> {
    let flat = unsafe { std::slice::from_raw_parts(re_im, 2 * len) };
    flat.chunks_exact(2).map(|z| Scalar::new(z[0], z[1])).collect()
}

/// Message of the last failing call on this thread, or NULL.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn orbitlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn orbitlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Diagonal operator with entries `exp(2 pi i num / 2^(n+1))`, optionally
/// multiplied by `exp(2 pi i root_num / root_den)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_operator_dyadic(num: i64, root_num: i64, root_den: u64, out: *mut *mut OrbitlabOperator) -> OrbitlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null output pointer");
        }
        let root = if root_den == 0 { Ok(RootOfUnity::ONE) } else { RootOfUnity::new(root_num, root_den) };
        match root.and_then(|r| DiagonalOperator::dyadic(num, r)) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(OrbitlabOperator(Operator::Diagonal(t))));
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Dense `dim x dim` matrix from `2 dim^2` doubles, row-major, each entry
/// stored as (re, im).
///
/// # Safety
/// `re_im` must point to `2 * dim * dim` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_operator_matrix(dim: usize, re_im: *const f64, out: *mut *mut OrbitlabOperator) -> OrbitlabStatus {
    guard(|| {
        if out.is_null() || re_im.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null pointer argument");
        }
        if dim == 0 || dim > orbitlab::operators::matrix::MAX_DIM {
            return fail(OrbitlabStatus::Config, format!("dimension {dim} out of range"));
        }
        let flat = scalars(re_im, dim * dim);
        let rows: Vec<Vec<Scalar>> = flat.chunks_exact(dim).map(|r| r.to_vec()).collect();
        match MatrixOperator::from_rows(&rows) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(OrbitlabOperator(Operator::Matrix(t))));
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Operator from the JSON operator schema used by the command-line tool.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_operator_from_json(json: *const c_char, out: *mut *mut OrbitlabOperator) -> OrbitlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null output pointer");
        }
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let wrapped = format!("{{\"operator\": {text}}}");
        let built = ExperimentConfig::from_json(&wrapped).and_then(|c| {
            c.operator.ok_or_else(|| Error::Config("missing operator".into()))?.build()
        });
        match built {
            Ok(op) => {
                *out = Box::into_raw(Box::new(OrbitlabOperator(op)));
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `op` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_operator_free(op: *mut OrbitlabOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// `sup_n ||T^n||` upper bound.
///
/// # Safety
/// `op` must be a valid handle and `m` writable.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_power_bound(op: *const OrbitlabOperator, m: *mut f64) -> OrbitlabStatus {
    guard(|| {
        if op.is_null() || m.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null pointer argument");
        }
        match (*op).0.power_norm_bound() {
            Ok(b) => {
                *m = b.m;
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// The all-ones sequence with `head_dim` explicit coordinates.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_vector_ones(head_dim: usize, out: *mut *mut OrbitlabVector) -> OrbitlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null output pointer");
        }
        if head_dim == 0 {
            return fail(OrbitlabStatus::Config, "head_dim must be positive");
        }
        *out = Box::into_raw(Box::new(OrbitlabVector(SeqVec::ones(head_dim))));
        OrbitlabStatus::Ok
    })
}

/// Vector with `len` explicit coordinates (pairs of doubles) and a tail:
/// a null envelope of size `bound`, or coordinates within `bound` of the
/// limit `(limit_re, limit_im)`.
///
/// # Safety
/// `re_im` must point to `2 * len` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_vector_from_coords(
    re_im: *const f64,
    len: usize,
    tail: OrbitlabTailKind,
    limit_re: f64,
    limit_im: f64,
    bound: f64,
    out: *mut *mut OrbitlabVector,
) -> OrbitlabStatus {
    guard(|| {
        if out.is_null() || re_im.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null pointer argument");
        }
        let t = match tail {
            OrbitlabTailKind::Null => Tail::NullEnvelope { bound },
            OrbitlabTailKind::Limit => Tail::ConvergentLimit { limit: Scalar::new(limit_re, limit_im), bound },
        };
        match SeqVec::new(scalars(re_im, len), t) {
            Ok(v) => {
                *out = Box::into_raw(Box::new(OrbitlabVector(v)));
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `v` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_vector_free(v: *mut OrbitlabVector) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Number of explicit coordinates.
///
/// # Safety
/// `v` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_vector_dim(v: *const OrbitlabVector) -> usize {
    if v.is_null() {
        0
    } else {
        (*v).0.dim()
    }
}

/// Certified enclosure `[lo, hi]` of the sup-norm.
///
/// # Safety
/// `v` must be a valid handle; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_vector_sup_norm(v: *const OrbitlabVector, lo: *mut f64, hi: *mut f64) -> OrbitlabStatus {
    guard(|| {
        if v.is_null() || lo.is_null() || hi.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null pointer argument");
        }
        let n = (*v).0.sup_norm();
        *lo = n.lo;
        *hi = n.hi;
        OrbitlabStatus::Ok
    })
}

/// `T^n x` as a new vector.
///
/// # Safety
/// `op` and `x` must be valid handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_apply_power(op: *const OrbitlabOperator, n: u64, x: *const OrbitlabVector, out: *mut *mut OrbitlabVector) -> OrbitlabStatus {
    guard(|| {
        if op.is_null() || x.is_null() || out.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null pointer argument");
        }
        match (*op).0.apply_power(n, &(*x).0) {
            Ok(v) => {
                *out = Box::into_raw(Box::new(OrbitlabVector(v)));
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Residual of `T^{n+m} x - T^n x = sum_j (T^{n+j+1} x - T^{n+j} x)`.
///
/// # Safety
/// `op` and `x` must be valid handles; `residual` writable.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_telescope_check(
    op: *const OrbitlabOperator,
    x: *const OrbitlabVector,
    n: u64,
    m: u64,
    residual: *mut f64,
) -> OrbitlabStatus {
    guard(|| {
        if op.is_null() || x.is_null() || residual.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null pointer argument");
        }
        match telescope_check(&(*op).0, &(*x).0, n, m) {
            Ok(r) => {
                *residual = r;
                OrbitlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Run a command on a JSON experiment configuration (the command-line
/// schema) and return the primary JSON report in `out_json`.
///
/// `param` is the difference step for `AnalyzeDiff`, `m` for the
/// `mth-root` gallery and the trial count for `Lemma`; 0 means "take it
/// from the configuration". `name` selects the gallery id or lemma name
/// and may be NULL. The report is produced even when the status signals a
/// domain outcome such as `NotPowerBounded` or `Exhausted`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string. `name` is NULL or a
/// NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn orbitlab_run_json(
    command: OrbitlabCommand,
    config_json: *const c_char,
    name: *const c_char,
    param: u64,
    out_json: *mut *mut c_char,
) -> OrbitlabStatus {
    guard(|| {
        if out_json.is_null() {
            return fail(OrbitlabStatus::NullPointer, "null output pointer");
        }
        *out_json = ptr::null_mut();
        let text = match str_arg(config_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let name = if name.is_null() {
            None
        } else {
            match str_arg(name) {
                Ok(n) => Some(n.to_string()),
                Err(s) => return s,
            }
        };
        let opt = |v: u64| if v == 0 { None } else { Some(v) };
        let req = match command {
            OrbitlabCommand::Decompose => Request::Decompose,
            OrbitlabCommand::AnalyzeOrbit => Request::Analyze { target: Some(TargetArg::Orbit), m: None },
            OrbitlabCommand::AnalyzeDiff => Request::Analyze { target: Some(TargetArg::Diff), m: opt(param) },
            OrbitlabCommand::Witness => Request::Witness,
            OrbitlabCommand::Gallery => {
                let id = match name.as_deref().map(parse_gallery_id).transpose() {
                    Ok(id) => id,
                    Err(s) => return s,
                };
                Request::Gallery { id, m: opt(param) }
            }
            OrbitlabCommand::Lemma => {
                let lemma = match name.as_deref().map(parse_lemma).transpose() {
                    Ok(l) => l,
                    Err(s) => return s,
                };
                Request::Lemma { name: lemma, trials: opt(param).map(|t| t as usize) }
            }
        };
        let result = ExperimentConfig::from_json(text).and_then(|cfg| execute(&req, &cfg, None));
        match result {
            Ok(a) => {
                let body = match canonical_json(&a.json) {
                    Ok(b) => b,
                    Err(e) => return from_error(e),
                };
                let status = out_string(out_json, body);
                if status != OrbitlabStatus::Ok {
                    return status;
                }
                let code = OrbitlabStatus::from(a.exit);
                if code != OrbitlabStatus::Ok {
                    let msg = a.json.get("message").and_then(|m| m.as_str()).unwrap_or("command reported a failure");
                    set_error(msg.to_string());
                }
                code
            }
            Err(e) => from_error(e),
        }
    })
}

fn parse_gallery_id(s: &str) -> Result<GalleryId, OrbitlabStatus> {
    match s {
        "example1" => Ok(GalleryId::Example1),
        "diagonal-c" => Ok(GalleryId::DiagonalC),
        "mth-root" => Ok(GalleryId::MthRoot),
        "matrix-suite" => Ok(GalleryId::MatrixSuite),
        other => Err(fail(OrbitlabStatus::Config, format!("unknown gallery id `{other}`"))),
    }
}

fn parse_lemma(s: &str) -> Result<LemmaName, OrbitlabStatus> {
    match s {
        "telescoping" => Ok(LemmaName::Telescoping),
        "multap" => Ok(LemmaName::Multap),
        "pbig" => Ok(LemmaName::Pbig),
        other => Err(fail(OrbitlabStatus::Config, format!("unknown lemma `{other}`"))),
    }
}
