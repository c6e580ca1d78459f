//! C interface to `hdfe`.
//!
//! Configs and encodings are opaque heap handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`HdfeStatus`]; on failure a message is available from
//! [`hdfe_last_error`] on the same thread until the next failing call.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hdfe::codec::format::{load, save};
use hdfe::codec::{
    decode_at, encode_explicit, encode_implicit, query_implicit, DecodeOptions, FunctionEncoding,
    Refinement, SampleSet,
};
use hdfe::fpe::EncodingConfig;
use hdfe::HdfeError;

pub const HDFE_REFINE_NONE: u32 = 0;
pub const HDFE_REFINE_ONESHOT: u32 = 1;
pub const HDFE_REFINE_ITERATIVE: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdfeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Numeric = 4,
    ConfigMismatch = 5,
    Io = 6,
    Format = 7,
    Panic = 8,
}

/// Encoder parameters and their random projections.
pub struct HdfeConfig {
    inner: EncodingConfig,
}

/// A function encoding bound to the config that produced it.
pub struct HdfeEncoding {
    inner: FunctionEncoding,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &HdfeError) -> HdfeStatus {
    match e {
        HdfeError::Dimension { .. } | HdfeError::EmptySamples | HdfeError::WrongCodec(_) => {
            HdfeStatus::Dimension
        }
        HdfeError::Division { .. }
        | HdfeError::UndefinedSimilarity
        | HdfeError::Normalization
        | HdfeError::NonFinite(_)
        | HdfeError::EmptySuperposition(_)
        | HdfeError::Solver(_) => HdfeStatus::Numeric,
        HdfeError::ConfigMismatch { .. } => HdfeStatus::ConfigMismatch,
        HdfeError::Io { .. } => HdfeStatus::Io,
        HdfeError::Format { .. } | HdfeError::Csv { .. } | HdfeError::Config(_) => HdfeStatus::Format,
        _ => HdfeStatus::InvalidArgument,
    }
}

struct Fail(HdfeStatus, String);

impl From<HdfeError> for Fail {
    fn from(e: HdfeError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HdfeStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HdfeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HdfeStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HdfeStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn config<'a>(p: *const HdfeConfig) -> Result<&'a EncodingConfig, Fail> {
    p.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn encoding<'a>(p: *const HdfeEncoding) -> Result<&'a FunctionEncoding, Fail> {
    p.as_ref().map(|e| &e.inner).ok_or_else(|| null("encoding"))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(HdfeStatus::InvalidArgument, "path is not UTF-8".into()))
}

fn mode(m: u32) -> Result<Refinement, Fail> {
    Refinement::from_tag(m as u8)
        .filter(|_| m <= u8::MAX as u32)
        .ok_or_else(|| Fail(HdfeStatus::InvalidArgument, format!("unknown refinement mode {m}")))
}

fn put<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hdfe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hdfe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hdfe_config_new(
    n: usize,
    m: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    out: *mut *mut HdfeConfig,
) -> HdfeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = EncodingConfig::new(n, m, alpha, beta, seed)?;
        put(out, HdfeConfig { inner });
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hdfe_config_free(cfg: *mut HdfeConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Config fingerprint, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hdfe_config_fingerprint(cfg: *const HdfeConfig) -> u64 {
    cfg.as_ref().map_or(0, |c| c.inner.fingerprint())
}

/// Encodes `n_samples` rows of `inputs` (row-major, width `m` of the config)
/// with one output each.
///
/// # Safety
/// `inputs` must hold `n_samples * m` doubles, `outputs` `n_samples` doubles,
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encode_explicit(
    cfg: *const HdfeConfig,
    inputs: *const f64,
    outputs: *const f64,
    n_samples: usize,
    refinement: u32,
    out: *mut *mut HdfeEncoding,
) -> HdfeStatus {
    guard(|| {
        let cfg = config(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = cfg.input_dim();
        let xs = slice(inputs, n_samples * m, "inputs")?;
        let ys = slice(outputs, n_samples, "outputs")?;
        let samples = SampleSet::explicit(m, xs.to_vec(), ys.to_vec())?;
        let inner = encode_explicit(cfg, &samples, mode(refinement)?)?;
        put(out, HdfeEncoding { inner });
        Ok(())
    })
}

/// Encodes a point set (row-major `n_samples x m`).
///
/// # Safety
/// `points` must hold `n_samples * m` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encode_implicit(
    cfg: *const HdfeConfig,
    points: *const f64,
    n_samples: usize,
    refinement: u32,
    out: *mut *mut HdfeEncoding,
) -> HdfeStatus {
    guard(|| {
        let cfg = config(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = cfg.input_dim();
        let xs = slice(points, n_samples * m, "points")?;
        let samples = SampleSet::implicit(m, xs.to_vec())?;
        let inner = encode_implicit(cfg, &samples, mode(refinement)?)?;
        put(out, HdfeEncoding { inner });
        Ok(())
    })
}

/// # Safety
/// `enc` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encoding_free(enc: *mut HdfeEncoding) {
    if !enc.is_null() {
        drop(Box::from_raw(enc));
    }
}

/// Dimension `N` of the encoding, or 0 for a null handle.
///
/// # Safety
/// `enc` must be null or a live encoding handle.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encoding_dim(enc: *const HdfeEncoding) -> usize {
    enc.as_ref().map_or(0, |e| e.inner.vector.len())
}

/// Copies the vector as interleaved `(re, im)` pairs into `buf`, which must
/// have room for `len >= 2 * N` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encoding_copy_vector(
    enc: *const HdfeEncoding,
    buf: *mut f64,
    len: usize,
) -> HdfeStatus {
    guard(|| {
        let enc = encoding(enc)?;
        let data = enc.vector.to_interleaved();
        if len < data.len() {
            return Err(Fail(
                HdfeStatus::Dimension,
                format!("buffer holds {len} doubles, need {}", data.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Decodes at `x0` (length `m`). A nonzero `grid_resolution` selects the
/// exhaustive grid search at that resolution; 0 selects gradient ascent.
///
/// # Safety
/// `x0` must hold `m` doubles and `y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdfe_decode(
    cfg: *const HdfeConfig,
    enc: *const HdfeEncoding,
    x0: *const f64,
    m: usize,
    grid_resolution: usize,
    y: *mut f64,
) -> HdfeStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let enc = encoding(enc)?;
        let x = slice(x0, m, "x0")?;
        if y.is_null() {
            return Err(null("y"));
        }
        let opts = if grid_resolution > 0 {
            DecodeOptions::grid(grid_resolution)
        } else {
            DecodeOptions::default()
        };
        *y = decode_at(cfg, enc, x, &opts)?;
        Ok(())
    })
}

/// Real-cosine similarity of an implicit encoding with the point `xq`.
///
/// # Safety
/// `xq` must hold `m` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdfe_query(
    cfg: *const HdfeConfig,
    enc: *const HdfeEncoding,
    xq: *const f64,
    m: usize,
    out: *mut f64,
) -> HdfeStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let enc = encoding(enc)?;
        let x = slice(xq, m, "xq")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = query_implicit(cfg, enc, x)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encoding_save(
    cfg: *const HdfeConfig,
    enc: *const HdfeEncoding,
    path: *const c_char,
) -> HdfeStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let enc = encoding(enc)?;
        save(self::path(path)?, cfg, enc)?;
        Ok(())
    })
}

/// Reads an encoding file and returns new config and encoding handles.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; both out pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hdfe_encoding_load(
    path: *const c_char,
    cfg_out: *mut *mut HdfeConfig,
    enc_out: *mut *mut HdfeEncoding,
) -> HdfeStatus {
    guard(|| {
        if cfg_out.is_null() || enc_out.is_null() {
            return Err(null("out"));
        }
        let (cfg, enc) = load(self::path(path)?)?;
        put(cfg_out, HdfeConfig { inner: cfg });
        put(enc_out, HdfeEncoding { inner: enc });
        Ok(())
    })
}
