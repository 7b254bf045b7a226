use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cyclemeter::asymptotics::{
    erdos_turan_standardize, precise_dev, psi_explicit, rate_function, RateFamily, ThetaScaling,
    ZetaZeros,
};
use cyclemeter::numtheory::MangoldtTable;
use cyclemeter::permstat::Functional;
use cyclemeter::sampler::{monte_carlo, MonteCarloOptions};
use cyclemeter::series::{
    expect_dnk, expect_log_o, expect_log_y, mgf_log_y, p_dnk_zero, LogWeightTable, Truncation,
};
use cyclemeter::weights::{parse_weight_spec, WeightModel};
use cyclemeter::Error;
use num_complex::Complex64;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    CapacityError = 4,
    RangeError = 5,
    DomainError = 6,
    NumericRangeError = 7,
    OverflowError = 8,
    InternalError = 9,
}

/// Truncation selector for the order statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmTruncation {
    /// No truncation (b = n).
    Full = 0,
    /// The canonical threshold b_n = n / ln^2 n.
    Bn = 1,
    /// Explicit threshold passed separately.
    At = 2,
}

/// Functional selector for Monte Carlo runs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmFunctional {
    LogY = 0,
    LogO = 1,
    Delta = 2,
    LogYTrunc = 3,
    LogOTrunc = 4,
    /// Cycle count of the divisor class passed in `k`.
    DCount = 5,
}

/// Summary statistics of a Monte Carlo run (plain value struct).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmSampleStats {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    pub min: f64,
    pub max: f64,
}

/// Opaque weight model handle.
pub struct CmModel(WeightModel);
/// Opaque normalization table handle.
pub struct CmHTable(LogWeightTable);
/// Opaque von Mangoldt table handle.
pub struct CmMangoldt(MangoldtTable);
/// Opaque zeta-zeros table handle.
pub struct CmZeros(ZetaZeros);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> CmStatus {
    match err {
        Error::Parse(_) | Error::Definition(_) | Error::Data(_) => CmStatus::ParseError,
        Error::Capacity(_) => CmStatus::CapacityError,
        Error::Range(_) => CmStatus::RangeError,
        Error::Domain(_) | Error::Classification(_) | Error::Validation(_) => CmStatus::DomainError,
        Error::NumericRange(_) => CmStatus::NumericRangeError,
        Error::Overflow(_) => CmStatus::OverflowError,
        Error::Representation(_) | Error::Io(_) => CmStatus::InternalError,
    }
}

fn run<T>(f: impl FnOnce() -> Result<T, Error>, sink: impl FnOnce(T)) -> CmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            sink(v);
            CmStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            CmStatus::InternalError
        }
    }
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Crate version as a static string.
#[no_mangle]
pub extern "C" fn cm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, CmStatus> {
    if ptr.is_null() {
        return Err(CmStatus::NullPointer);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| CmStatus::InvalidUtf8)
}

fn trunc_of(mode: CmTruncation, threshold: usize) -> Truncation {
    match mode {
        CmTruncation::Full => Truncation::Full,
        CmTruncation::Bn => Truncation::Bn,
        CmTruncation::At => Truncation::At(threshold),
    }
}

/// Parse a weight-spec string (`uniform`, `ewens:<t>`, `poly:<g>`, ...).
///
/// # Safety
/// `spec` must be a valid NUL-terminated string and `out` a writable
/// pointer. The returned handle must be released with `cm_model_free`.
#[no_mangle]
pub unsafe extern "C" fn cm_model_parse(spec: *const c_char, out: *mut *mut CmModel) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    let spec = match read_str(spec) {
        Ok(s) => s,
        Err(st) => return st,
    };
    run(
        || parse_weight_spec(spec),
        |m| *out = Box::into_raw(Box::new(CmModel(m))),
    )
}

/// # Safety
/// `model` must come from `cm_model_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cm_model_free(model: *mut CmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Build the normalization table h_0..h_limit for a model.
///
/// # Safety
/// `model` must be a live handle, `out` writable; free the result with
/// `cm_htable_free`.
#[no_mangle]
pub unsafe extern "C" fn cm_htable_build(
    model: *const CmModel,
    limit: usize,
    out: *mut *mut CmHTable,
) -> CmStatus {
    if model.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    let model = &(*model).0;
    run(
        || LogWeightTable::build(model, limit),
        |t| *out = Box::into_raw(Box::new(CmHTable(t))),
    )
}

/// # Safety
/// `table` must come from `cm_htable_build` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cm_htable_free(table: *mut CmHTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Largest index stored in the table.
///
/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_htable_limit(table: *const CmHTable) -> usize {
    if table.is_null() {
        return 0;
    }
    (*table).0.limit()
}

/// log h_n.
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_htable_log_h(
    table: *const CmHTable,
    n: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    let t = &(*table).0;
    if n > t.limit() {
        set_error("index exceeds table limit");
        return CmStatus::RangeError;
    }
    *out = t.log_h(n);
    CmStatus::Ok
}

/// Sieve von Mangoldt values up to `limit`.
///
/// # Safety
/// `out` must be writable; free the result with `cm_mangoldt_free`.
#[no_mangle]
pub unsafe extern "C" fn cm_mangoldt_build(limit: usize, out: *mut *mut CmMangoldt) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || MangoldtTable::build(limit),
        |t| *out = Box::into_raw(Box::new(CmMangoldt(t))),
    )
}

/// # Safety
/// `table` must come from `cm_mangoldt_build` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cm_mangoldt_free(table: *mut CmMangoldt) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Chebyshev psi(x).
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_mangoldt_psi(
    table: *const CmMangoldt,
    x: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    run(|| (*table).0.psi(x), |v| *out = v)
}

/// Lambda(k).
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_mangoldt_lambda(
    table: *const CmMangoldt,
    k: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    let t = &(*table).0;
    if k > t.limit() {
        set_error("index exceeds table limit");
        return CmStatus::RangeError;
    }
    *out = t.lambda(k);
    CmStatus::Ok
}

/// The bundled table of the first 100 zeta zeros.
///
/// # Safety
/// `out` must be writable; free the result with `cm_zeros_free`.
#[no_mangle]
pub unsafe extern "C" fn cm_zeros_bundled(out: *mut *mut CmZeros) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    *out = Box::into_raw(Box::new(CmZeros(ZetaZeros::bundled())));
    CmStatus::Ok
}

/// Load a zeros table from a text file (`#` comments, ascending positives).
///
/// # Safety
/// `path` must be a valid NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_zeros_load(path: *const c_char, out: *mut *mut CmZeros) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    let path = match read_str(path) {
        Ok(s) => s,
        Err(st) => return st,
    };
    run(
        || ZetaZeros::load(Path::new(path)),
        |z| *out = Box::into_raw(Box::new(CmZeros(z))),
    )
}

/// # Safety
/// `zeros` must come from a `cm_zeros_*` constructor and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn cm_zeros_free(zeros: *mut CmZeros) {
    if !zeros.is_null() {
        drop(Box::from_raw(zeros));
    }
}

/// Number of zeros in the table.
///
/// # Safety
/// `zeros` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_zeros_count(zeros: *const CmZeros) -> usize {
    if zeros.is_null() {
        return 0;
    }
    (*zeros).0.count()
}

/// E[log Y_n] (truncated per the selector).
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_expect_log_y(
    table: *const CmHTable,
    n: usize,
    trunc: CmTruncation,
    threshold: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || expect_log_y(&(*table).0, n, trunc_of(trunc, threshold)),
        |v| *out = v,
    )
}

/// E[log O_n] (truncated per the selector).
///
/// # Safety
/// `table` and `mangoldt` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_expect_log_o(
    table: *const CmHTable,
    mangoldt: *const CmMangoldt,
    n: usize,
    trunc: CmTruncation,
    threshold: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || mangoldt.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || expect_log_o(&(*table).0, &(*mangoldt).0, n, trunc_of(trunc, threshold)),
        |v| *out = v,
    )
}

/// `E[D_nk]`.
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_expect_dnk(
    table: *const CmHTable,
    n: usize,
    k: usize,
    trunc: CmTruncation,
    threshold: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || expect_dnk(&(*table).0, n, k, trunc_of(trunc, threshold)),
        |v| *out = v,
    )
}

/// P(D*_nk = 0).
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_p_dnk_zero(
    table: *const CmHTable,
    n: usize,
    k: usize,
    trunc: CmTruncation,
    threshold: usize,
    out: *mut f64,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || p_dnk_zero(&(*table).0, n, k, trunc_of(trunc, threshold)),
        |v| *out = v,
    )
}

/// E[e^{(s_re + i s_im) log Y_n}], truncated per the selector.
///
/// # Safety
/// `table` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_mgf_log_y(
    table: *const CmHTable,
    n: usize,
    s_re: f64,
    s_im: f64,
    trunc: CmTruncation,
    threshold: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CmStatus {
    if table.is_null() || out_re.is_null() || out_im.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || {
            mgf_log_y(
                &(*table).0,
                n,
                Complex64::new(s_re, s_im),
                trunc_of(trunc, threshold),
            )
        },
        |v| {
            *out_re = v.re;
            *out_im = v.im;
        },
    )
}

/// Explicit-formula psi(x) over the zeros table.
///
/// # Safety
/// `zeros` must be a live handle; `out_value` and `out_residue` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_psi_explicit(
    zeros: *const CmZeros,
    x: f64,
    out_value: *mut f64,
    out_residue: *mut f64,
) -> CmStatus {
    if zeros.is_null() || out_value.is_null() || out_residue.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || psi_explicit(x, &(*zeros).0),
        |v| {
            *out_value = v.value;
            *out_residue = v.imag_residue;
        },
    )
}

/// Fenchel-Legendre rate function of the generalized-Ewens family
/// (vartheta-scaled when `scaled` is nonzero).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_rate_function_ge(
    theta: f64,
    x: f64,
    scaled: i32,
    out: *mut f64,
) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    let scaling = if scaled != 0 {
        ThetaScaling::Scaled
    } else {
        ThetaScaling::StrictPaper
    };
    run(
        || rate_function(RateFamily::GeneralizedEwens { theta }, x, scaling),
        |v| *out = v,
    )
}

/// Fenchel-Legendre rate function of the polynomial family.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_rate_function_poly(gamma: f64, x: f64, out: *mut f64) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || rate_function(RateFamily::Polynomial { gamma }, x, ThetaScaling::Scaled),
        |v| *out = v,
    )
}

/// Precise-deviations main term for the generalized-Ewens family; also
/// reports sigma_n^2.
///
/// # Safety
/// `out_probability` and `out_scale` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_precise_dev_ge(
    theta: f64,
    x: f64,
    n: usize,
    out_probability: *mut f64,
    out_scale: *mut f64,
) -> CmStatus {
    if out_probability.is_null() || out_scale.is_null() {
        return CmStatus::NullPointer;
    }
    run(
        || precise_dev(RateFamily::GeneralizedEwens { theta }, x, n),
        |v| {
            *out_probability = v.probability;
            *out_scale = v.scale_param;
        },
    )
}

/// Central limit standardization (L - (t/2) log^2 n)/sqrt((t/3) log^3 n).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_erdos_turan_standardize(
    l: f64,
    n: usize,
    theta: f64,
    out: *mut f64,
) -> CmStatus {
    if out.is_null() {
        return CmStatus::NullPointer;
    }
    run(|| erdos_turan_standardize(l, n, theta), |v| *out = v)
}

/// Deterministic Monte Carlo over a functional; fills a value struct.
/// `mangoldt` may be NULL for functionals that do not need it. `k` is only
/// read for `CmFunctional::DCount`.
///
/// # Safety
/// `table` must be a live handle, `mangoldt` NULL or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_monte_carlo(
    table: *const CmHTable,
    mangoldt: *const CmMangoldt,
    functional: CmFunctional,
    k: usize,
    n: usize,
    samples: u64,
    seed: u64,
    workers: usize,
    out: *mut CmSampleStats,
) -> CmStatus {
    if table.is_null() || out.is_null() {
        return CmStatus::NullPointer;
    }
    let func = match functional {
        CmFunctional::LogY => Functional::LogY,
        CmFunctional::LogO => Functional::LogO,
        CmFunctional::Delta => Functional::Delta,
        CmFunctional::LogYTrunc => Functional::LogYTrunc,
        CmFunctional::LogOTrunc => Functional::LogOTrunc,
        CmFunctional::DCount => Functional::DCount { k },
    };
    let mang = if mangoldt.is_null() {
        None
    } else {
        Some(&(*mangoldt).0)
    };
    run(
        || {
            monte_carlo(
                func,
                &(*table).0,
                mang,
                n,
                samples,
                &MonteCarloOptions {
                    seed,
                    workers,
                    keep_raw: false,
                    ..Default::default()
                },
            )
        },
        |s| {
            *out = CmSampleStats {
                count: s.count,
                mean: s.mean,
                variance: s.variance,
                se: s.se,
                min: s.min,
                max: s.max,
            };
        },
    )
}
