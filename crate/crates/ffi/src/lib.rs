//! C ABI over the `jcr` library.
//!
//! Objects are exposed as opaque handles created by `jcr_*_new`-style
//! constructors and released with the matching `*_free`. Every fallible call
//! returns a [`JcrStatus`]; the message for the most recent failure on the
//! calling thread is available from [`jcr_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use jcr::harness::{self, CoverageReport, ExportFormat, Method, NoiseSpec, SimConfig};
use jcr::linmod::{self, CyclicShiftJcr, Omega, PermutationJcr, RegressionData};
use jcr::region::{AnalyticRegion, Axis, BandRegion, GridRegion};
use jcr::JcrError;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfWindow = 3,
    GridMismatch = 4,
    RankDeficient = 5,
    GroupTooLarge = 6,
    Parse = 7,
    Io = 8,
    Internal = 9,
    Panic = 10,
}

/// Opaque rasterized region.
pub struct JcrGridRegion(GridRegion);

/// Opaque closed-form region: a band in `(θ, y)` or a θ-strip.
pub struct JcrBand(AnalyticRegion);

/// Opaque coverage report.
pub struct JcrReport(CoverageReport);

/// Parameters of a band `lower <= y - slope*θ - intercept <= upper`.
/// Infinite bounds are represented by IEEE infinities.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JcrBandParams {
    pub slope: f64,
    pub intercept: f64,
    pub lower: f64,
    pub upper: f64,
    /// 1 when the region is a θ-strip `[lower, upper]` with no y constraint.
    pub is_strip: i32,
}

/// Summary fields of a coverage report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JcrReportFields {
    pub trials: u64,
    pub hits: u64,
    pub rate: f64,
    pub cp_lo: f64,
    pub cp_hi: f64,
    pub alpha: f64,
    pub seed: u64,
}

/// Evenly spaced axis `lo, ..., hi` with `count >= 2` points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcrAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &JcrError) -> JcrStatus {
    match err {
        JcrError::InvalidParameter(_)
        | JcrError::InvalidGrid(_)
        | JcrError::Unknown { .. }
        | JcrError::EmptySample
        | JcrError::MissingQuantile(_)
        | JcrError::Decomposition(_) => JcrStatus::InvalidArgument,
        JcrError::OutOfWindow { .. } => JcrStatus::OutOfWindow,
        JcrError::GridMismatch => JcrStatus::GridMismatch,
        JcrError::RankDeficient => JcrStatus::RankDeficient,
        JcrError::GroupTooLarge { .. } => JcrStatus::GroupTooLarge,
        JcrError::Parse { .. } | JcrError::Json(_) => JcrStatus::Parse,
        JcrError::Io { .. } => JcrStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> JcrStatus
where
    F: FnOnce() -> Result<(), (JcrStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JcrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            JcrStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (JcrStatus, String)>;
}

impl<T> IntoFfi<T> for jcr::Result<T> {
    fn ffi(self) -> Result<T, (JcrStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (JcrStatus, String) {
    (JcrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (JcrStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (JcrStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (JcrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (JcrStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn axis(a: JcrAxis) -> Result<Axis, (JcrStatus, String)> {
    Axis::new(a.lo, a.hi, a.count).ffi()
}

unsafe fn univariate(x: *const f64, y: *const f64, n: usize, x_te: f64) -> Result<RegressionData, (JcrStatus, String)> {
    let x = slice(x, n, "x")?;
    let y = slice(y, n, "y")?;
    RegressionData::univariate(x, y, x_te, None).ffi()
}

/// Copies the last error message on this thread into `buf` (NUL terminated,
/// truncated to `len`). Returns the full message length in bytes, or 0 when
/// there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn jcr_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn jcr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Two-sided Clopper–Pearson interval for `hits` successes in `trials`.
///
/// # Safety
/// `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_clopper_pearson(hits: u64, trials: u64, conf: f64, lo: *mut f64, hi: *mut f64) -> JcrStatus {
    guard(|| {
        let (a, b) = harness::clopper_pearson(hits, trials, conf).ffi()?;
        put(lo, a, "lo")?;
        put(hi, b, "hi")
    })
}

/// Normal-mean band indexed by `omega`; `omega_is_inf != 0` selects the
/// infinite limit and ignores `omega`.
///
/// # Safety
/// `y` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_normal_mean_omega(
    y: *const f64,
    n: usize,
    omega: f64,
    omega_is_inf: i32,
    alpha: f64,
    out: *mut *mut JcrBand,
) -> JcrStatus {
    guard(|| {
        let y = slice(y, n, "y")?;
        let w = if omega_is_inf != 0 { Omega::Infinity } else { Omega::Finite(omega) };
        let band = linmod::normal_mean_omega_jcr(y, w, alpha).ffi()?;
        put(out, Box::into_raw(Box::new(JcrBand(AnalyticRegion::Band(band)))), "out")
    })
}

/// Student-t band `(y_te − x_te θ)/S ∈ [t_{α/2}, t_{1−α/2}]` for the
/// one-feature model `y_i = x_i θ + ε_i`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_gaussian_pivot_band(
    x: *const f64,
    y: *const f64,
    n: usize,
    x_te: f64,
    alpha: f64,
    out: *mut *mut JcrBand,
) -> JcrStatus {
    guard(|| {
        let data = univariate(x, y, n, x_te)?;
        let band = linmod::gaussian_pivot_band(&data, alpha).ffi()?;
        put(out, Box::into_raw(Box::new(JcrBand(AnalyticRegion::Band(band)))), "out")
    })
}

/// Weighted t-band with weights `w` (length `n`) on the calibration outcomes
/// and `w_te` on the test outcome. Returns a strip when `w_te == 0`.
///
/// # Safety
/// `x`, `y` and `w` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_weighted_t_band(
    x: *const f64,
    y: *const f64,
    n: usize,
    x_te: f64,
    w: *const f64,
    w_te: f64,
    alpha: f64,
    out: *mut *mut JcrBand,
) -> JcrStatus {
    guard(|| {
        let data = univariate(x, y, n, x_te)?;
        let weights = linmod::WeightVector {
            w: slice(w, n, "w")?.to_vec(),
            w_te,
        };
        let region = linmod::weighted_t_band(&data, &weights, alpha).ffi()?;
        put(out, Box::into_raw(Box::new(JcrBand(region))), "out")
    })
}

/// # Safety
/// `band` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_band_params(band: *const JcrBand, out: *mut JcrBandParams) -> JcrStatus {
    guard(|| {
        let band = band.as_ref().ok_or_else(|| null("band"))?;
        let p = match band.0 {
            AnalyticRegion::Band(BandRegion {
                slope,
                intercept,
                lower,
                upper,
            }) => JcrBandParams {
                slope,
                intercept,
                lower,
                upper,
                is_strip: 0,
            },
            AnalyticRegion::Strip(s) => JcrBandParams {
                lower: s.lower,
                upper: s.upper,
                is_strip: 1,
                ..Default::default()
            },
        };
        put(out, p, "out")
    })
}

/// Writes 1 to `inside` when `(theta, y)` lies in the band, else 0.
///
/// # Safety
/// `band` must be a live handle; `inside` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_band_contains(band: *const JcrBand, theta: f64, y: f64, inside: *mut i32) -> JcrStatus {
    guard(|| {
        let band = band.as_ref().ok_or_else(|| null("band"))?;
        put(inside, band.0.contains(theta, y) as i32, "inside")
    })
}

/// Rasterizes the band on the given grids.
///
/// # Safety
/// `band` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_band_rasterize(
    band: *const JcrBand,
    theta_axis: JcrAxis,
    y_axis: JcrAxis,
    out: *mut *mut JcrGridRegion,
) -> JcrStatus {
    guard(|| {
        let band = band.as_ref().ok_or_else(|| null("band"))?;
        let g = band.0.rasterize(axis(theta_axis)?, axis(y_axis)?);
        put(out, Box::into_raw(Box::new(JcrGridRegion(g))), "out")
    })
}

/// # Safety
/// `band` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jcr_band_free(band: *mut JcrBand) {
    if !band.is_null() {
        drop(Box::from_raw(band));
    }
}

/// Cyclic-shift region with `α₁ = α/2`, `α₂ = 1 − α/2`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_cyclic_shift_region(
    x: *const f64,
    y: *const f64,
    n: usize,
    x_te: f64,
    alpha: f64,
    theta_axis: JcrAxis,
    y_axis: JcrAxis,
    out: *mut *mut JcrGridRegion,
) -> JcrStatus {
    guard(|| {
        let data = univariate(x, y, n, x_te)?;
        let g = CyclicShiftJcr::symmetric(&data, alpha).ffi()?.region(axis(theta_axis)?, axis(y_axis)?);
        put(out, Box::into_raw(Box::new(JcrGridRegion(g))), "out")
    })
}

/// Randomized permutation region with `k` sampled permutations.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_permutation_region(
    x: *const f64,
    y: *const f64,
    n: usize,
    x_te: f64,
    alpha: f64,
    k: usize,
    seed: u64,
    theta_axis: JcrAxis,
    y_axis: JcrAxis,
    out: *mut *mut JcrGridRegion,
) -> JcrStatus {
    guard(|| {
        let data = univariate(x, y, n, x_te)?;
        let g = PermutationJcr::new(&data, alpha, k, seed)
            .ffi()?
            .region(axis(theta_axis)?, axis(y_axis)?);
        put(out, Box::into_raw(Box::new(JcrGridRegion(g))), "out")
    })
}

/// Product of the level `1 − α/2` confidence and prediction intervals.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_intersection_region(
    x: *const f64,
    y: *const f64,
    n: usize,
    x_te: f64,
    alpha: f64,
    theta_axis: JcrAxis,
    y_axis: JcrAxis,
    out: *mut *mut JcrGridRegion,
) -> JcrStatus {
    guard(|| {
        let data = univariate(x, y, n, x_te)?;
        let g = linmod::intersection_jcr(&data, alpha).ffi()?.rasterize(axis(theta_axis)?, axis(y_axis)?);
        put(out, Box::into_raw(Box::new(JcrGridRegion(g))), "out")
    })
}

/// Grid sizes along θ and y.
///
/// # Safety
/// `region` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_grid_region_dims(
    region: *const JcrGridRegion,
    theta_count: *mut usize,
    y_count: *mut usize,
) -> JcrStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        put(theta_count, r.0.theta_grid().count(), "theta_count")?;
        put(y_count, r.0.y_grid().count(), "y_count")
    })
}

/// Membership of cell `(i, j)`, θ index first.
///
/// # Safety
/// `region` must be a live handle; `inside` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_grid_region_cell(region: *const JcrGridRegion, i: usize, j: usize, inside: *mut i32) -> JcrStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        if i >= r.0.theta_grid().count() || j >= r.0.y_grid().count() {
            return Err((JcrStatus::OutOfWindow, format!("cell ({i}, {j}) outside the grid")));
        }
        put(inside, r.0.cell(i, j) as i32, "inside")
    })
}

/// Membership of the nearest cell to `(theta, y)`.
///
/// # Safety
/// `region` must be a live handle; `inside` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_grid_region_contains(region: *const JcrGridRegion, theta: f64, y: f64, inside: *mut i32) -> JcrStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        let v = r.0.contains(theta, y).ffi()?;
        put(inside, v as i32, "inside")
    })
}

/// Number of cells inside the region.
///
/// # Safety
/// `region` must be a live handle; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_grid_region_count_inside(region: *const JcrGridRegion, count: *mut usize) -> JcrStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        put(count, r.0.count_inside(), "count")
    })
}

/// Writes the region to `path`; the format follows the extension (`.json`
/// or CSV otherwise).
///
/// # Safety
/// `region` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn jcr_grid_region_export(region: *const JcrGridRegion, path: *const c_char) -> JcrStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        let path = Path::new(text(path, "path")?);
        harness::export_region(&r.0, path, ExportFormat::from_path(path)).ffi()
    })
}

/// # Safety
/// `region` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jcr_grid_region_free(region: *mut JcrGridRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Coverage simulation on the default regression design (`x_i ~ U[0, 1]`,
/// `x_te = 5`, `θ = 1`, `K = 500`) with the given sample size. `method` and
/// `noise` use the command-line spellings. Multi-report methods return the
/// first report.
///
/// # Safety
/// `method` and `noise` must be NUL-terminated strings; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_simulate(
    method: *const c_char,
    noise: *const c_char,
    n: usize,
    alpha: f64,
    trials: u64,
    seed: u64,
    out: *mut *mut JcrReport,
) -> JcrStatus {
    guard(|| {
        let method: Method = text(method, "method")?.parse().ffi()?;
        let noise: NoiseSpec = text(noise, "noise")?.parse().ffi()?;
        let mut cfg = SimConfig::table1(method, noise, alpha, trials, seed);
        cfg.n = n;
        let report = harness::run_coverage_sim(&cfg).ffi()?.remove(0);
        put(out, Box::into_raw(Box::new(JcrReport(report))), "out")
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_report_fields(report: *const JcrReport, out: *mut JcrReportFields) -> JcrStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        put(
            out,
            JcrReportFields {
                trials: r.trials,
                hits: r.hits,
                rate: r.rate,
                cp_lo: r.cp_lo,
                cp_hi: r.cp_hi,
                alpha: r.alpha,
                seed: r.seed,
            },
            "out",
        )
    })
}

/// Report as JSON in a newly allocated string; release it with
/// [`jcr_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jcr_report_json(report: *const JcrReport, out: *mut *mut c_char) -> JcrStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let s = CString::new(r.to_json()).map_err(|e| (JcrStatus::Internal, e.to_string()))?;
        put(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jcr_report_free(report: *mut JcrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jcr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
