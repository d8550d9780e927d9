//! C ABI for `soliton-lab`.
//!
//! Every fallible function returns an [`SlStatus`]; on failure a message is
//! kept per thread and can be copied out with [`sl_last_error_message`].
//! Objects are opaque handles released with their matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use soliton_lab::curvature::curvature_from_ratios;
use soliton_lab::dims::{classify, DimBounds, Verdict};
use soliton_lab::identities::{elliptic_monitor, hamilton_monitor};
use soliton_lab::riccati::{blowup_time, reduce, solve_riccati, CaseTag};
use soliton_lab::{
    flat, CoefficientConvention, DiagonalProfile, Error, FlatSolitonState, FlatTrajectory,
    IntegrateOptions, Termination, Tolerances,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    Parameter = 2,
    Domain = 3,
    Numeric = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlConvention {
    Corrected = 0,
    AsPrinted = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlTermination {
    ReachedEnd = 0,
    BlowUpDetected = 1,
    StepUnderflow = 2,
    WarpCollapse = 3,
    StepLimit = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlCaseTag {
    CZero = 0,
    CPositive = 1,
    CNegative = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlVerdict {
    ExceedsKobayashi = 0,
    ConstantCurvatureMax = 1,
    ExceedsSolitonMax = 2,
    SolitonMax = 3,
    ForbiddenGap = 4,
    GapRuleInapplicable = 5,
    Allowed = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlDimBounds {
    pub kobayashi: u64,
    pub soliton_max: u64,
    pub gap_ceiling: u64,
}

/// Summary of a closed-form steady solution. Unbounded ends are `±INFINITY`,
/// absent poles are `NAN`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlClosedForm {
    pub case_tag: i32,
    pub riccati_constant: f64,
    pub domain_start: f64,
    pub domain_end: f64,
    pub blowup_forward: f64,
    pub blowup_backward: f64,
}

/// Opaque flat-system trajectory.
pub struct SlFlatTrajectory(FlatTrajectory);

/// Opaque diagonal profile.
pub struct SlProfile(DiagonalProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SlStatus, msg: impl Into<String>) -> SlStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SlStatus {
    let status = match e {
        Error::NonPositiveWarping { .. } | Error::OutsideDomain { .. } => SlStatus::Domain,
        _ => SlStatus::Parameter,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`SlStatus::Panic`].
fn guard(f: impl FnOnce() -> SlStatus) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SlStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        return Some(&[]);
    }
    if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL;
/// 0 when there is no message.
///
/// # Safety
/// `buf` must be null or writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Scalar curvature and `Ric(N,N)` of a diagonal metric at one point, from
/// `m` warping factors and their first and second derivatives.
///
/// # Safety
/// `h`, `h_prime`, `h_double_prime` must point to `m` doubles; outputs must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sl_curvature_diagonal(
    m: usize,
    h: *const f64,
    h_prime: *const f64,
    h_double_prime: *const f64,
    out_scalar: *mut f64,
    out_ric_normal: *mut f64,
) -> SlStatus {
    guard(|| {
        let (Some(h), Some(hp), Some(hpp)) =
            (slice(h, m), slice(h_prime, m), slice(h_double_prime, m))
        else {
            return fail(SlStatus::NullPointer, "null input array");
        };
        if out_scalar.is_null() || out_ric_normal.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        if m < 2 {
            return fail(SlStatus::Parameter, "need at least 2 warping factors");
        }
        if let Some(i) = h.iter().position(|v| v.is_nan() || *v <= 0.0) {
            return fail(SlStatus::Domain, format!("h[{i}] = {} is not positive", h[i]));
        }
        let u: Vec<f64> = hp.iter().zip(h).map(|(a, b)| a / b).collect();
        let r: Vec<f64> = hpp.iter().zip(h).map(|(a, b)| a / b).collect();
        let k = curvature_from_ratios(&u, &r);
        *out_scalar = k.scalar;
        *out_ric_normal = k.ric_nn;
        SlStatus::Ok
    })
}

/// Integrates the flat system from `(t0, u0, u[0..n-1])` towards `t_end`.
///
/// # Safety
/// `u` must point to `n - 1` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_flat_integrate(
    n: usize,
    lambda: f64,
    convention: SlConvention,
    t0: f64,
    u0: f64,
    u: *const f64,
    t_end: f64,
    rtol: f64,
    atol: f64,
    blowup_threshold: f64,
    out: *mut *mut SlFlatTrajectory,
) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return fail(SlStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        if n < 3 {
            return fail(SlStatus::Parameter, format!("n must be >= 3, got {n}"));
        }
        let Some(u) = slice(u, n - 1) else {
            return fail(SlStatus::NullPointer, "null u array");
        };
        let convention = match convention {
            SlConvention::Corrected => CoefficientConvention::Corrected,
            SlConvention::AsPrinted => CoefficientConvention::AsPrinted,
        };
        let opts = IntegrateOptions {
            tolerances: Tolerances {
                rel: rtol,
                abs: atol,
            },
            blowup_threshold,
            ..Default::default()
        };
        let initial = FlatSolitonState::new(t0, u0, u.to_vec());
        match flat::integrate(&initial, lambda, n, convention, t_end, &opts) {
            Ok(traj) => {
                let numeric = matches!(
                    traj.termination(),
                    Termination::StepUnderflow | Termination::StepLimit
                );
                *out = Box::into_raw(Box::new(SlFlatTrajectory(traj)));
                if numeric {
                    fail(SlStatus::Numeric, "integration stopped without blow-up")
                } else {
                    SlStatus::Ok
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of stored samples; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle from [`sl_flat_integrate`].
#[no_mangle]
pub unsafe extern "C" fn sl_flat_trajectory_len(traj: *const SlFlatTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Sample `index`: time, `u0`, and `n - 1` fiber components into `out_u`.
///
/// # Safety
/// `traj` must be a live handle; outputs must be writable (`out_u` for `n - 1` doubles).
#[no_mangle]
pub unsafe extern "C" fn sl_flat_trajectory_state(
    traj: *const SlFlatTrajectory,
    index: usize,
    out_t: *mut f64,
    out_u0: *mut f64,
    out_u: *mut f64,
) -> SlStatus {
    guard(|| {
        let Some(traj) = traj.as_ref() else {
            return fail(SlStatus::NullPointer, "null trajectory");
        };
        if out_t.is_null() || out_u0.is_null() || out_u.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        let samples = &traj.0.result.samples;
        let Some(s) = samples.get(index) else {
            return fail(
                SlStatus::Parameter,
                format!("index {index} out of range (len {})", samples.len()),
            );
        };
        let n = traj.0.n;
        *out_t = s.t;
        *out_u0 = s.y[0];
        ptr::copy_nonoverlapping(s.y[1..n].as_ptr(), out_u, n - 1);
        SlStatus::Ok
    })
}

/// Termination reason, or -1 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_flat_trajectory_termination(traj: *const SlFlatTrajectory) -> i32 {
    let Some(traj) = traj.as_ref() else {
        return -1;
    };
    let t = match traj.0.termination() {
        Termination::ReachedEnd => SlTermination::ReachedEnd,
        Termination::BlowUpDetected => SlTermination::BlowUpDetected,
        Termination::StepUnderflow => SlTermination::StepUnderflow,
        Termination::WarpCollapse => SlTermination::WarpCollapse,
        Termination::StepLimit => SlTermination::StepLimit,
    };
    t as i32
}

/// Estimated blow-up time, or `NAN` when none was detected or `traj` is null.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_flat_trajectory_blowup(traj: *const SlFlatTrajectory) -> f64 {
    traj.as_ref()
        .and_then(|t| t.0.blowup_estimate())
        .unwrap_or(f64::NAN)
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_flat_trajectory_free(traj: *mut SlFlatTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Reconstructs the metric and potential along a trajectory.
///
/// # Safety
/// `traj` must be a live handle, `h0` must point to `n - 1` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_flat_reconstruct(
    traj: *const SlFlatTrajectory,
    h0: *const f64,
    f0: f64,
    out: *mut *mut SlProfile,
) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return fail(SlStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let Some(traj) = traj.as_ref() else {
            return fail(SlStatus::NullPointer, "null trajectory");
        };
        let Some(h0) = slice(h0, traj.0.n - 1) else {
            return fail(SlStatus::NullPointer, "null h0 array");
        };
        match flat::reconstruct(&traj.0, h0, f0) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SlProfile(p)));
                SlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Hamilton drift `max |Q − Q(t₀)|` along a profile.
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_profile_hamilton_drift(profile: *const SlProfile, out: *mut f64) -> SlStatus {
    guard(|| {
        let Some(p) = profile.as_ref() else {
            return fail(SlStatus::NullPointer, "null profile");
        };
        if out.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        match hamilton_monitor(&p.0) {
            Ok(r) => {
                *out = r.hamilton_drift.unwrap_or(f64::NAN);
                SlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Elliptic identity residual along a profile (at least 5 samples).
///
/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_profile_elliptic_residual(profile: *const SlProfile, out: *mut f64) -> SlStatus {
    guard(|| {
        let Some(p) = profile.as_ref() else {
            return fail(SlStatus::NullPointer, "null profile");
        };
        if out.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        match elliptic_monitor(&p.0) {
            Ok(r) => {
                *out = r.elliptic_residual.unwrap_or(f64::NAN);
                SlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `profile` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_profile_free(profile: *mut SlProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Closed-form steady solution through `(t0, u0, u[0..m])`.
///
/// # Safety
/// `u` must point to `m` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_closed_form(
    m: usize,
    u0: f64,
    u: *const f64,
    t0: f64,
    out: *mut SlClosedForm,
) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        let Some(u) = slice(u, m) else {
            return fail(SlStatus::NullPointer, "null u array");
        };
        if m < 2 {
            return fail(SlStatus::Parameter, "need at least 2 fiber components");
        }
        let red = reduce(&FlatSolitonState::new(t0, u0, u.to_vec()));
        let sol = match solve_riccati(&red, t0) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        *out = SlClosedForm {
            case_tag: match sol.case_tag {
                CaseTag::CZero => SlCaseTag::CZero,
                CaseTag::CPositive => SlCaseTag::CPositive,
                CaseTag::CNegative => SlCaseTag::CNegative,
            } as i32,
            riccati_constant: red.c(),
            domain_start: sol.domain.0,
            domain_end: sol.domain.1,
            blowup_forward: blowup_time(&sol, 1).unwrap_or(f64::NAN),
            blowup_backward: blowup_time(&sol, -1).unwrap_or(f64::NAN),
        };
        SlStatus::Ok
    })
}

/// Classifies an isometry-algebra dimension `d` on an `n`-manifold.
///
/// # Safety
/// `out_verdict` must be writable; `out_bounds` may be null.
#[no_mangle]
pub unsafe extern "C" fn sl_dims_classify(
    n: u64,
    d: u64,
    out_verdict: *mut SlVerdict,
    out_bounds: *mut SlDimBounds,
) -> SlStatus {
    guard(|| {
        if out_verdict.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        let v = match classify(n, d) {
            Ok(v) => v,
            Err(e) => return from_error(e),
        };
        *out_verdict = match v.verdict {
            Verdict::ExceedsKobayashi => SlVerdict::ExceedsKobayashi,
            Verdict::ConstantCurvatureMax => SlVerdict::ConstantCurvatureMax,
            Verdict::ExceedsSolitonMax => SlVerdict::ExceedsSolitonMax,
            Verdict::SolitonMax => SlVerdict::SolitonMax,
            Verdict::ForbiddenGap => SlVerdict::ForbiddenGap,
            Verdict::GapRuleInapplicable => SlVerdict::GapRuleInapplicable,
            Verdict::Allowed => SlVerdict::Allowed,
        };
        if !out_bounds.is_null() {
            *out_bounds = bounds(v.bounds);
        }
        SlStatus::Ok
    })
}

fn bounds(b: DimBounds) -> SlDimBounds {
    SlDimBounds {
        kobayashi: b.kobayashi,
        soliton_max: b.soliton_max,
        gap_ceiling: b.gap_ceiling,
    }
}

/// The three dimension bounds for `n >= 3`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_dims_bounds(n: u64, out: *mut SlDimBounds) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return fail(SlStatus::NullPointer, "null output pointer");
        }
        match DimBounds::new(n) {
            Ok(b) => {
                *out = bounds(b);
                SlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
