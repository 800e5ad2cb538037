//! C ABI over the genshare forecasters, projections and bounds.
//!
//! Every function returns a [`GsStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read with
//! [`gs_last_error_message`]. Arrays are caller-owned; matrices are row-major
//! with one row per round.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use genshare::bounds::{self, ComparatorTerms};
use genshare::forecaster::{Forecaster, LossVector, MixingRule, Schedule};
use genshare::regret::adaptive_regret;
use genshare::simplex::{self, ClippedSimplex, Distribution};
use genshare::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    LossOutOfRange = 4,
    NotADistribution = 5,
    ScheduleViolation = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsMixing {
    FixedShare = 0,
    Projected = 1,
    BwMax = 2,
    BwDecayed = 3,
    /// `η_t = √(ln(d t)/t)` and `α_t = 1/t`; `eta`, `alpha`, `gamma` are ignored.
    Anytime = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsTuning {
    pub eta: f64,
    pub alpha: f64,
    pub bound: f64,
}

/// Worst interval found by [`gs_adaptive_regret`]; rounds are 1-indexed and
/// inclusive.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsInterval {
    pub value: f64,
    pub start: usize,
    pub end: usize,
    pub corner: usize,
}

/// Opaque forecaster handle.
pub struct GsForecaster(Forecaster);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> GsStatus {
    match err {
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => {
            GsStatus::DimensionMismatch
        }
        Error::LossOutOfRange { .. } => GsStatus::LossOutOfRange,
        Error::NegativeEntry { .. }
        | Error::NotNormalized { .. }
        | Error::SupportViolation { .. } => GsStatus::NotADistribution,
        Error::ScheduleViolation { .. } => GsStatus::ScheduleViolation,
        _ => GsStatus::InvalidArgument,
    }
}

struct Null;

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<Null> for Failure {
    fn from(_: Null) -> Self {
        Failure::Null
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GsStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument");
            GsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            GsStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Null> {
    if p.is_null() {
        Err(Null)
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

unsafe fn output<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], Null> {
    if p.is_null() {
        Err(Null)
    } else {
        Ok(slice::from_raw_parts_mut(p, len))
    }
}

unsafe fn write<T>(p: *mut T, value: T) -> Result<(), Null> {
    if p.is_null() {
        Err(Null)
    } else {
        p.write(value);
        Ok(())
    }
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; empty if none failed.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a forecaster over `d` experts. Free it with [`gs_forecaster_free`].
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn gs_forecaster_new(
    rule: GsMixing,
    d: usize,
    eta: f64,
    alpha: f64,
    gamma: f64,
    out: *mut *mut GsForecaster,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Null.into());
        }
        let (rule, eta) = match rule {
            GsMixing::FixedShare => (MixingRule::FixedShare { alpha }, eta),
            GsMixing::Projected => (MixingRule::Projected { alpha }, eta),
            GsMixing::BwMax => (MixingRule::BwMax { alpha }, eta),
            GsMixing::BwDecayed => (MixingRule::BwDecayed { alpha, gamma }, eta),
            GsMixing::Anytime => {
                let rule = MixingRule::TimeVarying {
                    eta: Schedule::LogRoot { dimension: d },
                    alpha: Schedule::Harmonic { scale: 1.0 },
                };
                (rule, genshare::forecaster::anytime_schedule(d, 1).0)
            }
        };
        let f = Forecaster::new(d, &rule, eta)?;
        out.write(Box::into_raw(Box::new(GsForecaster(f))));
        Ok(())
    })
}

/// # Safety
/// `f` must come from [`gs_forecaster_new`] and not be used afterwards.
/// Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn gs_forecaster_free(f: *mut GsForecaster) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Copies the current play `p_t` into `out[0..len]`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gs_forecaster_play(
    f: *const GsForecaster,
    out: *mut f64,
    len: usize,
) -> GsStatus {
    guard(|| {
        let f = f.as_ref().ok_or(Null)?;
        let out = output(out, len)?;
        let p = f.0.play().as_slice();
        if p.len() != len {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                found: len,
            }
            .into());
        }
        out.copy_from_slice(p);
        Ok(())
    })
}

/// Feeds `loss[0..len]` and advances one round. `realized` receives
/// `p_t · ℓ_t` and may be null. A rejected loss leaves the handle unchanged.
///
/// # Safety
/// `f` must be a live handle, `loss` valid for `len` reads, `realized` null
/// or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_forecaster_step(
    f: *mut GsForecaster,
    loss: *const f64,
    len: usize,
    realized: *mut f64,
) -> GsStatus {
    guard(|| {
        let f = f.as_mut().ok_or(Null)?;
        let loss = LossVector::new(input(loss, len)?.to_vec())?;
        let record = f.0.step(&loss)?;
        if !realized.is_null() {
            realized.write(record.realized_loss);
        }
        Ok(())
    })
}

/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_forecaster_dim(f: *const GsForecaster, out: *mut usize) -> GsStatus {
    guard(|| {
        let f = f.as_ref().ok_or(Null)?;
        Ok(write(out, f.0.dim())?)
    })
}

/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_forecaster_rounds(f: *const GsForecaster, out: *mut usize) -> GsStatus {
    guard(|| {
        let f = f.as_ref().ok_or(Null)?;
        Ok(write(out, f.0.rounds_played())?)
    })
}

/// KL projection of the distribution `v` onto `{x ∈ Δ_d : x_i ≥ α/d}`.
///
/// # Safety
/// `v` valid for `d` reads, `out` valid for `d` writes.
#[no_mangle]
pub unsafe extern "C" fn gs_kl_project_clipped(
    v: *const f64,
    d: usize,
    alpha: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let v = Distribution::new(input(v, d)?.to_vec())?;
        let out = output(out, d)?;
        let p = simplex::kl_project_clipped(&v, &ClippedSimplex::new(alpha, d)?)?;
        out.copy_from_slice(p.as_slice());
        Ok(())
    })
}

/// `Σ_i max(0, x_i − y_i)` over nonnegative vectors.
///
/// # Safety
/// `x`, `y` valid for `d` reads, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_total_variation(
    x: *const f64,
    y: *const f64,
    d: usize,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let value = simplex::total_variation(input(x, d)?, input(y, d)?)?;
        Ok(write(out, value)?)
    })
}

/// # Safety
/// `x`, `y` valid for `d` reads, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_kl_divergence(
    x: *const f64,
    y: *const f64,
    d: usize,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let x = Distribution::new(input(x, d)?.to_vec())?;
        let y = Distribution::new(input(y, d)?.to_vec())?;
        Ok(write(out, simplex::kl_divergence(&x, &y)?)?)
    })
}

/// # Safety
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_binary_entropy(x: f64, out: *mut f64) -> GsStatus {
    guard(|| Ok(write(out, simplex::binary_entropy(x)?)?))
}

/// Tuned fixed share for `m(u) + ‖u_1‖ ≤ m0` and `Σ‖u_t‖ ≤ U0`.
///
/// # Safety
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_tune_fixed_share(
    d: usize,
    m0: f64,
    u0: f64,
    out: *mut GsTuning,
) -> GsStatus {
    guard(|| {
        let t = bounds::tune_fixed_share(d, m0, u0)?;
        Ok(write(
            out,
            GsTuning {
                eta: t.eta,
                alpha: t.alpha,
                bound: t.bound,
            },
        )?)
    })
}

/// Small-loss tuning; additionally needs the comparator loss cap `L0`.
///
/// # Safety
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_tune_small_loss(
    d: usize,
    m0: f64,
    u0: f64,
    l0: f64,
    out: *mut GsTuning,
) -> GsStatus {
    guard(|| {
        let t = bounds::tune_small_loss(d, m0, u0, l0)?;
        Ok(write(
            out,
            GsTuning {
                eta: t.eta,
                alpha: t.alpha,
                bound: t.bound,
            },
        )?)
    })
}

/// Regret bound of fixed share at `(η, α)` for a comparator with the given
/// `m(u)`, `Σ‖u_t‖` and `‖u_1‖`.
///
/// # Safety
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_bound_fixed_share(
    d: usize,
    eta: f64,
    alpha: f64,
    m: f64,
    u_sum: f64,
    u1_norm: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let c = ComparatorTerms { m, u_sum, u1_norm };
        Ok(write(out, bounds::bound_fixed_share(d, eta, alpha, c)?)?)
    })
}

/// Same as [`gs_bound_fixed_share`] for the projected share.
///
/// # Safety
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_bound_projected(
    d: usize,
    eta: f64,
    alpha: f64,
    m: f64,
    u_sum: f64,
    u1_norm: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let c = ComparatorTerms { m, u_sum, u1_norm };
        Ok(write(out, bounds::bound_projected(d, eta, alpha, c)?)?)
    })
}

/// Adaptive regret bound for windows of at most `tau0` rounds; `relaxed` may
/// be null.
///
/// # Safety
/// `exact` valid for a write, `relaxed` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_bound_adaptive(
    d: usize,
    tau0: usize,
    exact: *mut f64,
    relaxed: *mut f64,
) -> GsStatus {
    guard(|| {
        let (e, r) = bounds::bound_adaptive(d, tau0)?;
        write(exact, e)?;
        if !relaxed.is_null() {
            relaxed.write(r);
        }
        Ok(())
    })
}

/// Interval regret bound of the anytime schedule over `horizon` rounds.
///
/// # Safety
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_bound_anytime(d: usize, horizon: usize, out: *mut f64) -> GsStatus {
    guard(|| Ok(write(out, bounds::anytime_interval_bound(d, horizon)?)?))
}

/// Largest regret against a fixed expert over windows of at most `tau0`
/// rounds. `plays` and `losses` are `horizon × d`.
///
/// # Safety
/// `plays` and `losses` valid for `horizon * d` reads, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_adaptive_regret(
    plays: *const f64,
    losses: *const f64,
    horizon: usize,
    d: usize,
    tau0: usize,
    out: *mut GsInterval,
) -> GsStatus {
    guard(|| {
        let len = horizon.checked_mul(d).ok_or(Error::InvalidParameter {
            name: "horizon",
            value: horizon as f64,
            reason: "horizon * d overflows",
        })?;
        if d == 0 {
            return Err(Error::EmptyVector.into());
        }
        let plays: Vec<&[f64]> = input(plays, len)?.chunks(d).collect();
        let losses: Vec<&[f64]> = input(losses, len)?.chunks(d).collect();
        let r = adaptive_regret(&plays, &losses, tau0)?;
        Ok(write(
            out,
            GsInterval {
                value: r.value,
                start: r.start,
                end: r.end,
                corner: r.corner,
            },
        )?)
    })
}
