//! Closed-form regret bounds and the parameter tunings that minimize them.
//!
//! Terms of the form `c · ln(x)` with `c = 0` evaluate to zero even when the
//! logarithm diverges, so boundary parameters are usable whenever the
//! comparator does not need the diverging term. A diverging term with a
//! positive coefficient is an error.

use serde::Serialize;

use crate::error::{check_nonneg, check_positive, check_unit_interval, Error, Result};
use crate::forecaster::anytime_schedule;
use crate::simplex::{binary_entropy, compensated_sum};

/// A tuned `(η, α)` pair and the bound it guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tuning {
    pub eta: f64,
    pub alpha: f64,
    pub bound: f64,
}

/// `coef · ln(x)` with `0 · ln(anything) = 0`.
fn weighted_ln(name: &'static str, coef: f64, x: f64) -> Result<f64> {
    if coef == 0.0 {
        return Ok(0.0);
    }
    let v = coef * x.ln();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            value: x,
            reason: "logarithmic term diverges with a positive coefficient",
        })
    }
}

/// `coef · ln(1/(1 − α))`.
fn weighted_keep_ln(coef: f64, alpha: f64) -> Result<f64> {
    if coef == 0.0 {
        return Ok(0.0);
    }
    let v = -coef * (-alpha).ln_1p();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "ln(1/(1 - alpha)) diverges with a positive coefficient",
        })
    }
}

fn check_dimension(d: usize) -> Result<f64> {
    if d == 0 {
        Err(Error::EmptyVector)
    } else {
        Ok(d as f64)
    }
}

fn check_caps(m0: f64, u0: f64) -> Result<()> {
    check_positive("m0", m0)?;
    check_positive("u0", u0)?;
    if m0 > u0 {
        return Err(Error::InvalidParameter {
            name: "m0",
            value: m0,
            reason: "must not exceed u0",
        });
    }
    Ok(())
}

/// Comparator statistics entering a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparatorTerms {
    /// `m(u)`
    pub m: f64,
    /// `Σ_t ‖u_t‖_1`
    pub u_sum: f64,
    /// `‖u_1‖_1`
    pub u1_norm: f64,
}

impl ComparatorTerms {
    fn validate(&self) -> Result<()> {
        check_nonneg("m", self.m)?;
        check_nonneg("u_sum", self.u_sum)?;
        check_nonneg("u1_norm", self.u1_norm)
    }

    /// `Σ_{t≥2} ‖u_t‖_1 − m(u)`, floored at zero against rounding.
    fn tail_minus_m(&self) -> f64 {
        (self.u_sum - self.u1_norm - self.m).max(0.0)
    }
}

impl From<crate::regret::ComparatorStats> for ComparatorTerms {
    fn from(s: crate::regret::ComparatorStats) -> Self {
        Self {
            m: s.m,
            u_sum: s.u_sum,
            u1_norm: s.u1_norm,
        }
    }
}

/// Projected share bound
/// `‖u_1‖ ln d/η + m ln(d/α)/η + (η/8 + α) Σ‖u_t‖`.
pub fn bound_projected(d: usize, eta: f64, alpha: f64, c: ComparatorTerms) -> Result<f64> {
    let df = check_dimension(d)?;
    check_positive("eta", eta)?;
    check_unit_interval("alpha", alpha)?;
    c.validate()?;
    Ok(c.u1_norm * df.ln() / eta
        + weighted_ln("alpha", c.m, df / alpha)? / eta
        + (eta / 8.0 + alpha) * c.u_sum)
}

/// Fixed share bound
/// `‖u_1‖ ln d/η + η Σ‖u_t‖/8 + m ln(d/α)/η + (Σ_{t≥2}‖u_t‖ − m) ln(1/(1−α))/η`.
pub fn bound_fixed_share(d: usize, eta: f64, alpha: f64, c: ComparatorTerms) -> Result<f64> {
    let df = check_dimension(d)?;
    check_positive("eta", eta)?;
    check_unit_interval("alpha", alpha)?;
    c.validate()?;
    Ok(c.u1_norm * df.ln() / eta
        + eta * c.u_sum / 8.0
        + weighted_ln("alpha", c.m, df / alpha)? / eta
        + weighted_keep_ln(c.tail_minus_m(), alpha)? / eta)
}

/// Fixed share bound relaxed to the caps `‖u_1‖ + m ≤ m_0` and
/// `Σ‖u_t‖ ≤ U_0`:
/// `(m_0 ln d + m_0 ln(1/α) + (U_0 − m_0) ln(1/(1−α)))/η + η U_0/8`.
///
/// Dominates [`bound_fixed_share`] for every comparator within the caps as
/// long as `α ≤ 1/2`.
pub fn fixed_share_envelope(d: usize, eta: f64, alpha: f64, m0: f64, u0: f64) -> Result<f64> {
    let df = check_dimension(d)?;
    check_positive("eta", eta)?;
    check_unit_interval("alpha", alpha)?;
    check_caps(m0, u0)?;
    Ok(
        (m0 * df.ln() + weighted_ln("alpha", m0, 1.0 / alpha)? + weighted_keep_ln(u0 - m0, alpha)?)
            / eta
            + eta * u0 / 8.0,
    )
}

/// Minimizer of [`fixed_share_envelope`]: `α* = m_0/U_0`,
/// `B = m_0 ln d + U_0 h(m_0/U_0)`, `η* = √(8B/U_0)`, bound `√(U_0 B/2)`.
pub fn tune_fixed_share(d: usize, m0: f64, u0: f64) -> Result<Tuning> {
    let df = check_dimension(d)?;
    check_caps(m0, u0)?;
    let alpha = m0 / u0;
    let b = m0 * df.ln() + u0 * binary_entropy(alpha)?;
    if b <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "d",
            value: df,
            reason: "bound is degenerate for d = 1 with m0 = u0",
        });
    }
    Ok(Tuning {
        eta: (8.0 * b / u0).sqrt(),
        alpha,
        bound: (u0 * b / 2.0).sqrt(),
    })
}

/// `√(U_0 m_0/2 · (ln d + ln(e U_0/m_0)))`, an upper bound on the tuned
/// fixed share bound.
pub fn fixed_share_relaxed(d: usize, m0: f64, u0: f64) -> Result<f64> {
    let df = check_dimension(d)?;
    check_caps(m0, u0)?;
    Ok((u0 * m0 / 2.0 * (df.ln() + 1.0 + (u0 / m0).ln())).sqrt())
}

/// Adaptive regret bound over windows of length `τ_0`, returned as
/// `(exact, relaxed)` with exact `√(τ_0/2 (τ_0 h(1/τ_0) + ln d))` and relaxed
/// `√(τ_0/2 ln(e d τ_0))`.
pub fn bound_adaptive(d: usize, tau0: usize) -> Result<(f64, f64)> {
    let df = check_dimension(d)?;
    if tau0 < 1 {
        return Err(Error::InvalidParameter {
            name: "tau0",
            value: tau0 as f64,
            reason: "must be at least 1",
        });
    }
    let t = tau0 as f64;
    let exact = (t / 2.0 * (t * binary_entropy(1.0 / t)? + df.ln())).sqrt();
    let relaxed = (t / 2.0 * (1.0 + df.ln() + t.ln())).sqrt();
    Ok((exact, relaxed))
}

/// Small-loss bound `√(L_0 m_0 B′) + B′` with `B′ = ln d + ln(e U_0/m_0)`,
/// tuned with `α* = m_0/U_0` and `η* = ln(1 + √(2 m_0 B′/L_0))`.
///
/// For `L_0 = 0` the rate is infinite; callers must then pick a finite rate
/// themselves.
pub fn tune_small_loss(d: usize, m0: f64, u0: f64, l0: f64) -> Result<Tuning> {
    let df = check_dimension(d)?;
    check_caps(m0, u0)?;
    check_nonneg("l0", l0)?;
    let b = df.ln() + 1.0 + (u0 / m0).ln();
    let eta = if l0 == 0.0 {
        f64::INFINITY
    } else {
        (2.0 * m0 * b / l0).sqrt().ln_1p()
    };
    Ok(Tuning {
        eta,
        alpha: m0 / u0,
        bound: (l0 * m0 * b).sqrt() + b,
    })
}

/// Parameters of a pre-weight share run entering its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BwParams {
    pub d: usize,
    pub horizon: usize,
    pub eta: f64,
    pub alpha: f64,
    /// `C ≥ 1` with `C w_{t+1} ≥ w_t`
    pub c: f64,
    /// `max_{t ≤ T} Z_t`
    pub z_max: f64,
}

/// Pre-weight share bound
/// `n ln d/η + n T ln C/η + η Σ‖u_t‖/8 + m ln(Z_max/α)/η
///   + (Σ_{t≥2}‖u_t‖ − m) ln(1/(1−α))/η`.
pub fn bound_bw(p: BwParams, c: ComparatorTerms, n: f64) -> Result<f64> {
    let df = check_dimension(p.d)?;
    check_positive("eta", p.eta)?;
    check_unit_interval("alpha", p.alpha)?;
    check_positive("z_max", p.z_max)?;
    if !(p.c >= 1.0 && p.c.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: p.c,
            reason: "must be a finite real >= 1",
        });
    }
    check_nonneg("n", n)?;
    c.validate()?;
    Ok(n * df.ln() / p.eta
        + n * p.horizon as f64 * p.c.ln() / p.eta
        + p.eta * c.u_sum / 8.0
        + weighted_ln("alpha", c.m, p.z_max / p.alpha)? / p.eta
        + weighted_keep_ln(c.tail_minus_m(), p.alpha)? / p.eta)
}

fn check_horizon(horizon: usize) -> Result<f64> {
    if horizon == 0 {
        Err(Error::EmptySequence("horizon"))
    } else {
        Ok(horizon as f64)
    }
}

/// Numerator `A` of the running-maximum share bound on distribution
/// comparators, which reads `A/η + ηT/8`.
fn bw_max_numerator(d: usize, horizon: usize, alpha: f64, m: f64, n: f64) -> Result<f64> {
    let df = check_dimension(d)?;
    let t = check_horizon(horizon)?;
    check_unit_interval("alpha", alpha)?;
    check_nonneg("m", m)?;
    check_nonneg("n", n)?;
    Ok(n * df.ln()
        + weighted_ln("alpha", m, t / alpha)?
        + weighted_keep_ln((t - m - 1.0).max(0.0), alpha)?)
}

/// Running-maximum share bound for distribution comparators
/// `n ln d/η + ηT/8 + m ln(T/α)/η + (T − m − 1) ln(1/(1−α))/η`.
pub fn bound_bw_max(d: usize, horizon: usize, eta: f64, alpha: f64, m: f64, n: f64) -> Result<f64> {
    check_positive("eta", eta)?;
    Ok(bw_max_numerator(d, horizon, alpha, m, n)? / eta + eta * horizon as f64 / 8.0)
}

/// Decay rate `γ = m_0/(n_0 T)` of the decayed-maximum share.
pub fn decay_rate(m0: f64, n0: f64, horizon: usize) -> Result<f64> {
    check_positive("m0", m0)?;
    check_positive("n0", n0)?;
    Ok(m0 / (n0 * check_horizon(horizon)?))
}

fn bw_decayed_numerator(d: usize, horizon: usize, alpha: f64, m0: f64, n0: f64) -> Result<f64> {
    let df = check_dimension(d)?;
    let t = check_horizon(horizon)?;
    check_unit_interval("alpha", alpha)?;
    check_positive("m0", m0)?;
    check_positive("n0", n0)?;
    Ok(n0 * df.ln()
        + m0 * (1.0 + df.min(n0 * t / m0).ln())
        + weighted_ln("alpha", m0, 1.0 / alpha)?
        + weighted_keep_ln((t - m0 - 1.0).max(0.0), alpha)?)
}

/// Decayed-maximum share bound with `γ = m_0/(n_0 T)`, for distribution
/// comparators with `m ≤ m_0` and `n ≤ n_0`:
/// `n_0 ln d/η + m_0(1 + ln min{d, n_0 T/m_0})/η + ηT/8 + m_0 ln(1/α)/η
///   + (T − m_0 − 1) ln(1/(1−α))/η`.
pub fn bound_bw_decayed(
    d: usize,
    horizon: usize,
    eta: f64,
    alpha: f64,
    m0: f64,
    n0: f64,
) -> Result<f64> {
    check_positive("eta", eta)?;
    Ok(bw_decayed_numerator(d, horizon, alpha, m0, n0)? / eta + eta * horizon as f64 / 8.0)
}

fn tune_numerator(
    horizon: usize,
    m: f64,
    numerator: impl Fn(f64) -> Result<f64>,
) -> Result<Tuning> {
    let t = check_horizon(horizon)?;
    if horizon < 2 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: t,
            reason: "tuning needs at least two rounds",
        });
    }
    let alpha = (m / (t - 1.0)).min(1.0);
    let a = numerator(alpha)?;
    let eta = (8.0 * a / t).sqrt();
    check_positive("eta", eta)?;
    Ok(Tuning {
        eta,
        alpha,
        bound: (a * t / 2.0).sqrt(),
    })
}

/// `α = m/(T − 1)` and `η = √(8A/T)` for the running-maximum share bound
/// `A/η + ηT/8`.
pub fn tune_bw_max(d: usize, horizon: usize, m: f64, n: f64) -> Result<Tuning> {
    tune_numerator(horizon, m, |alpha| {
        bw_max_numerator(d, horizon, alpha, m, n)
    })
}

/// `α = m_0/(T − 1)` and `η = √(8A/T)` for the decayed-maximum share bound.
pub fn tune_bw_decayed(d: usize, horizon: usize, m0: f64, n0: f64) -> Result<Tuning> {
    tune_numerator(horizon, m0, |alpha| {
        bw_decayed_numerator(d, horizon, alpha, m0, n0)
    })
}

/// Time-varying fixed share bound. `etas[t-1] = η_t` and `alphas[t-1] = α_t`
/// for `t = 1..=T`, `u_norms[t-1] = ‖u_t‖_1`, and `η_0 = η_1`:
///
/// `(‖u_1‖/η_1 + Σ_{t≥2} ‖u_t‖(1/η_t − 1/η_{t−1})) ln d
///   + m/η_T ln(d(1−α_T)/α_T) + Σ_{t≥2} ‖u_t‖/η_{t−1} ln(1/(1−α_t))
///   + Σ_t η_{t−1} ‖u_t‖/8`.
pub fn bound_time_varying(
    d: usize,
    etas: &[f64],
    alphas: &[f64],
    m: f64,
    u_norms: &[f64],
) -> Result<f64> {
    let df = check_dimension(d)?;
    let horizon = u_norms.len();
    if horizon == 0 {
        return Err(Error::EmptySequence("comparator norms"));
    }
    for (what, len) in [
        ("eta schedule", etas.len()),
        ("alpha schedule", alphas.len()),
    ] {
        if len != horizon {
            return Err(Error::LengthMismatch {
                what,
                expected: horizon,
                found: len,
            });
        }
    }
    check_nonneg("m", m)?;
    for (t, w) in etas.windows(2).enumerate() {
        if w[1] > w[0] {
            return Err(Error::ScheduleViolation {
                name: "eta",
                round: t + 2,
                previous: w[0],
                current: w[1],
            });
        }
    }
    for (t, w) in alphas.windows(2).enumerate() {
        if w[1] > w[0] {
            return Err(Error::ScheduleViolation {
                name: "alpha",
                round: t + 2,
                previous: w[0],
                current: w[1],
            });
        }
    }
    for &e in etas {
        check_positive("eta", e)?;
    }
    for &a in alphas {
        check_unit_interval("alpha", a)?;
    }
    for &u in u_norms {
        check_nonneg("u_norm", u)?;
    }

    let rate_term = u_norms[0] / etas[0]
        + compensated_sum((1..horizon).map(|t| u_norms[t] * (1.0 / etas[t] - 1.0 / etas[t - 1])));
    let a_last = alphas[horizon - 1];
    let switch_term = if m == 0.0 {
        0.0
    } else {
        weighted_ln("alpha", m, df * (1.0 - a_last) / a_last)? / etas[horizon - 1]
    };
    let mut keep_terms = Vec::with_capacity(horizon);
    for t in 1..horizon {
        keep_terms.push(weighted_keep_ln(u_norms[t], alphas[t])? / etas[t - 1]);
    }
    let hoeffding =
        compensated_sum((0..horizon).map(|t| etas[t.saturating_sub(1)] * u_norms[t] / 8.0));
    Ok(rate_term * df.ln() + switch_term + compensated_sum(keep_terms) + hoeffding)
}

/// [`bound_time_varying`] with the anytime schedule and a comparator that
/// is a corner on one interval and zero elsewhere (`‖u_t‖ ≤ 1`, `m ≤ 1`),
/// maximized over intervals: evaluated with all norms one and `m = 1`.
pub fn bound_time_varying_anytime(d: usize, horizon: usize) -> Result<f64> {
    check_horizon(horizon)?;
    let (etas, alphas): (Vec<f64>, Vec<f64>) =
        (1..=horizon).map(|t| anytime_schedule(d, t)).unzip();
    bound_time_varying(d, &etas, &alphas, 1.0, &vec![1.0; horizon])
}

/// Closed-form interval regret bound of the anytime schedule,
/// `√(2T ln(dT)) + √(3 ln(3d))`, valid for `T ≥ 3`.
pub fn anytime_interval_bound(d: usize, horizon: usize) -> Result<f64> {
    let df = check_dimension(d)?;
    let t = check_horizon(horizon)?;
    Ok((2.0 * t * (df * t).ln()).sqrt() + (3.0 * (3.0 * df).ln()).sqrt())
}
