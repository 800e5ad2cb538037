use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive parameter sequence indexed by round `t ≥ 1`.
///
/// Index `0` returns the value at `t = 1`, so a learning-rate schedule
/// starts with `η_0 = η_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// `values[t - 1]` for `t ≥ 1`.
    Explicit {
        values: Vec<f64>,
    },
    /// `√(ln(d t) / t)` for `t ≥ 3`, frozen at its `t = 3` value before that.
    LogRoot {
        dimension: usize,
    },
    /// `min(1, scale / t)`.
    Harmonic {
        scale: f64,
    },
    /// `scale / √t`.
    InverseSqrt {
        scale: f64,
    },
}

impl Schedule {
    pub fn value(&self, t: usize) -> Result<f64> {
        let t = t.max(1);
        match self {
            Schedule::Constant { value } => Ok(*value),
            Schedule::Explicit { values } => {
                values.get(t - 1).copied().ok_or(Error::LengthMismatch {
                    what: "explicit schedule",
                    expected: t,
                    found: values.len(),
                })
            }
            Schedule::LogRoot { dimension } => Ok(anytime_schedule(*dimension, t).0),
            Schedule::Harmonic { scale } => Ok((scale / t as f64).min(1.0)),
            Schedule::InverseSqrt { scale } => Ok(scale / (t as f64).sqrt()),
        }
    }

    /// Checks positivity and monotonicity over rounds `1..=horizon`.
    pub fn validate(&self, name: &'static str, horizon: usize) -> Result<()> {
        match self {
            Schedule::Constant { value } if !(*value >= 0.0 && value.is_finite()) => {
                return Err(Error::InvalidParameter {
                    name,
                    value: *value,
                    reason: "schedule values must be finite and nonnegative",
                })
            }
            Schedule::Harmonic { scale } | Schedule::InverseSqrt { scale }
                if !(*scale > 0.0 && scale.is_finite()) =>
            {
                return Err(Error::InvalidParameter {
                    name,
                    value: *scale,
                    reason: "schedule scale must be finite and positive",
                })
            }
            Schedule::LogRoot { dimension } if *dimension < 2 => {
                return Err(Error::InvalidParameter {
                    name,
                    value: *dimension as f64,
                    reason: "log-root schedule needs dimension >= 2",
                })
            }
            Schedule::Explicit { values } => {
                if let Some(&value) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(Error::InvalidParameter {
                        name,
                        value,
                        reason: "schedule values must be finite and nonnegative",
                    });
                }
            }
            _ => {}
        }
        let horizon = match self {
            Schedule::Explicit { values } => horizon.min(values.len()),
            _ => horizon,
        };
        let mut previous = self.value(1)?;
        for t in 2..=horizon {
            let current = self.value(t)?;
            if current > previous {
                return Err(Error::ScheduleViolation {
                    name,
                    round: t,
                    previous,
                    current,
                });
            }
            previous = current;
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant { .. })
    }
}

/// Anytime tuning `(η_t, α_t) = (√(ln(d t)/t), 1/t)` with `η_t` clamped to
/// `η_3` for `t < 3`; `t = 0` follows the same clamp.
pub fn anytime_schedule(d: usize, t: usize) -> (f64, f64) {
    let te = t.max(3) as f64;
    let eta = ((d as f64 * te).ln() / te).sqrt();
    let alpha = 1.0 / t.max(1) as f64;
    (eta, alpha)
}
