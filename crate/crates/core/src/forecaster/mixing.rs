//! Mixing functions: the shared update that turns pre-weights `v_{t+1}` into
//! the next play `p_{t+1}`.

use serde::{Deserialize, Serialize};

use super::schedule::Schedule;
use crate::error::{check_positive, check_unit_interval, Result};
use crate::simplex::{
    check_dims, compensated_sum, kl_project_clipped, ClippedSimplex, Distribution,
};

/// Declarative choice of mixing function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingRule {
    /// `p = α/d + (1 − α) v`.
    FixedShare { alpha: f64 },
    /// KL projection of `v` onto `Δ_d^α`.
    Projected { alpha: f64 },
    /// Share toward the running maximum of past pre-weights.
    BwMax { alpha: f64 },
    /// Share toward the `e^{−γ}`-decayed running maximum of past pre-weights.
    BwDecayed { alpha: f64, gamma: f64 },
    /// Fixed share with round-dependent `η_t` and `α_t`.
    TimeVarying { eta: Schedule, alpha: Schedule },
}

impl MixingRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            MixingRule::FixedShare { alpha }
            | MixingRule::Projected { alpha }
            | MixingRule::BwMax { alpha } => check_unit_interval("alpha", *alpha),
            MixingRule::BwDecayed { alpha, gamma } => {
                check_unit_interval("alpha", *alpha)?;
                check_positive("gamma", *gamma)
            }
            MixingRule::TimeVarying { eta, alpha } => {
                // Finite prefix check; later rounds are checked as they are played.
                eta.validate("eta", 16)?;
                alpha.validate("alpha", 16)?;
                check_positive("eta", eta.value(1)?)?;
                check_unit_interval("alpha", alpha.value(1)?)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MixingRule::FixedShare { .. } => "fixed_share",
            MixingRule::Projected { .. } => "projected",
            MixingRule::BwMax { .. } => "bw_max",
            MixingRule::BwDecayed { .. } => "bw_decayed",
            MixingRule::TimeVarying { .. } => "time_varying",
        }
    }

    /// Constant `C` in `C w_{t+1} ≥ w_t` for the pre-weight share family.
    pub fn bw_constant(&self) -> Option<f64> {
        match self {
            MixingRule::BwMax { .. } => Some(1.0),
            MixingRule::BwDecayed { gamma, .. } => Some(gamma.exp()),
            _ => None,
        }
    }

    pub(crate) fn share_update(&self, d: usize) -> Result<Box<dyn ShareUpdate>> {
        self.validate()?;
        Ok(match self {
            MixingRule::FixedShare { alpha } => Box::new(FixedShare { alpha: *alpha }),
            MixingRule::Projected { alpha } => Box::new(Projected {
                params: ClippedSimplex::new(*alpha, d)?,
            }),
            MixingRule::BwMax { alpha } => Box::new(PreWeightShare::new(d, *alpha, BwVariant::Max)),
            MixingRule::BwDecayed { alpha, gamma } => Box::new(PreWeightShare::new(
                d,
                *alpha,
                BwVariant::Decayed { gamma: *gamma },
            )),
            MixingRule::TimeVarying { alpha, .. } => Box::new(ScheduledFixedShare {
                alpha: alpha.clone(),
            }),
        })
    }
}

/// Auxiliary weights of the pre-weight share family after a mixing step.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedWeights {
    /// `w_{t+1}`
    pub w: Vec<f64>,
    /// `Z_{t+1} = Σ_j w_{j,t+1}`
    pub z: f64,
}

#[derive(Debug, Clone)]
pub struct SharedPlay {
    pub play: Distribution,
    /// Fraction of mass redistributed; `0` means the play equals the
    /// pre-weights exactly.
    pub alpha: f64,
    pub shared: Option<SharedWeights>,
}

/// A mixing function `ψ_{t+1}` that keeps whatever summary of past
/// pre-weights it needs.
pub trait ShareUpdate: Send {
    /// Maps `v_{t+1}`, produced at the end of round `round = t`, to `p_{t+1}`.
    fn share(&mut self, round: usize, pre_weights: &Distribution) -> Result<SharedPlay>;
}

/// `p_j = α/d + (1 − α) v_j`.
pub fn mix_fixed_share(v: &Distribution, alpha: f64) -> Result<Distribution> {
    check_unit_interval("alpha", alpha)?;
    Ok(fixed_share_unchecked(v, alpha))
}

fn fixed_share_unchecked(v: &Distribution, alpha: f64) -> Distribution {
    if alpha == 0.0 {
        return v.clone();
    }
    let floor = alpha / v.dim() as f64;
    let keep = 1.0 - alpha;
    Distribution::from_weights_unchecked(v.as_slice().iter().map(|x| floor + keep * x).collect())
}

/// KL projection onto `Δ_d^α`.
pub fn mix_projected(v: &Distribution, alpha: f64) -> Result<Distribution> {
    kl_project_clipped(v, &ClippedSimplex::new(alpha, v.dim())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BwVariant {
    /// `w_{t+1} = max(w_t, v_{t+1})`
    Max,
    /// `w_{t+1} = max(e^{−γ} w_t, v_{t+1})`
    Decayed { gamma: f64 },
}

impl BwVariant {
    pub fn constant(&self) -> f64 {
        match self {
            BwVariant::Max => 1.0,
            BwVariant::Decayed { gamma } => gamma.exp(),
        }
    }
}

/// One pre-weight share step: updates `w` to include `v_next`, then mixes
/// `p = (1 − α) v_next + α w / Z`.
pub fn mix_bw(
    w: &[f64],
    v_next: &Distribution,
    alpha: f64,
    variant: BwVariant,
) -> Result<(Distribution, SharedWeights)> {
    check_unit_interval("alpha", alpha)?;
    check_dims(w.len(), v_next.dim())?;
    let decay = match variant {
        BwVariant::Max => 1.0,
        BwVariant::Decayed { gamma } => {
            check_positive("gamma", gamma)?;
            (-gamma).exp()
        }
    };
    let w_next: Vec<f64> = w
        .iter()
        .zip(v_next.as_slice())
        .map(|(&wj, &vj)| (decay * wj).max(vj))
        .collect();
    let z = compensated_sum(w_next.iter().copied());
    let play = if alpha == 0.0 {
        v_next.clone()
    } else {
        Distribution::from_weights_unchecked(
            v_next
                .as_slice()
                .iter()
                .zip(&w_next)
                .map(|(&vj, &wj)| (1.0 - alpha) * vj + alpha * wj / z)
                .collect(),
        )
    };
    Ok((play, SharedWeights { w: w_next, z }))
}

pub(crate) struct FixedShare {
    pub alpha: f64,
}

impl ShareUpdate for FixedShare {
    fn share(&mut self, _round: usize, v: &Distribution) -> Result<SharedPlay> {
        Ok(SharedPlay {
            play: fixed_share_unchecked(v, self.alpha),
            alpha: self.alpha,
            shared: None,
        })
    }
}

pub(crate) struct ScheduledFixedShare {
    pub alpha: Schedule,
}

impl ShareUpdate for ScheduledFixedShare {
    fn share(&mut self, round: usize, v: &Distribution) -> Result<SharedPlay> {
        let alpha = self.alpha.value(round)?;
        check_unit_interval("alpha", alpha)?;
        Ok(SharedPlay {
            play: fixed_share_unchecked(v, alpha),
            alpha,
            shared: None,
        })
    }
}

pub(crate) struct Projected {
    pub params: ClippedSimplex,
}

impl ShareUpdate for Projected {
    fn share(&mut self, _round: usize, v: &Distribution) -> Result<SharedPlay> {
        Ok(SharedPlay {
            play: kl_project_clipped(v, &self.params)?,
            alpha: self.params.alpha(),
            shared: None,
        })
    }
}

/// Pre-weight share with `O(d)` state.
pub(crate) struct PreWeightShare {
    alpha: f64,
    variant: BwVariant,
    w: Vec<f64>,
}

impl PreWeightShare {
    /// Starts from `w_1 = v_1 = (1/d, …, 1/d)`.
    pub fn new(d: usize, alpha: f64, variant: BwVariant) -> Self {
        Self {
            alpha,
            variant,
            w: vec![1.0 / d as f64; d],
        }
    }
}

impl ShareUpdate for PreWeightShare {
    fn share(&mut self, _round: usize, v: &Distribution) -> Result<SharedPlay> {
        let (play, shared) = mix_bw(&self.w, v, self.alpha, self.variant)?;
        self.w.clone_from(&shared.w);
        Ok(SharedPlay {
            play,
            alpha: self.alpha,
            shared: Some(shared),
        })
    }
}
