//! The generalized share forecaster.
//!
//! Each round plays `p_t`, observes `ℓ_t ∈ [0,1]^d`, forms the pre-weights
//! `v_{t+1} ∝ p_t e^{−η ℓ_t}` and hands them to a mixing function that
//! returns `p_{t+1}`. Weights go through the log domain so that long runs
//! with large `η` neither underflow nor lose the relative scale of tiny
//! coordinates.

pub mod certificates;
mod mixing;
mod schedule;

use serde::{Deserialize, Serialize};

pub use mixing::{
    mix_bw, mix_fixed_share, mix_projected, BwVariant, MixingRule, ShareUpdate, SharedPlay,
    SharedWeights,
};
pub use schedule::{anytime_schedule, Schedule};

use crate::error::{check_positive, check_unit_interval, Error, Result};
use crate::simplex::{check_dims, compensated_sum, Distribution};

/// A loss vector of `[0,1]^d`. Out-of-range entries are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::LossOutOfRange { index, value });
            }
        }
        Ok(Self(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for LossVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for LossVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<LossVector> for Vec<f64> {
    fn from(value: LossVector) -> Self {
        value.0
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        self.as_slice()
    }
}

/// Output of the exponential loss update in both domains.
struct LogUpdate {
    log_weights: Vec<f64>,
    weights: Distribution,
    log_normalizer: f64,
}

/// `log v_i = exponent · log p_i − η ℓ_i − log Σ_j exp(exponent · log p_j − η ℓ_j)`.
fn log_loss_update(log_play: &[f64], loss: &[f64], eta: f64, exponent: f64) -> LogUpdate {
    let raw: Vec<f64> = log_play
        .iter()
        .zip(loss)
        .map(|(&lp, &l)| exponent * lp - eta * l)
        .collect();
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass = compensated_sum(raw.iter().map(|&x| (x - max).exp()));
    let log_normalizer = max + mass.ln();
    let log_weights: Vec<f64> = raw.iter().map(|&x| x - log_normalizer).collect();
    let weights =
        Distribution::from_weights_unchecked(raw.iter().map(|&x| (x - max).exp()).collect());
    LogUpdate {
        log_weights,
        weights,
        log_normalizer,
    }
}

fn ln_entries(p: &Distribution) -> Vec<f64> {
    p.as_slice().iter().map(|x| x.ln()).collect()
}

/// Exponential-weights loss update `v_j ∝ p_j e^{−η ℓ_j}`.
pub fn loss_update(p: &Distribution, loss: &LossVector, eta: f64) -> Result<Distribution> {
    check_positive("eta", eta)?;
    check_dims(p.dim(), loss.dim())?;
    Ok(log_loss_update(&ln_entries(p), loss.as_slice(), eta, 1.0).weights)
}

/// One round of the time-varying forecaster:
/// `v_j ∝ p_j^{η_t/η_{t−1}} e^{−η_t ℓ_j}` and `p'_j = α_t/d + (1 − α_t) v_j`.
///
/// Returns `(p_next, v_next)`.
pub fn step_time_varying(
    p: &Distribution,
    loss: &LossVector,
    eta_t: f64,
    eta_prev: f64,
    alpha_t: f64,
) -> Result<(Distribution, Distribution)> {
    check_positive("eta_t", eta_t)?;
    check_positive("eta_prev", eta_prev)?;
    check_unit_interval("alpha_t", alpha_t)?;
    check_dims(p.dim(), loss.dim())?;
    if eta_t > eta_prev {
        return Err(Error::ScheduleViolation {
            name: "eta",
            round: 0,
            previous: eta_prev,
            current: eta_t,
        });
    }
    let update = log_loss_update(&ln_entries(p), loss.as_slice(), eta_t, eta_t / eta_prev);
    let next = mix_fixed_share(&update.weights, alpha_t)?;
    Ok((next, update.weights))
}

#[derive(Debug, Clone)]
enum LearningRate {
    Fixed(f64),
    Scheduled(Schedule),
}

impl LearningRate {
    /// `(η_t, η_{t−1})`
    fn at(&self, t: usize) -> Result<(f64, f64)> {
        match self {
            LearningRate::Fixed(eta) => Ok((*eta, *eta)),
            LearningRate::Scheduled(s) => {
                let current = s.value(t)?;
                let previous = s.value(t - 1)?;
                check_positive("eta", current)?;
                if current > previous {
                    return Err(Error::ScheduleViolation {
                        name: "eta",
                        round: t,
                        previous,
                        current,
                    });
                }
                Ok((current, previous))
            }
        }
    }
}

/// Everything recorded about one round `t`.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    /// `p_t`
    pub play: Distribution,
    pub log_play: Vec<f64>,
    /// `v_{t+1}`
    pub pre_weights: Distribution,
    pub log_pre_weights: Vec<f64>,
    /// `ln Σ_j p_j^{η_t/η_{t−1}} e^{−η_t ℓ_j}`
    pub log_normalizer: f64,
    /// `p_t · ℓ_t`
    pub realized_loss: f64,
    pub eta: f64,
    pub eta_prev: f64,
    /// Mass shared when forming `p_{t+1}`.
    pub alpha: f64,
    /// `w_{t+1}` and `Z_{t+1}` for the pre-weight share family.
    pub shared: Option<SharedWeights>,
}

impl AsRef<[f64]> for RoundRecord {
    fn as_ref(&self) -> &[f64] {
        self.play.as_slice()
    }
}

/// A full run: one record per round plus the play `p_{T+1}`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rounds: Vec<RoundRecord>,
    pub next_play: Distribution,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn dim(&self) -> usize {
        self.next_play.dim()
    }

    pub fn plays(&self) -> Vec<Distribution> {
        self.rounds.iter().map(|r| r.play.clone()).collect()
    }

    pub fn realized_losses(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.realized_loss).collect()
    }

    /// Largest `Z_t` over `t = 1..=T`, including `Z_1 = 1`.
    pub fn max_shared_mass(&self) -> Option<f64> {
        let mut zs = self
            .rounds
            .iter()
            .filter_map(|r| r.shared.as_ref().map(|s| s.z))
            .peekable();
        zs.peek()?;
        // Z_{T+1} belongs to the unplayed round
        let count = self.rounds.len().saturating_sub(1);
        Some(zs.take(count).fold(1.0, f64::max))
    }
}

/// Single-owner forecaster state: current play, pre-weights and the mixing
/// function's own summary (at most `O(d)` numbers).
pub struct Forecaster {
    d: usize,
    round: usize,
    play: Distribution,
    log_play: Vec<f64>,
    pre_weights: Distribution,
    learning: LearningRate,
    share: Box<dyn ShareUpdate>,
}

impl std::fmt::Debug for Forecaster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Forecaster")
            .field("d", &self.d)
            .field("round", &self.round)
            .field("play", &self.play)
            .finish_non_exhaustive()
    }
}

impl Forecaster {
    /// `eta` is ignored by [`MixingRule::TimeVarying`], which carries its own
    /// schedule.
    pub fn new(d: usize, rule: &MixingRule, eta: f64) -> Result<Self> {
        let share = rule.share_update(d)?;
        let learning = match rule {
            MixingRule::TimeVarying { eta, .. } => LearningRate::Scheduled(eta.clone()),
            _ => {
                check_positive("eta", eta)?;
                LearningRate::Fixed(eta)
            }
        };
        Self::build(d, learning, share)
    }

    /// Forecaster with a caller-supplied mixing function.
    pub fn with_share(d: usize, eta: f64, share: Box<dyn ShareUpdate>) -> Result<Self> {
        check_positive("eta", eta)?;
        Self::build(d, LearningRate::Fixed(eta), share)
    }

    fn build(d: usize, learning: LearningRate, share: Box<dyn ShareUpdate>) -> Result<Self> {
        let play = Distribution::uniform(d)?;
        Ok(Self {
            d,
            round: 0,
            log_play: ln_entries(&play),
            pre_weights: play.clone(),
            play,
            learning,
            share,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of completed rounds.
    pub fn rounds_played(&self) -> usize {
        self.round
    }

    /// The play for the upcoming round.
    pub fn play(&self) -> &Distribution {
        &self.play
    }

    /// The latest pre-weights.
    pub fn pre_weights(&self) -> &Distribution {
        &self.pre_weights
    }

    /// Plays the current weights against `loss` and advances one round.
    pub fn step(&mut self, loss: &LossVector) -> Result<RoundRecord> {
        check_dims(self.d, loss.dim())?;
        let t = self.round + 1;
        let (eta, eta_prev) = self.learning.at(t)?;
        let realized_loss = self.play.dot(loss.as_slice());

        let update = log_loss_update(&self.log_play, loss.as_slice(), eta, eta / eta_prev);
        let shared = self.share.share(t, &update.weights)?;
        check_dims(self.d, shared.play.dim())?;
        let next_log_play = if shared.alpha == 0.0 {
            update.log_weights.clone()
        } else {
            ln_entries(&shared.play)
        };

        let record = RoundRecord {
            play: std::mem::replace(&mut self.play, shared.play),
            log_play: std::mem::replace(&mut self.log_play, next_log_play),
            pre_weights: update.weights.clone(),
            log_pre_weights: update.log_weights,
            log_normalizer: update.log_normalizer,
            realized_loss,
            eta,
            eta_prev,
            alpha: shared.alpha,
            shared: shared.shared,
        };
        self.pre_weights = update.weights;
        self.round = t;
        Ok(record)
    }

    /// Runs over a loss sequence, returning the full trajectory.
    pub fn run(&mut self, losses: &[LossVector]) -> Result<Trajectory> {
        let mut rounds = Vec::with_capacity(losses.len());
        for loss in losses {
            rounds.push(self.step(loss)?);
        }
        Ok(Trajectory {
            rounds,
            next_play: self.play.clone(),
        })
    }
}

/// Runs the forecaster from the uniform start over `losses`.
pub fn run_forecaster(rule: &MixingRule, eta: f64, losses: &[LossVector]) -> Result<Trajectory> {
    let first = losses
        .first()
        .ok_or(Error::EmptySequence("loss sequence"))?;
    let mut forecaster = Forecaster::new(first.dim(), rule, eta)?;
    forecaster.run(losses)
}
