//! Seeded loss environments and comparator generators.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`: portable across
//! platforms and independent of thread scheduling, so each run is a pure
//! function of its spec and seed.

use std::fs::File;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::forecaster::{Forecaster, LossVector, Trajectory};
use crate::regret::{ComparatorSequence, DiscountSchedule};
use crate::simplex::{Distribution, NonNegVector};

/// One stationary stretch of a piecewise environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub length: usize,
    /// Per-arm Bernoulli means.
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    /// `ℓ_{i,t} ~ Bernoulli(means[i])`, independent.
    IidBernoulli { means: Vec<f64>, horizon: usize },
    /// Independent Bernoulli losses whose means change at segment boundaries.
    PiecewiseStationary { segments: Vec<Segment> },
    /// Online adversary: loss 1 on the forecaster's heaviest coordinate
    /// (ties broken at random), and `noise · U[0,1)` elsewhere.
    AdversarialFlip {
        d: usize,
        horizon: usize,
        #[serde(default)]
        noise: f64,
    },
    /// Losses read from a headerless CSV, one round per row.
    FromFile { path: PathBuf },
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentSpec::IidBernoulli { means, horizon } => {
                check_means(means)?;
                check_horizon(*horizon)
            }
            EnvironmentSpec::PiecewiseStationary { segments } => {
                let first = segments.first().ok_or(Error::EmptySequence("segments"))?;
                for s in segments {
                    check_means(&s.means)?;
                    crate::simplex::check_dims(first.means.len(), s.means.len())?;
                    check_horizon(s.length)?;
                }
                Ok(())
            }
            EnvironmentSpec::AdversarialFlip { d, horizon, noise } => {
                if *d == 0 {
                    return Err(Error::EmptyVector);
                }
                check_horizon(*horizon)?;
                check_unit_interval("noise", *noise)
            }
            EnvironmentSpec::FromFile { .. } => Ok(()),
        }
    }

    /// Segment lengths; a single segment for stationary or adversarial
    /// environments. `None` for file-backed environments, whose horizon is
    /// only known after loading.
    pub fn segment_lengths(&self) -> Option<Vec<usize>> {
        match self {
            EnvironmentSpec::IidBernoulli { horizon, .. }
            | EnvironmentSpec::AdversarialFlip { horizon, .. } => Some(vec![*horizon]),
            EnvironmentSpec::PiecewiseStationary { segments } => {
                Some(segments.iter().map(|s| s.length).collect())
            }
            EnvironmentSpec::FromFile { .. } => None,
        }
    }

    pub fn is_online(&self) -> bool {
        matches!(self, EnvironmentSpec::AdversarialFlip { .. })
    }
}

fn check_means(means: &[f64]) -> Result<()> {
    if means.is_empty() {
        return Err(Error::EmptyVector);
    }
    for &m in means {
        check_unit_interval("mean", m)?;
    }
    Ok(())
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        Err(Error::EmptySequence("horizon"))
    } else {
        Ok(())
    }
}

fn bernoulli_row(rng: &mut ChaCha8Rng, means: &[f64]) -> LossVector {
    let row = means
        .iter()
        .map(|&m| if rng.random_bool(m) { 1.0 } else { 0.0 })
        .collect();
    LossVector::new(row).expect("Bernoulli draws lie in {0, 1}")
}

/// Pre-generated losses for oblivious environments. Online environments are
/// served by [`play_environment`].
pub fn gen_losses(spec: &EnvironmentSpec, seed: u64) -> Result<Vec<LossVector>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        EnvironmentSpec::IidBernoulli { means, horizon } => Ok((0..*horizon)
            .map(|_| bernoulli_row(&mut rng, means))
            .collect()),
        EnvironmentSpec::PiecewiseStationary { segments } => Ok(segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(&s.means, s.length))
            .map(|means| bernoulli_row(&mut rng, means))
            .collect()),
        EnvironmentSpec::FromFile { path } => load_losses(path),
        EnvironmentSpec::AdversarialFlip { .. } => Err(Error::InvalidParameter {
            name: "environment",
            value: f64::NAN,
            reason: "adversarial environments react to the forecaster and cannot be pre-generated",
        }),
    }
}

/// Reads a headerless CSV of losses, one row per round.
pub fn load_losses(path: &std::path::Path) -> Result<Vec<LossVector>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for record in reader.deserialize::<Vec<f64>>() {
        let loss = LossVector::new(record?)?;
        if let Some(first) = out.first() {
            crate::simplex::check_dims(LossVector::dim(first), loss.dim())?;
        }
        out.push(loss);
    }
    if out.is_empty() {
        return Err(Error::EmptySequence("loss file"));
    }
    Ok(out)
}

/// Writes losses in the format read by [`load_losses`].
pub fn write_losses(path: &std::path::Path, losses: &[LossVector]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for l in losses {
        writer.serialize(l.as_slice())?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A loss source that may react to the forecaster's current play.
pub trait Adversary {
    fn next_loss(&mut self, play: &Distribution) -> Result<LossVector>;
}

/// Puts loss 1 on the heaviest coordinate of the play.
pub struct FlipAdversary {
    noise: f64,
    rng: ChaCha8Rng,
}

impl FlipAdversary {
    pub fn new(noise: f64, seed: u64) -> Result<Self> {
        check_unit_interval("noise", noise)?;
        Ok(Self {
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl Adversary for FlipAdversary {
    fn next_loss(&mut self, play: &Distribution) -> Result<LossVector> {
        let p = play.as_slice();
        let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..p.len()).filter(|&i| p[i] == max).collect();
        let target = ties[self.rng.random_range(0..ties.len())];
        let row = (0..p.len())
            .map(|i| {
                if i == target {
                    1.0
                } else if self.noise > 0.0 {
                    self.noise * self.rng.random::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        LossVector::new(row)
    }
}

/// Runs a forecaster against an adversary for `horizon` rounds, returning
/// the trajectory and the losses the adversary chose.
pub fn play_against(
    forecaster: &mut Forecaster,
    adversary: &mut dyn Adversary,
    horizon: usize,
) -> Result<(Trajectory, Vec<LossVector>)> {
    let mut rounds = Vec::with_capacity(horizon);
    let mut losses = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let loss = adversary.next_loss(forecaster.play())?;
        rounds.push(forecaster.step(&loss)?);
        losses.push(loss);
    }
    Ok((
        Trajectory {
            rounds,
            next_play: forecaster.play().clone(),
        },
        losses,
    ))
}

/// Runs a forecaster in any environment, oblivious or online.
pub fn play_environment(
    forecaster: &mut Forecaster,
    spec: &EnvironmentSpec,
    seed: u64,
) -> Result<(Trajectory, Vec<LossVector>)> {
    match spec {
        EnvironmentSpec::AdversarialFlip { d, horizon, noise } => {
            spec.validate()?;
            crate::simplex::check_dims(*d, forecaster.dim())?;
            let mut adversary = FlipAdversary::new(*noise, seed)?;
            play_against(forecaster, &mut adversary, *horizon)
        }
        _ => {
            let losses = gen_losses(spec, seed)?;
            let traj = forecaster.run(&losses)?;
            Ok((traj, losses))
        }
    }
}

/// Dimension of the losses an environment emits.
pub fn environment_dim(spec: &EnvironmentSpec) -> Result<usize> {
    match spec {
        EnvironmentSpec::IidBernoulli { means, .. } => Ok(means.len()),
        EnvironmentSpec::PiecewiseStationary { segments } => segments
            .first()
            .map(|s| s.means.len())
            .ok_or(Error::EmptySequence("segments")),
        EnvironmentSpec::AdversarialFlip { d, .. } => Ok(*d),
        EnvironmentSpec::FromFile { path } => Ok(load_losses(path)?[0].dim()),
    }
}

/// A constant-corner stretch of a piecewise comparator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerSegment {
    pub length: usize,
    pub corner: usize,
}

/// Discount factor shapes, evaluated for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscountSpec {
    /// `β_t = from + (to − from)(t − 1)/(T − 1)` with `from ≤ to`.
    LinearUp {
        from: f64,
        to: f64,
    },
    /// Same ramp with `from ≥ to`.
    LinearDown {
        from: f64,
        to: f64,
    },
    Constant {
        value: f64,
    },
    /// `β_t = rate^{T−t}`, the usual exponential forgetting.
    Geometric {
        rate: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

impl DiscountSpec {
    pub fn schedule(&self, horizon: usize) -> Result<DiscountSchedule> {
        check_horizon(horizon)?;
        let ramp = |from: f64, to: f64| -> Vec<f64> {
            if horizon == 1 {
                return vec![to];
            }
            (0..horizon)
                .map(|k| from + (to - from) * k as f64 / (horizon - 1) as f64)
                .collect()
        };
        let betas = match self {
            DiscountSpec::LinearUp { from, to } | DiscountSpec::LinearDown { from, to } => {
                let up = matches!(self, DiscountSpec::LinearUp { .. });
                if (up && from > to) || (!up && from < to) {
                    return Err(Error::InvalidParameter {
                        name: "to",
                        value: *to,
                        reason: "ramp direction disagrees with its endpoints",
                    });
                }
                ramp(*from, *to)
            }
            DiscountSpec::Constant { value } => vec![*value; horizon],
            DiscountSpec::Geometric { rate } => {
                check_unit_interval("rate", *rate)?;
                (1..=horizon)
                    .map(|t| rate.powi((horizon - t) as i32))
                    .collect()
            }
            DiscountSpec::Explicit { values } => {
                if values.len() != horizon {
                    return Err(Error::LengthMismatch {
                        what: "discount values",
                        expected: horizon,
                        found: values.len(),
                    });
                }
                values.clone()
            }
        };
        DiscountSchedule::new(betas)
    }
}

/// Which comparator, or family of comparators, regret is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparatorSpec {
    /// Corners held for given lengths.
    PiecewiseCorner { segments: Vec<CornerSegment> },
    /// On each environment segment, the corner with the least realized loss.
    SegmentBest,
    /// `u_t = e_corner` on `[start, end]` (1-indexed, inclusive), zero
    /// elsewhere.
    AdaptiveWindow {
        start: usize,
        end: usize,
        corner: usize,
    },
    /// The worst window of length at most `tau0` against its best corner.
    WorstWindow { tau0: usize },
    /// `u_t = β_t e_corner`; without a corner, the corner maximizing the
    /// discounted regret.
    Discounted {
        schedule: DiscountSpec,
        #[serde(default)]
        corner: Option<usize>,
    },
    /// Arbitrary nonnegative vectors, one per round.
    ScaledArbitrary { vectors: Vec<Vec<f64>> },
}

fn check_corner(corner: usize, d: usize) -> Result<()> {
    if corner < d {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "corner",
            value: corner as f64,
            reason: "corner index must be below the dimension",
        })
    }
}

fn check_window(start: usize, end: usize, horizon: usize) -> Result<()> {
    if start >= 1 && start <= end && end <= horizon {
        Ok(())
    } else {
        Err(Error::WindowOutOfRange {
            start,
            end,
            horizon,
        })
    }
}

/// `u_t = e_corner` on `[start, end]`, zero elsewhere.
pub fn window_comparator(
    d: usize,
    horizon: usize,
    start: usize,
    end: usize,
    corner: usize,
) -> Result<ComparatorSequence> {
    check_window(start, end, horizon)?;
    check_corner(corner, d)?;
    let vectors = (1..=horizon)
        .map(|t| {
            let scale = if (start..=end).contains(&t) { 1.0 } else { 0.0 };
            NonNegVector::scaled_corner(d, corner, scale)
        })
        .collect::<Result<Vec<_>>>()?;
    ComparatorSequence::new(vectors)
}

fn corners_by_segment(d: usize, segments: &[(usize, usize)]) -> Result<ComparatorSequence> {
    let mut vectors = Vec::new();
    for &(length, corner) in segments {
        check_corner(corner, d)?;
        let e = NonNegVector::scaled_corner(d, corner, 1.0)?;
        vectors.extend(std::iter::repeat_n(e, length));
    }
    ComparatorSequence::new(vectors)
}

/// Corner with the least cumulative loss over `losses`.
pub fn best_corner(losses: &[LossVector]) -> usize {
    let d = losses.first().map_or(0, LossVector::dim);
    (0..d)
        .map(|i| crate::simplex::compensated_sum(losses.iter().map(|l| l.as_slice()[i])))
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, x)| if x < acc.1 { (i, x) } else { acc },
        )
        .0
}

/// Builds a single comparator sequence. `WorstWindow` and corner-less
/// `Discounted` specs describe a maximization over comparators and are
/// resolved by the regret evaluators instead.
pub fn gen_comparator(
    spec: &ComparatorSpec,
    environment: &EnvironmentSpec,
    losses: &[LossVector],
) -> Result<ComparatorSequence> {
    let horizon = losses.len();
    let d = losses
        .first()
        .ok_or(Error::EmptySequence("loss sequence"))?
        .dim();
    match spec {
        ComparatorSpec::PiecewiseCorner { segments } => {
            let total: usize = segments.iter().map(|s| s.length).sum();
            if total != horizon {
                return Err(Error::LengthMismatch {
                    what: "comparator segments",
                    expected: horizon,
                    found: total,
                });
            }
            let pairs: Vec<_> = segments.iter().map(|s| (s.length, s.corner)).collect();
            corners_by_segment(d, &pairs)
        }
        ComparatorSpec::SegmentBest => {
            let lengths = environment
                .segment_lengths()
                .unwrap_or_else(|| vec![horizon]);
            let mut pairs = Vec::with_capacity(lengths.len());
            let mut at = 0;
            for length in lengths {
                pairs.push((length, best_corner(&losses[at..at + length])));
                at += length;
            }
            corners_by_segment(d, &pairs)
        }
        ComparatorSpec::AdaptiveWindow { start, end, corner } => {
            window_comparator(d, horizon, *start, *end, *corner)
        }
        ComparatorSpec::Discounted {
            schedule,
            corner: Some(corner),
        } => {
            check_corner(*corner, d)?;
            schedule.schedule(horizon)?.comparator(d, *corner)
        }
        ComparatorSpec::ScaledArbitrary { vectors } => {
            if vectors.len() != horizon {
                return Err(Error::LengthMismatch {
                    what: "comparator vectors",
                    expected: horizon,
                    found: vectors.len(),
                });
            }
            let vs = vectors
                .iter()
                .map(|v| NonNegVector::new(v.clone()))
                .collect::<Result<Vec<_>>>()?;
            let seq = ComparatorSequence::new(vs)?;
            crate::simplex::check_dims(d, seq.dim())?;
            Ok(seq)
        }
        ComparatorSpec::WorstWindow { .. } | ComparatorSpec::Discounted { corner: None, .. } => {
            Err(Error::InvalidParameter {
                name: "comparator",
                value: f64::NAN,
                reason: "this comparator is a maximization resolved by the regret evaluator",
            })
        }
    }
}
