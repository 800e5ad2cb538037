//! Regret notions and comparator statistics.
//!
//! Plays are taken as anything that views as `&[f64]` so both raw
//! [`Distribution`](crate::simplex::Distribution)s and
//! [`RoundRecord`](crate::forecaster::RoundRecord)s can be passed directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{check_dims, compensated_sum, total_variation, NonNegVector};

/// A comparator sequence `u_1, …, u_T` of `R_+^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorSequence {
    vectors: Vec<NonNegVector>,
}

impl ComparatorSequence {
    pub fn new(vectors: Vec<NonNegVector>) -> Result<Self> {
        let d = vectors
            .first()
            .ok_or(Error::EmptySequence("comparator sequence"))?
            .dim();
        for v in &vectors {
            check_dims(d, v.dim())?;
        }
        Ok(Self { vectors })
    }

    pub fn horizon(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn vectors(&self) -> &[NonNegVector] {
        &self.vectors
    }

    pub fn norms(&self) -> Vec<f64> {
        self.vectors.iter().map(NonNegVector::l1_norm).collect()
    }

    /// `Σ_t u_t · ℓ_t`
    pub fn cumulative_loss<L: AsRef<[f64]>>(&self, losses: &[L]) -> Result<f64> {
        check_len("losses", self.horizon(), losses.len())?;
        let mut terms = Vec::with_capacity(losses.len());
        for (u, l) in self.vectors.iter().zip(losses) {
            check_dims(self.dim(), l.as_ref().len())?;
            terms.push(u.dot(l.as_ref()));
        }
        Ok(compensated_sum(terms))
    }

    pub fn stats<L: AsRef<[f64]>>(&self, losses: &[L]) -> Result<ComparatorStats> {
        let norms = self.norms();
        Ok(ComparatorStats {
            m: regularity_m(self),
            n: sparsity_n(self),
            u_sum: compensated_sum(norms.iter().copied()),
            u1_norm: norms[0],
            loss: self.cumulative_loss(losses)?,
        })
    }
}

/// Summary of a comparator sequence against a loss sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparatorStats {
    /// `m(u) = Σ_{t≥2} D_TV(u_t, u_{t−1})`
    pub m: f64,
    /// `n(u) = Σ_i max_t u_{i,t}`
    pub n: f64,
    /// `Σ_t ‖u_t‖_1`
    pub u_sum: f64,
    /// `‖u_1‖_1`
    pub u1_norm: f64,
    /// `Σ_t u_t · ℓ_t`
    pub loss: f64,
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}

/// `m(u) = Σ_{t=2}^T D_TV(u_t, u_{t−1})`.
pub fn regularity_m(u: &ComparatorSequence) -> f64 {
    compensated_sum(u.vectors.windows(2).map(|w| {
        total_variation(w[1].as_slice(), w[0].as_slice())
            .expect("dimensions checked at construction")
    }))
}

/// `n(u) = Σ_i max_t u_{i,t}`.
pub fn sparsity_n(u: &ComparatorSequence) -> f64 {
    let d = u.dim();
    compensated_sum((0..d).map(|i| {
        u.vectors
            .iter()
            .map(|v| v.as_slice()[i])
            .fold(0.0, f64::max)
    }))
}

fn check_run<P: AsRef<[f64]>, L: AsRef<[f64]>>(plays: &[P], losses: &[L]) -> Result<usize> {
    check_len("plays", losses.len(), plays.len())?;
    let d = losses
        .first()
        .ok_or(Error::EmptySequence("loss sequence"))?
        .as_ref()
        .len();
    for (p, l) in plays.iter().zip(losses) {
        check_dims(d, p.as_ref().len())?;
        check_dims(d, l.as_ref().len())?;
    }
    Ok(d)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// `Σ_t ‖u_t‖_1 p_t·ℓ_t − Σ_t u_t·ℓ_t`.
pub fn generalized_shifting_regret<P: AsRef<[f64]>, L: AsRef<[f64]>>(
    plays: &[P],
    losses: &[L],
    u: &ComparatorSequence,
) -> Result<f64> {
    let d = check_run(plays, losses)?;
    check_len("comparator", plays.len(), u.horizon())?;
    check_dims(d, u.dim())?;
    let terms = plays
        .iter()
        .zip(losses)
        .zip(&u.vectors)
        .map(|((p, l), ut)| {
            let norm = ut.l1_norm();
            if norm == 0.0 {
                0.0
            } else {
                norm * dot(p.as_ref(), l.as_ref()) - ut.dot(l.as_ref())
            }
        });
    Ok(compensated_sum(terms))
}

/// Worst interval regret and where it is attained (1-indexed, inclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRegret {
    pub value: f64,
    pub start: usize,
    pub end: usize,
    pub corner: usize,
}

/// Compensated running prefix sums, `out[k] = Σ_{t<k} x_t`.
fn prefix_sums(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

/// `τ_0`-adaptive regret: the largest regret against the best fixed corner
/// over any window `[r, s]` of length at most `τ_0`.
pub fn adaptive_regret<P: AsRef<[f64]>, L: AsRef<[f64]>>(
    plays: &[P],
    losses: &[L],
    tau0: usize,
) -> Result<IntervalRegret> {
    let d = check_run(plays, losses)?;
    let horizon = plays.len();
    if tau0 < 1 || tau0 > horizon {
        return Err(Error::InvalidParameter {
            name: "tau0",
            value: tau0 as f64,
            reason: "must lie in [1, T]",
        });
    }
    let learner = prefix_sums(
        plays
            .iter()
            .zip(losses)
            .map(|(p, l)| dot(p.as_ref(), l.as_ref())),
    );
    let experts: Vec<Vec<f64>> = (0..d)
        .map(|i| prefix_sums(losses.iter().map(|l| l.as_ref()[i])))
        .collect();

    let mut best = IntervalRegret {
        value: f64::NEG_INFINITY,
        start: 1,
        end: 1,
        corner: 0,
    };
    for start in 1..=horizon {
        let last = (start + tau0 - 1).min(horizon);
        for end in start..=last {
            let (corner, expert) = experts
                .iter()
                .map(|c| c[end] - c[start - 1])
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, x)| if x < acc.1 { (i, x) } else { acc },
                );
            let value = (learner[end] - learner[start - 1]) - expert;
            if value > best.value {
                best = IntervalRegret {
                    value,
                    start,
                    end,
                    corner,
                };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    None,
}

/// Discount factors `β_{1,T}, …, β_{T,T} ∈ [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountSchedule {
    betas: Vec<f64>,
    monotone: Monotonicity,
}

impl DiscountSchedule {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::EmptySequence("discount schedule"));
        }
        for &b in &betas {
            crate::error::check_unit_interval("beta", b)?;
        }
        let up = betas.windows(2).all(|w| w[1] >= w[0]);
        let down = betas.windows(2).all(|w| w[1] <= w[0]);
        let monotone = match (up, down) {
            (true, _) => Monotonicity::Nondecreasing,
            (false, true) => Monotonicity::Nonincreasing,
            _ => Monotonicity::None,
        };
        Ok(Self { betas, monotone })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotone
    }

    /// `U_T = Σ_t β_t`
    pub fn total(&self) -> f64 {
        compensated_sum(self.betas.iter().copied())
    }

    /// `‖β_1 q‖_1 + m((β_t q)_t) = β_1 + Σ_{t≥2} (β_t − β_{t−1})_+` for any
    /// `q ∈ Δ_d`; equals `max{β_1, β_T}` when the schedule is monotone.
    pub fn regularity(&self) -> f64 {
        self.betas[0] + compensated_sum(self.betas.windows(2).map(|w| (w[1] - w[0]).max(0.0)))
    }

    /// `max{β_1, β_T}`
    pub fn endpoint_max(&self) -> f64 {
        self.betas[0].max(*self.betas.last().expect("nonempty"))
    }

    /// The comparator `u_t = β_t e_corner`.
    pub fn comparator(&self, d: usize, corner: usize) -> Result<ComparatorSequence> {
        let vectors = self
            .betas
            .iter()
            .map(|&b| NonNegVector::scaled_corner(d, corner, b))
            .collect::<Result<Vec<_>>>()?;
        ComparatorSequence::new(vectors)
    }
}

/// Discounted regret `max_q Σ_t β_t (p_t·ℓ_t − q·ℓ_t)`; returns the value and
/// the maximizing corner.
pub fn discounted_regret<P: AsRef<[f64]>, L: AsRef<[f64]>>(
    plays: &[P],
    losses: &[L],
    schedule: &DiscountSchedule,
) -> Result<(f64, usize)> {
    let d = check_run(plays, losses)?;
    check_len("discount schedule", plays.len(), schedule.betas.len())?;
    let learner = compensated_sum(
        plays
            .iter()
            .zip(losses)
            .zip(&schedule.betas)
            .map(|((p, l), b)| b * dot(p.as_ref(), l.as_ref())),
    );
    let (corner, best) = (0..d)
        .map(|i| {
            compensated_sum(
                losses
                    .iter()
                    .zip(&schedule.betas)
                    .map(|(l, b)| b * l.as_ref()[i]),
            )
        })
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, x)| if x < acc.1 { (i, x) } else { acc },
        );
    Ok((learner - best, corner))
}
