//! Online convex optimization on the simplex through the linear forecaster:
//! each round the forecaster is fed a subgradient of the convex loss at its
//! play.

use crate::error::Result;
use crate::forecaster::{Forecaster, LossVector, RoundRecord};
use crate::simplex::{compensated_sum, Distribution};

/// A convex loss on `Δ_d` with a subgradient oracle.
///
/// The subgradient must already be affinely shifted and scaled into
/// `[0,1]^d`; it is rejected otherwise. Implementations should be reentrant.
pub trait ConvexLoss {
    fn value(&self, p: &[f64]) -> f64;
    fn subgradient(&self, p: &[f64]) -> Vec<f64>;
}

/// `p · c`, whose subgradient is `c` everywhere.
#[derive(Debug, Clone)]
pub struct LinearLoss(pub Vec<f64>);

impl ConvexLoss for LinearLoss {
    fn value(&self, p: &[f64]) -> f64 {
        compensated_sum(p.iter().zip(&self.0).map(|(a, b)| a * b))
    }

    fn subgradient(&self, _p: &[f64]) -> Vec<f64> {
        self.0.clone()
    }
}

/// Result of one convex round.
#[derive(Debug, Clone)]
pub struct ConvexRound {
    /// `ℓ_t(p_t)`
    pub loss: f64,
    /// The subgradient fed to the forecaster.
    pub gradient: LossVector,
    pub record: RoundRecord,
}

/// Plays one round: evaluates `loss_fn` at the current play, queries its
/// subgradient there and advances the forecaster with it.
pub fn step_convex(forecaster: &mut Forecaster, loss_fn: &dyn ConvexLoss) -> Result<ConvexRound> {
    let p = forecaster.play().as_slice().to_vec();
    let gradient = LossVector::new(loss_fn.subgradient(&p))?;
    let loss = loss_fn.value(&p);
    let record = forecaster.step(&gradient)?;
    Ok(ConvexRound {
        loss,
        gradient,
        record,
    })
}

/// Slack of `‖u‖(ℓ(p) − ℓ(u/‖u‖)) ≤ (‖u‖ p − u) · g` for a nonzero `u`;
/// nonnegative whenever `g` is a subgradient of `ℓ` at `p`.
pub fn domination_slack(loss_fn: &dyn ConvexLoss, p: &Distribution, g: &[f64], u: &[f64]) -> f64 {
    let norm: f64 = u.iter().sum();
    if norm == 0.0 {
        return 0.0;
    }
    let q: Vec<f64> = u.iter().map(|x| x / norm).collect();
    let lhs = norm * (loss_fn.value(p.as_slice()) - loss_fn.value(&q));
    let rhs: f64 = p
        .as_slice()
        .iter()
        .zip(u)
        .zip(g)
        .map(|((pi, ui), gi)| (norm * pi - ui) * gi)
        .sum();
    rhs - lhs
}
