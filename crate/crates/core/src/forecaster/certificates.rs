//! Per-round inequalities every run must satisfy, evaluated on recorded
//! trajectories. Each function returns the slack `rhs − lhs`; a certificate
//! holds when the slack is nonnegative.

use super::{LossVector, RoundRecord, Trajectory};
use crate::simplex::Distribution;

/// `(1/η_{t−1}) ln(1/p_i) − (1/η_t) ln(1/v_i)`, exact even when `p_i`
/// underflowed to zero in the log domain.
fn weighted_log_ratio(round: &RoundRecord, loss: &[f64], i: usize) -> f64 {
    let lp = round.log_play[i];
    let lv = round.log_pre_weights[i];
    if lp.is_finite() && lv.is_finite() {
        -lp / round.eta_prev + lv / round.eta
    } else {
        // log v_i = (η_t/η_{t−1}) log p_i − η_t ℓ_i − log_normalizer
        -loss[i] - round.log_normalizer / round.eta
    }
}

/// Hoeffding certificate for round `t`:
///
/// `(p_t − q)·ℓ_t ≤ Σ_i q_i((1/η_{t−1}) ln(1/p_i) − (1/η_t) ln(1/v_i))
///   + (1/η_t − 1/η_{t−1}) ln d + η_{t−1}/8`.
///
/// With a constant learning rate this is `(1/η) Σ_i q_i ln(v_i/p_i) + η/8`.
pub fn hoeffding_slack(round: &RoundRecord, loss: &LossVector, q: &Distribution) -> f64 {
    let l = loss.as_slice();
    let d = l.len() as f64;
    let lhs = round.realized_loss - q.dot(l);
    let mut rhs = (1.0 / round.eta - 1.0 / round.eta_prev) * d.ln() + round.eta_prev / 8.0;
    for (i, &qi) in q.as_slice().iter().enumerate() {
        if qi > 0.0 {
            rhs += qi * weighted_log_ratio(round, l, i);
        }
    }
    rhs - lhs
}

/// Small-loss certificate for constant-rate rounds:
///
/// `((1 − e^{−η})/η) p_t·ℓ_t − q·ℓ_t ≤ (1/η) Σ_i q_i ln(v_{i,t+1}/p_{i,t})`.
pub fn small_loss_slack(round: &RoundRecord, loss: &LossVector, q: &Distribution) -> f64 {
    let l = loss.as_slice();
    let eta = round.eta;
    let lhs = -(-eta).exp_m1() / eta * round.realized_loss - q.dot(l);
    let mut rhs = 0.0;
    for (i, &qi) in q.as_slice().iter().enumerate() {
        if qi > 0.0 {
            rhs += qi * weighted_log_ratio(round, l, i);
        }
    }
    rhs - lhs
}

/// Projection certificate for `q ∈ Δ_d^α` and round `t` of a projected run:
///
/// `(p_t − q)·ℓ_t ≤ (1/η) Σ_i q_i ln(p_{i,t+1}/p_{i,t}) + η/8`.
///
/// `next_play` is `p_{t+1}`.
pub fn projected_slack(
    round: &RoundRecord,
    next_play: &Distribution,
    loss: &LossVector,
    q: &Distribution,
) -> f64 {
    let l = loss.as_slice();
    let lhs = round.realized_loss - q.dot(l);
    let mut rhs = round.eta / 8.0;
    for (i, &qi) in q.as_slice().iter().enumerate() {
        if qi > 0.0 {
            rhs += qi * (next_play.as_slice()[i].ln() - round.log_play[i]) / round.eta;
        }
    }
    rhs - lhs
}

/// Minimum slack of [`hoeffding_slack`] over every round and every `q`.
pub fn min_hoeffding_slack(traj: &Trajectory, losses: &[LossVector], qs: &[Distribution]) -> f64 {
    traj.rounds
        .iter()
        .zip(losses)
        .flat_map(|(r, l)| qs.iter().map(move |q| hoeffding_slack(r, l, q)))
        .fold(f64::INFINITY, f64::min)
}

/// Largest violation of `v_{j,t} ≤ w_{j,t} ≤ 1` and `C w_{j,t+1} ≥ w_{j,t}`
/// along a pre-weight share trajectory, starting from `w_1 = v_1 = 1/d`.
/// Returns `None` for trajectories without shared weights.
pub fn bw_condition_violation(traj: &Trajectory, c: f64) -> Option<f64> {
    let d = traj.dim();
    let mut w_prev = vec![1.0 / d as f64; d];
    let mut worst = 0.0_f64;
    for round in &traj.rounds {
        let shared = round.shared.as_ref()?;
        for ((&w, &v), &wp) in shared
            .w
            .iter()
            .zip(round.pre_weights.as_slice())
            .zip(&w_prev)
        {
            worst = worst.max(v - w).max(w - 1.0).max(wp - c * w);
        }
        w_prev.clone_from(&shared.w);
    }
    Some(worst)
}

/// Definitional decayed maximum `w_{j,t} = max_{s ≤ t} e^{γ(s−t)} v_{j,s}`
/// over an explicit history `v_1, …, v_t`.
pub fn decayed_max_bruteforce(history: &[Distribution], gamma: f64) -> Vec<f64> {
    let t = history.len();
    let d = history.first().map_or(0, Distribution::dim);
    (0..d)
        .map(|j| {
            history
                .iter()
                .enumerate()
                .map(|(s, v)| (gamma * (s as f64 - (t - 1) as f64)).exp() * v.as_slice()[j])
                .fold(0.0, f64::max)
        })
        .collect()
}
