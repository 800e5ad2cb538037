//! Config-driven batch runs: every repetition plays a forecaster in an
//! environment, measures regret against a comparator and certifies it
//! against the matching closed-form bound.

mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{write_csv, write_csv_to, RunReport, Verdict, CSV_HEADER};

use crate::bounds::{self, BwParams, ComparatorTerms};
use crate::environment::{
    environment_dim, gen_comparator, play_environment, window_comparator, ComparatorSpec,
    EnvironmentSpec,
};
use crate::error::{Error, Result};
use crate::forecaster::certificates::{bw_condition_violation, hoeffding_slack};
use crate::forecaster::{Forecaster, LossVector, MixingRule, Schedule, Trajectory};
use crate::regret::{
    adaptive_regret, discounted_regret, generalized_shifting_regret, ComparatorSequence,
    ComparatorStats,
};
use crate::simplex::Distribution;

/// Relative tolerance of a verdict: pass iff
/// `regret ≤ bound + VERDICT_TOLERANCE · max(1, |bound|)`.
pub const VERDICT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub environment: EnvironmentSpec,
    pub comparator: ComparatorSpec,
    pub forecaster: ForecasterSpec,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Repetition `k` (0-based) runs with seed `seed + k`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    /// When false, `wall_ms` is written as zero so reruns are byte-identical.
    #[serde(default = "yes")]
    pub record_timing: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            csv: None,
            record_timing: true,
        }
    }
}

/// Either an explicit rule with its learning rate, or a tuner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecasterSpec {
    #[serde(default)]
    pub rule: Option<MixingRule>,
    /// Ignored by time-varying rules.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub tune: Option<Tuner>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunedMixing {
    #[default]
    FixedShare,
    Projected,
}

/// Parameter tunings driven by caps on the comparator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tuner {
    /// Caps `‖u_1‖ + m(u) ≤ m0`, `Σ‖u_t‖ ≤ u0`. With `mixing: projected` the
    /// same `(η, α)` drive the projected rule.
    FixedShare {
        m0: f64,
        u0: f64,
        #[serde(default)]
        mixing: TunedMixing,
    },
    /// Adds the cap `Σ u_t·ℓ_t ≤ l0`.
    SmallLoss { m0: f64, u0: f64, l0: f64 },
    /// Running-maximum share for corner comparators with `m ≤ m0`, `n ≤ n0`.
    BwMax { m0: f64, n0: f64 },
    /// Decayed-maximum share with `γ = m0/(n0 T)`.
    BwDecayed { m0: f64, n0: f64 },
    /// Time-varying schedule `η_t = √(ln(dt)/t)`, `α_t = 1/t`.
    Anytime,
}

/// How the bound of a run is evaluated.
#[derive(Debug, Clone, PartialEq)]
enum BoundRule {
    FixedShare {
        eta: f64,
        alpha: f64,
        caps: Option<(f64, f64)>,
    },
    Projected {
        eta: f64,
        alpha: f64,
    },
    SmallLoss {
        eta: f64,
        alpha: f64,
        caps: (f64, f64, f64),
        bound: f64,
    },
    Bw {
        eta: f64,
        alpha: f64,
        c: f64,
        corner: Option<CornerCaps>,
    },
    TimeVarying {
        eta: Schedule,
        alpha: Schedule,
        anytime: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CornerCaps {
    Max { m0: f64, n0: f64 },
    Decayed { m0: f64, n0: f64 },
}

/// A forecaster configuration resolved against `(d, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub rule: MixingRule,
    pub eta: f64,
    bound: BoundRule,
}

impl ForecasterSpec {
    pub fn resolve(&self, d: usize, horizon: usize) -> Result<Resolved> {
        match (&self.rule, &self.tune) {
            (Some(rule), None) => self.resolve_explicit(rule),
            (None, Some(tuner)) => {
                if self.eta.is_some() {
                    return Err(config_error("forecaster.eta", "eta is set by the tuner"));
                }
                resolve_tuner(tuner, d, horizon)
            }
            _ => Err(config_error(
                "forecaster",
                "exactly one of `rule` and `tune` must be given",
            )),
        }
    }

    fn resolve_explicit(&self, rule: &MixingRule) -> Result<Resolved> {
        rule.validate()?;
        if let MixingRule::TimeVarying { eta, alpha } = rule {
            return Ok(Resolved {
                rule: rule.clone(),
                eta: eta.value(1)?,
                bound: BoundRule::TimeVarying {
                    eta: eta.clone(),
                    alpha: alpha.clone(),
                    anytime: false,
                },
            });
        }
        let eta = self
            .eta
            .ok_or_else(|| config_error("forecaster.eta", "missing learning rate"))?;
        crate::error::check_positive("eta", eta)?;
        let bound = match *rule {
            MixingRule::FixedShare { alpha } => BoundRule::FixedShare {
                eta,
                alpha,
                caps: None,
            },
            MixingRule::Projected { alpha } => BoundRule::Projected { eta, alpha },
            MixingRule::BwMax { alpha } | MixingRule::BwDecayed { alpha, .. } => BoundRule::Bw {
                eta,
                alpha,
                c: rule.bw_constant().expect("pre-weight share rule"),
                corner: None,
            },
            MixingRule::TimeVarying { .. } => unreachable!("handled above"),
        };
        Ok(Resolved {
            rule: rule.clone(),
            eta,
            bound,
        })
    }
}

fn resolve_tuner(tuner: &Tuner, d: usize, horizon: usize) -> Result<Resolved> {
    Ok(match *tuner {
        Tuner::FixedShare { m0, u0, mixing } => {
            let t = bounds::tune_fixed_share(d, m0, u0)?;
            match mixing {
                TunedMixing::FixedShare => Resolved {
                    rule: MixingRule::FixedShare { alpha: t.alpha },
                    eta: t.eta,
                    bound: BoundRule::FixedShare {
                        eta: t.eta,
                        alpha: t.alpha,
                        caps: Some((m0, u0)),
                    },
                },
                TunedMixing::Projected => Resolved {
                    rule: MixingRule::Projected { alpha: t.alpha },
                    eta: t.eta,
                    bound: BoundRule::Projected {
                        eta: t.eta,
                        alpha: t.alpha,
                    },
                },
            }
        }
        Tuner::SmallLoss { m0, u0, l0 } => {
            let t = bounds::tune_small_loss(d, m0, u0, l0)?;
            crate::error::check_positive("eta", t.eta)?;
            Resolved {
                rule: MixingRule::FixedShare { alpha: t.alpha },
                eta: t.eta,
                bound: BoundRule::SmallLoss {
                    eta: t.eta,
                    alpha: t.alpha,
                    caps: (m0, u0, l0),
                    bound: t.bound,
                },
            }
        }
        Tuner::BwMax { m0, n0 } => {
            let t = bounds::tune_bw_max(d, horizon, m0, n0)?;
            Resolved {
                rule: MixingRule::BwMax { alpha: t.alpha },
                eta: t.eta,
                bound: BoundRule::Bw {
                    eta: t.eta,
                    alpha: t.alpha,
                    c: 1.0,
                    corner: Some(CornerCaps::Max { m0, n0 }),
                },
            }
        }
        Tuner::BwDecayed { m0, n0 } => {
            let t = bounds::tune_bw_decayed(d, horizon, m0, n0)?;
            let gamma = bounds::decay_rate(m0, n0, horizon)?;
            Resolved {
                rule: MixingRule::BwDecayed {
                    alpha: t.alpha,
                    gamma,
                },
                eta: t.eta,
                bound: BoundRule::Bw {
                    eta: t.eta,
                    alpha: t.alpha,
                    c: gamma.exp(),
                    corner: Some(CornerCaps::Decayed { m0, n0 }),
                },
            }
        }
        Tuner::Anytime => {
            let eta = Schedule::LogRoot { dimension: d };
            let alpha = Schedule::Harmonic { scale: 1.0 };
            Resolved {
                rule: MixingRule::TimeVarying {
                    eta: eta.clone(),
                    alpha: alpha.clone(),
                },
                eta: eta.value(1)?,
                bound: BoundRule::TimeVarying {
                    eta,
                    alpha,
                    anytime: true,
                },
            }
        }
    })
}

fn config_error(path: &str, message: &str) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.to_string(),
    }
}

/// Which regret notion a comparator spec measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretKind {
    Shifting,
    Adaptive,
    Discounted,
}

impl RegretKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegretKind::Shifting => "shifting",
            RegretKind::Adaptive => "adaptive",
            RegretKind::Discounted => "discounted",
        }
    }

    pub fn of(spec: &ComparatorSpec) -> Self {
        match spec {
            ComparatorSpec::WorstWindow { .. } => RegretKind::Adaptive,
            ComparatorSpec::Discounted { .. } => RegretKind::Discounted,
            _ => RegretKind::Shifting,
        }
    }
}

/// Realized regret together with the comparator attaining it.
#[derive(Debug, Clone)]
pub struct MeasuredRegret {
    pub kind: RegretKind,
    pub value: f64,
    pub comparator: ComparatorSequence,
}

/// Evaluates the regret notion selected by `spec` on a finished run.
pub fn measure_regret(
    spec: &ComparatorSpec,
    environment: &EnvironmentSpec,
    traj: &Trajectory,
    losses: &[LossVector],
) -> Result<MeasuredRegret> {
    let kind = RegretKind::of(spec);
    let plays = &traj.rounds;
    let d = traj.dim();
    match spec {
        ComparatorSpec::WorstWindow { tau0 } => {
            let w = adaptive_regret(plays, losses, *tau0)?;
            Ok(MeasuredRegret {
                kind,
                value: w.value,
                comparator: window_comparator(d, losses.len(), w.start, w.end, w.corner)?,
            })
        }
        ComparatorSpec::Discounted {
            schedule,
            corner: None,
        } => {
            let sched = schedule.schedule(losses.len())?;
            let (value, corner) = discounted_regret(plays, losses, &sched)?;
            Ok(MeasuredRegret {
                kind,
                value,
                comparator: sched.comparator(d, corner)?,
            })
        }
        _ => {
            let comparator = gen_comparator(spec, environment, losses)?;
            let value = generalized_shifting_regret(plays, losses, &comparator)?;
            Ok(MeasuredRegret {
                kind,
                value,
                comparator,
            })
        }
    }
}

const CAP_SLACK: f64 = 1e-9;

fn within(x: f64, cap: f64) -> bool {
    x <= cap + CAP_SLACK * cap.abs().max(1.0)
}

fn is_corner_sequence(u: &ComparatorSequence) -> bool {
    u.vectors()
        .iter()
        .all(|v| v.as_slice().iter().filter(|&&x| x != 0.0).count() == 1 && v.l1_norm() == 1.0)
}

impl Resolved {
    /// The bound certifying a run whose regret was measured against
    /// `regret.comparator` with statistics `stats`.
    pub fn bound(
        &self,
        traj: &Trajectory,
        regret: &MeasuredRegret,
        stats: &ComparatorStats,
    ) -> Result<f64> {
        let d = traj.dim();
        let horizon = traj.horizon();
        let terms = ComparatorTerms::from(*stats);
        match &self.bound {
            BoundRule::FixedShare { eta, alpha, caps } => match *caps {
                Some((m0, u0))
                    if within(stats.u1_norm + stats.m, m0)
                        && within(stats.u_sum, u0)
                        && *alpha <= 0.5 =>
                {
                    Ok(bounds::tune_fixed_share(d, m0, u0)?.bound)
                }
                _ => bounds::bound_fixed_share(d, *eta, *alpha, terms),
            },
            BoundRule::Projected { eta, alpha } => bounds::bound_projected(d, *eta, *alpha, terms),
            BoundRule::SmallLoss {
                eta,
                alpha,
                caps: (m0, u0, l0),
                bound,
            } => {
                if within(stats.u1_norm + stats.m, *m0)
                    && within(stats.u_sum, *u0)
                    && within(stats.loss, *l0)
                {
                    Ok(*bound)
                } else {
                    bounds::bound_fixed_share(d, *eta, *alpha, terms)
                }
            }
            BoundRule::Bw {
                eta,
                alpha,
                c,
                corner,
            } => {
                let corners = is_corner_sequence(&regret.comparator);
                match *corner {
                    Some(CornerCaps::Max { m0, n0 })
                        if corners && within(stats.m, m0) && within(stats.n, n0) =>
                    {
                        bounds::bound_bw_max(d, horizon, *eta, *alpha, stats.m, stats.n)
                    }
                    Some(CornerCaps::Decayed { m0, n0 })
                        if corners && within(stats.m, m0) && within(stats.n, n0) =>
                    {
                        bounds::bound_bw_decayed(d, horizon, *eta, *alpha, m0, n0)
                    }
                    _ => {
                        let z_max = traj.max_shared_mass().unwrap_or(1.0);
                        bounds::bound_bw(
                            BwParams {
                                d,
                                horizon,
                                eta: *eta,
                                alpha: *alpha,
                                c: *c,
                                z_max,
                            },
                            terms,
                            stats.n,
                        )
                    }
                }
            }
            BoundRule::TimeVarying {
                eta,
                alpha,
                anytime,
            } => {
                if *anytime && regret.kind == RegretKind::Adaptive && horizon >= 3 {
                    return bounds::anytime_interval_bound(d, horizon);
                }
                let etas = (1..=horizon)
                    .map(|t| eta.value(t))
                    .collect::<Result<Vec<_>>>()?;
                let alphas = (1..=horizon)
                    .map(|t| alpha.value(t))
                    .collect::<Result<Vec<_>>>()?;
                bounds::bound_time_varying(d, &etas, &alphas, stats.m, &regret.comparator.norms())
            }
        }
    }
}

/// Per-run certificate summary beyond the bound verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundCertificates {
    /// Smallest per-round Hoeffding slack over all rounds and corners; the
    /// slack is linear in `q`, so corners cover the whole simplex.
    pub min_slack: f64,
    /// Largest violation of the pre-weight share conditions, if applicable.
    pub bw_violation: Option<f64>,
}

pub fn round_certificates(
    rule: &MixingRule,
    traj: &Trajectory,
    losses: &[LossVector],
) -> Result<RoundCertificates> {
    let d = traj.dim();
    let corners = (0..d)
        .map(|i| Distribution::corner(d, i))
        .collect::<Result<Vec<_>>>()?;
    let min_slack = traj
        .rounds
        .iter()
        .zip(losses)
        .flat_map(|(r, l)| corners.iter().map(move |q| hoeffding_slack(r, l, q)))
        .fold(f64::INFINITY, f64::min);
    let bw_violation = rule
        .bw_constant()
        .and_then(|c| bw_condition_violation(traj, c));
    Ok(RoundCertificates {
        min_slack,
        bw_violation,
    })
}

/// One finished repetition.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub certificates: RoundCertificates,
}

/// Results of an experiment: one row per repetition plus a summary row
/// copying the run with the smallest relative margin.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    pub summary: RunReport,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.runs.iter().all(|r| r.report.verdict == Verdict::Pass)
    }

    pub fn rows(&self) -> impl Iterator<Item = &RunReport> {
        self.runs
            .iter()
            .map(|r| &r.report)
            .chain(std::iter::once(&self.summary))
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(config_error("repetitions", "must be at least 1"));
        }
        self.environment
            .validate()
            .map_err(|e| config_error("environment", &e.to_string()))?;
        match (&self.forecaster.rule, &self.forecaster.tune) {
            (Some(rule), None) => rule
                .validate()
                .map_err(|e| config_error("forecaster.rule", &e.to_string())),
            (None, Some(_)) => Ok(()),
            _ => Err(config_error(
                "forecaster",
                "exactly one of `rule` and `tune` must be given",
            )),
        }
    }
}

/// Reads and validates a JSON config. Errors carry the JSON path of the
/// offending field. Relative loss-file paths resolve against the config's
/// directory.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut spec = parse_spec(&text)?;
    if let EnvironmentSpec::FromFile { path: loss_path } = &mut spec.environment {
        if loss_path.is_relative() {
            if let Some(dir) = path.parent() {
                *loss_path = dir.join(&*loss_path);
            }
        }
    }
    Ok(spec)
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

fn run_once(spec: &ExperimentSpec, d: usize, index: usize) -> Result<RunOutcome> {
    let seed = spec.seed.wrapping_add(index as u64);
    let start = Instant::now();

    let horizon = match spec.environment.segment_lengths() {
        Some(lengths) => lengths.iter().sum(),
        None => crate::environment::gen_losses(&spec.environment, seed)?.len(),
    };
    let resolved = spec.forecaster.resolve(d, horizon)?;
    let mut forecaster = Forecaster::new(d, &resolved.rule, resolved.eta)?;
    let (traj, losses) = play_environment(&mut forecaster, &spec.environment, seed)?;

    let regret = measure_regret(&spec.comparator, &spec.environment, &traj, &losses)?;
    let stats = regret.comparator.stats(&losses)?;
    let bound = resolved.bound(&traj, &regret, &stats)?;
    let certificates = round_certificates(&resolved.rule, &traj, &losses)?;

    let wall_ms = if spec.output.record_timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(RunOutcome {
        report: RunReport {
            run_id: index.to_string(),
            seed,
            horizon: traj.horizon(),
            d,
            regret_kind: regret.kind.as_str().to_string(),
            regret: regret.value,
            m: stats.m,
            n: stats.n,
            u_sum: stats.u_sum,
            l_sum: stats.loss,
            bound,
            verdict: Verdict::judge(regret.value, bound),
            wall_ms,
        },
        certificates,
    })
}

fn thread_limit() -> Option<usize> {
    std::env::var("THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs every repetition, in parallel up to `THREADS` workers (all cores
/// when unset). Rows come back in repetition order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let d = environment_dim(&spec.environment)?;
    let work = || -> Result<Vec<RunOutcome>> {
        (0..spec.repetitions)
            .into_par_iter()
            .map(|k| run_once(spec, d, k))
            .collect()
    };
    let runs = match thread_limit() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config_error("THREADS", &e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let summary = summarize(&runs);
    let report = ExperimentReport { runs, summary };
    if let Some(path) = &spec.output.csv {
        write_csv(path, report.rows())?;
    }
    Ok(report)
}

/// Runs repetitions one after another on the calling thread.
pub fn run_experiment_serial(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let d = environment_dim(&spec.environment)?;
    let runs = (0..spec.repetitions)
        .map(|k| run_once(spec, d, k))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&runs);
    Ok(ExperimentReport { runs, summary })
}

fn summarize(runs: &[RunOutcome]) -> RunReport {
    let worst = runs
        .iter()
        .map(|r| &r.report)
        .min_by(|a, b| a.relative_margin().total_cmp(&b.relative_margin()))
        .expect("at least one repetition");
    RunReport {
        run_id: "summary".to_string(),
        wall_ms: runs.iter().map(|r| r.report.wall_ms).sum(),
        ..worst.clone()
    }
}
