use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use genshare::bounds::{self, BwParams, ComparatorTerms};
use genshare::experiment::{self, write_csv_to, ExperimentReport, Verdict};
use genshare::forecaster::mix_projected;
use genshare::{Distribution, Result};

#[derive(Parser)]
#[command(
    name = "genshare",
    version,
    about = "Generalized share forecasters and regret certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and emit its CSV report.
    Run {
        config: PathBuf,
        /// Write the CSV here instead of the configured path (or stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run an experiment and exit nonzero if any verdict or per-round
    /// certificate fails.
    Certify { config: PathBuf },
    /// Tuned fixed share parameters; with --L0, the small-loss tuning.
    Tune {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m0: f64,
        #[arg(long = "U0")]
        u0: f64,
        #[arg(long = "L0")]
        l0: Option<f64>,
    },
    /// KL projection onto the clipped simplex.
    Project {
        #[arg(long)]
        alpha: f64,
        /// Comma-separated entries.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        v: Vec<f64>,
    },
    /// Evaluate a closed-form bound.
    Bound {
        #[command(subcommand)]
        family: BoundFamily,
    },
}

#[derive(clap::Args)]
struct Comparator {
    /// m(u)
    #[arg(long)]
    m: f64,
    /// Σ_t ‖u_t‖_1
    #[arg(long = "u-sum")]
    u_sum: f64,
    /// ‖u_1‖_1
    #[arg(long = "u1")]
    u1: f64,
}

impl From<&Comparator> for ComparatorTerms {
    fn from(c: &Comparator) -> Self {
        ComparatorTerms {
            m: c.m,
            u_sum: c.u_sum,
            u1_norm: c.u1,
        }
    }
}

#[derive(Subcommand)]
enum BoundFamily {
    Projected {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        u: Comparator,
    },
    FixedShare {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        u: Comparator,
    },
    Adaptive {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        tau0: usize,
    },
    SmallLoss {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m0: f64,
        #[arg(long = "U0")]
        u0: f64,
        #[arg(long = "L0")]
        l0: f64,
    },
    Bw {
        #[arg(long)]
        d: usize,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        c: f64,
        #[arg(long = "z-max")]
        z_max: f64,
        #[arg(long)]
        n: f64,
        #[command(flatten)]
        u: Comparator,
    },
    BwMax {
        #[arg(long)]
        d: usize,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        n: f64,
    },
    BwDecayed {
        #[arg(long)]
        d: usize,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        m0: f64,
        #[arg(long)]
        n0: f64,
    },
    /// Time-varying bound at the anytime schedule, all intervals.
    TimeVarying {
        #[arg(long)]
        d: usize,
        #[arg(long = "T")]
        horizon: usize,
    },
    /// Closed-form interval bound of the anytime schedule.
    Anytime {
        #[arg(long)]
        d: usize,
        #[arg(long = "T")]
        horizon: usize,
    },
}

fn print_tuning(t: bounds::Tuning) {
    println!("eta = {}", t.eta);
    println!("alpha = {}", t.alpha);
    println!("bound = {}", t.bound);
}

fn eval_bound(family: &BoundFamily) -> Result<()> {
    let value = match family {
        BoundFamily::Projected { d, eta, alpha, u } => {
            bounds::bound_projected(*d, *eta, *alpha, u.into())?
        }
        BoundFamily::FixedShare { d, eta, alpha, u } => {
            bounds::bound_fixed_share(*d, *eta, *alpha, u.into())?
        }
        BoundFamily::Adaptive { d, tau0 } => {
            let (exact, relaxed) = bounds::bound_adaptive(*d, *tau0)?;
            println!("bound = {exact}");
            println!("relaxed = {relaxed}");
            return Ok(());
        }
        BoundFamily::SmallLoss { d, m0, u0, l0 } => {
            print_tuning(bounds::tune_small_loss(*d, *m0, *u0, *l0)?);
            return Ok(());
        }
        BoundFamily::Bw {
            d,
            horizon,
            eta,
            alpha,
            c,
            z_max,
            n,
            u,
        } => bounds::bound_bw(
            BwParams {
                d: *d,
                horizon: *horizon,
                eta: *eta,
                alpha: *alpha,
                c: *c,
                z_max: *z_max,
            },
            u.into(),
            *n,
        )?,
        BoundFamily::BwMax {
            d,
            horizon,
            eta,
            alpha,
            m,
            n,
        } => bounds::bound_bw_max(*d, *horizon, *eta, *alpha, *m, *n)?,
        BoundFamily::BwDecayed {
            d,
            horizon,
            eta,
            alpha,
            m0,
            n0,
        } => {
            println!("gamma = {}", bounds::decay_rate(*m0, *n0, *horizon)?);
            bounds::bound_bw_decayed(*d, *horizon, *eta, *alpha, *m0, *n0)?
        }
        BoundFamily::TimeVarying { d, horizon } => {
            bounds::bound_time_varying_anytime(*d, *horizon)?
        }
        BoundFamily::Anytime { d, horizon } => bounds::anytime_interval_bound(*d, *horizon)?,
    };
    println!("bound = {value}");
    Ok(())
}

fn print_certification(report: &ExperimentReport) -> bool {
    let mut ok = true;
    for run in &report.runs {
        let r = &run.report;
        let c = &run.certificates;
        let rounds_ok = c.min_slack >= -1e-9;
        let bw_ok = c.bw_violation.is_none_or(|v| v <= 1e-12);
        let pass = r.verdict == Verdict::Pass && rounds_ok && bw_ok;
        ok &= pass;
        let mut line = format!(
            "run {} seed {}: {} regret {} <= bound {} ({}), per-round slack {:e}",
            r.run_id,
            r.seed,
            r.regret_kind,
            r.regret,
            r.bound,
            if r.verdict == Verdict::Pass {
                "pass"
            } else {
                "fail"
            },
            c.min_slack,
        );
        if let Some(v) = c.bw_violation {
            line.push_str(&format!(", share conditions violation {v:e}"));
        }
        println!("{line}: {}", if pass { "PASS" } else { "FAIL" });
    }
    let failed = report.runs.len()
        - report
            .runs
            .iter()
            .filter(|r| r.report.verdict == Verdict::Pass)
            .count();
    println!(
        "summary: {} runs, {} bound failures, worst margin in run with regret {} vs bound {}",
        report.runs.len(),
        failed,
        report.summary.regret,
        report.summary.bound
    );
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, csv } => experiment::load_spec(config).and_then(|mut spec| {
            if csv.is_some() {
                spec.output.csv.clone_from(csv);
            }
            let report = experiment::run_experiment(&spec)?;
            if spec.output.csv.is_none() {
                write_csv_to(std::io::stdout().lock(), report.rows())?;
            }
            Ok(true)
        }),
        Command::Certify { config } => experiment::load_spec(config)
            .and_then(|spec| experiment::run_experiment(&spec))
            .map(|report| print_certification(&report)),
        Command::Tune { d, m0, u0, l0 } => match l0 {
            Some(l0) => bounds::tune_small_loss(*d, *m0, *u0, *l0),
            None => bounds::tune_fixed_share(*d, *m0, *u0),
        }
        .map(|t| {
            print_tuning(t);
            true
        }),
        Command::Project { alpha, v } => Distribution::new(v.clone())
            .and_then(|v| mix_projected(&v, *alpha))
            .map(|p| {
                let parts: Vec<String> = p.as_slice().iter().map(|x| x.to_string()).collect();
                println!("{}", parts.join(","));
                true
            }),
        Command::Bound { family } => eval_bound(family).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
