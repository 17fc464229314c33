//! Experiment driver behind the command-line tool.
//!
//! Every command draws block `i` from its own seeded stream (see
//! [`runner::block_seed`]), runs the blocks on a fixed worker pool and folds
//! the per-block results in block order, so the CSV bytes depend only on the
//! config and the seed.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, SchemeChoice, Waveform};
pub use report::{Cell, Report};
pub use runner::{block_rng, block_seed, Runner, Stream};

use crate::channel::{run_ser_curve, SerSetup, SoftLimiter};
use crate::constellation::QamConstellation;
use crate::peaks::{self, pooled_lag_covariance, power_covariance_closed_form, BlockLagStats, CcdfAccumulator};
use crate::ti::{RoundStats, Scheme, TiConfig, TiSolver};
use crate::transform::TransformPlan;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ccdf,
    Ser,
    Power,
    Covcheck,
    Complexity,
}

pub fn run_command(cmd: Command, cfg: &ExperimentConfig, runner: &Runner) -> Result<Report> {
    match cmd {
        Command::Ccdf => cmd_ccdf(cfg, runner),
        Command::Ser => cmd_ser(cfg, runner),
        Command::Power => cmd_power(cfg, runner),
        Command::Covcheck => cmd_covcheck(cfg, runner),
        Command::Complexity => cmd_complexity(cfg, runner),
    }
}

/// Per-block measurements of one PAPR run.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    /// Peak power of the transmitted block over `E_s`, in dB.
    pub papr_db: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub iterations: usize,
    pub leaves: usize,
    pub nwcs: u64,
    pub rounds: Vec<RoundStats>,
}

/// Runs `n_blocks` random blocks through the optional solver.
pub fn simulate_blocks(
    plan: &TransformPlan,
    qam: &QamConstellation,
    ti: Option<&TiConfig>,
    n_blocks: usize,
    seed: u64,
    runner: &Runner,
) -> Result<Vec<BlockOutcome>> {
    let delta = qam.lattice_step();
    let solver = ti.map(|t| TiSolver::new(plan, delta, t.clone())).transpose()?;
    let es = qam.avg_energy();
    let n = plan.n_subcarriers();
    runner.try_map(n_blocks, |i| {
        let mut rng = block_rng(seed, Stream::Blocks, i as u64);
        let (_, s) = qam.random_block(&mut rng, n);
        let energy_before = energy(&s);
        match &solver {
            None => Ok(BlockOutcome {
                papr_db: peaks::papr_db(&plan.idaft(&s)?, es)?,
                energy_before,
                energy_after: energy_before,
                iterations: 0,
                leaves: 0,
                nwcs: 0,
                rounds: Vec::new(),
            }),
            Some(solver) => {
                let r = solver.solve(&s)?;
                Ok(BlockOutcome {
                    papr_db: 10.0 * (r.peak_power / es).log10(),
                    energy_before,
                    energy_after: energy(&r.b.apply(&s, delta)),
                    iterations: r.iterations_used,
                    leaves: r.leaves_visited,
                    nwcs: r.nwcs_evaluations,
                    rounds: r.rounds,
                })
            }
        }
    })
}

fn energy(x: &[num_complex::Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// CCDF and power increase of one configured run.
#[derive(Debug, Clone, PartialEq)]
pub struct PaprSummary {
    pub ccdf: CcdfAccumulator,
    pub power_increase_db: f64,
    pub blocks: usize,
}

pub fn summarize(outcomes: &[BlockOutcome]) -> PaprSummary {
    let mut ccdf = CcdfAccumulator::default();
    let (mut before, mut after) = (0.0, 0.0);
    for o in outcomes {
        ccdf.accumulate(o.papr_db);
        before += o.energy_before;
        after += o.energy_after;
    }
    PaprSummary {
        ccdf,
        power_increase_db: 10.0 * (after / before).log10(),
        blocks: outcomes.len(),
    }
}

/// Simulates the configured scheme and summarizes it.
pub fn papr_summary(cfg: &ExperimentConfig, runner: &Runner) -> Result<PaprSummary> {
    let plan = cfg.plan()?;
    let qam = cfg.constellation()?;
    let outcomes = simulate_blocks(
        &plan,
        &qam,
        cfg.ti_config().as_ref(),
        cfg.monte_carlo.n_blocks,
        cfg.monte_carlo.seed,
        runner,
    )?;
    Ok(summarize(&outcomes))
}

/// Rows `(threshold_db, ccdf)` on the 0..14 dB grid.
pub fn cmd_ccdf(cfg: &ExperimentConfig, runner: &Runner) -> Result<Report> {
    let summary = papr_summary(cfg, runner)?;
    let mut report = Report::new(vec!["threshold_db", "ccdf"]);
    for (t, p) in summary.ccdf.rows() {
        report.push(vec![t.into(), p.into()]);
    }
    Ok(report)
}

fn scheme_label(cfg: &ExperimentConfig) -> &'static str {
    match cfg.ti.scheme {
        SchemeChoice::None => "none",
        SchemeChoice::Cr => "cr",
        SchemeChoice::Fcr => "fcr",
    }
}

/// One row `(scheme, power_increase_db, blocks)`.
pub fn cmd_power(cfg: &ExperimentConfig, runner: &Runner) -> Result<Report> {
    let summary = papr_summary(cfg, runner)?;
    let mut report = Report::new(vec!["scheme", "power_increase_db", "blocks"]);
    report.push(vec![
        scheme_label(cfg).into(),
        summary.power_increase_db.into(),
        summary.blocks.into(),
    ]);
    Ok(report)
}

/// Rows `(esn0_db, ser, errors, symbols)`.
pub fn cmd_ser(cfg: &ExperimentConfig, runner: &Runner) -> Result<Report> {
    let plan = cfg.plan()?;
    let qam = cfg.constellation()?;
    let ti = cfg.ti_config();
    let solver = ti
        .map(|t| TiSolver::new(&plan, qam.lattice_step(), t))
        .transpose()?;
    let limiter = if cfg.channel.limiter_enabled {
        Some(SoftLimiter::from_db(cfg.channel.limiter_db, qam.avg_energy())?)
    } else {
        None
    };
    let setup = SerSetup {
        plan: &plan,
        qam: &qam,
        solver: solver.as_ref(),
        limiter,
        esn0_db: cfg.channel.esn0_db.clone(),
        modulo: solver.is_some(),
        n_blocks: cfg.monte_carlo.n_blocks,
        calibration_blocks: cfg.monte_carlo.calibration_blocks,
        seed: cfg.monte_carlo.seed,
    };
    let curve = run_ser_curve(&setup, runner)?;
    let mut report = Report::new(vec!["esn0_db", "ser", "errors", "symbols"]);
    for (snr, acc) in curve.esn0_db.iter().zip(&curve.points) {
        report.push(vec![(*snr).into(), acc.ser().into(), acc.errors.into(), acc.symbols.into()]);
    }
    Ok(report)
}

/// Lagged power covariance of unoptimized blocks against the closed form.
///
/// Rows `(delta_n_samples, empirical_cov, std_error, closed_form_cov,
/// rel_error)`; `rel_error` is empty where the closed form is zero.
pub fn cmd_covcheck(cfg: &ExperimentConfig, runner: &Runner) -> Result<Report> {
    let plan = cfg.plan()?;
    let qam = cfg.constellation()?;
    let l = plan.oversampling();
    let lags: Vec<usize> = cfg.covcheck.lags.clone().unwrap_or_else(|| (1..=l).collect());
    let n = plan.n_subcarriers();
    let seed = cfg.monte_carlo.seed;
    let stats = runner.try_map(cfg.monte_carlo.n_blocks, |i| {
        let mut rng = block_rng(seed, Stream::Blocks, i as u64);
        let (_, s) = qam.random_block(&mut rng, n);
        Ok(BlockLagStats::from_signal(&plan.idaft(&s)?, &lags))
    })?;
    let mut report = Report::new(vec![
        "delta_n_samples",
        "empirical_cov",
        "std_error",
        "closed_form_cov",
        "rel_error",
    ]);
    for c in pooled_lag_covariance(&lags, &stats) {
        let cf = power_covariance_closed_form(c.lag as i64, l, n, qam.avg_energy())?;
        let rel = if cf == 0.0 {
            Cell::Empty
        } else {
            ((c.covariance - cf) / cf).abs().into()
        };
        report.push(vec![c.lag.into(), c.covariance.into(), c.std_error.into(), cf.into(), rel]);
    }
    Ok(report)
}

/// `N_p = 2 log2 N` and `N_c = round(N L / (8 log2 N))`, capped at `N`,
/// which makes the worst-case per-iteration count `4 N_c N_p` close to `N L`.
pub fn scaling_rule(n_subcarriers: usize, oversampling: usize) -> (usize, usize) {
    let lg = (n_subcarriers as f64).log2();
    let n_p = (2.0 * lg).round() as usize;
    let n_c = ((n_subcarriers * oversampling) as f64 / (8.0 * lg)).round() as usize;
    (n_p.max(1), n_c.clamp(1, n_subcarriers))
}

/// Per-size complexity counters.
///
/// Rows `(n_subcarriers, n_peaks, n_filtered, nl_samples, per_iter_nwcs,
/// mean_round_nwcs, total_nwcs, iterations, leaves, law_violations)`.
/// `per_iter_nwcs` is the worst case `4 N_c N_p`; `total_nwcs`, `iterations`
/// and `leaves` are per-block means; `law_violations` counts scoring rounds
/// whose NWCS count differs from `4 N_c min(N_p, |P|)`.
pub fn cmd_complexity(cfg: &ExperimentConfig, runner: &Runner) -> Result<Report> {
    let qam = cfg.constellation()?;
    let Some(base) = cfg.ti_config() else {
        return Err(Error::config("ti.scheme", "complexity needs scheme = \"cr\" or \"fcr\""));
    };
    let mut report = Report::new(vec![
        "n_subcarriers",
        "n_peaks",
        "n_filtered",
        "nl_samples",
        "per_iter_nwcs",
        "mean_round_nwcs",
        "total_nwcs",
        "iterations",
        "leaves",
        "law_violations",
    ]);
    for &n in &cfg.complexity.sizes {
        let plan = cfg.plan_for(n)?;
        let mut ti = base.clone();
        if cfg.complexity.scaling_rule {
            let (n_p, n_c) = scaling_rule(n, plan.oversampling());
            ti.n_peaks = n_p;
            if ti.scheme == Scheme::Fcr {
                ti.n_filtered = n_c;
            }
        }
        let n_c = if ti.scheme == Scheme::Fcr { ti.n_filtered } else { n };
        let outcomes = simulate_blocks(&plan, &qam, Some(&ti), cfg.monte_carlo.n_blocks, cfg.monte_carlo.seed, runner)?;
        let blocks = outcomes.len() as f64;
        let rounds: Vec<&RoundStats> = outcomes.iter().flat_map(|o| &o.rounds).collect();
        let violations = rounds
            .iter()
            .filter(|r| r.nwcs != 4 * (n_c * r.peaks_found.min(ti.n_peaks)) as u64)
            .count();
        let mean_round = rounds.iter().map(|r| r.nwcs as f64).sum::<f64>() / rounds.len().max(1) as f64;
        let mean = |f: &dyn Fn(&BlockOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / blocks;
        report.push(vec![
            n.into(),
            ti.n_peaks.into(),
            n_c.into(),
            (n * plan.oversampling()).into(),
            (4 * n_c * ti.n_peaks).into(),
            mean_round.into(),
            mean(&|o| o.nwcs as f64).into(),
            mean(&|o| o.iterations as f64).into(),
            mean(&|o| o.leaves as f64).into(),
            violations.into(),
        ]);
    }
    Ok(report)
}

