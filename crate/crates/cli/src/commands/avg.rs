use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use zerolab::averaging::{central_discrepancy, midpoint_step, triple_average_step, LineSequence};
use zerolab::fit::{log_log, LineFit};

use super::{execute, positive, Context};
use crate::config::{AvgConfig, Process};
use crate::error::{CliError, CliResult, During};
use crate::run::num;

#[derive(Debug, Args)]
pub struct AvgArgs {
    /// Number of lattice points, centred on 0.
    #[arg(long)]
    n: Option<usize>,
    /// Noise bound, in spacings.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    process: Option<Process>,
    #[arg(long)]
    trials: Option<usize>,
    /// Discrepancy window |n| <= RADIUS.
    #[arg(long)]
    radius: Option<i64>,
    /// First step included in the rate fit.
    #[arg(long)]
    first_sample: Option<usize>,
    /// Fit the log-log decay rate of the discrepancy.
    #[arg(long)]
    fit: bool,
}

impl AvgArgs {
    fn apply(&self, cfg: &mut AvgConfig) {
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.process {
            cfg.process = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.radius {
            cfg.radius = Some(v);
        }
        if let Some(v) = self.first_sample {
            cfg.first_sample = v;
        }
        cfg.fit |= self.fit;
    }
}

#[derive(Serialize)]
struct TrialFit {
    trial: usize,
    fit: LineFit,
}

#[derive(Serialize)]
struct FitSummary {
    /// Mean over trials.
    slope: f64,
    first_sample: usize,
    trials: Vec<TrialFit>,
}

fn simulate(cfg: &AvgConfig, seed: u64, trial: usize, radius: i64) -> CliResult<Vec<f64>> {
    let lo = -((cfg.n as i64 - 1) / 2);
    let hi = lo + cfg.n as i64 - 1;
    let step = match cfg.process {
        Process::Midpoint => midpoint_step,
        Process::Triple => triple_average_step,
    };
    let mut s = LineSequence::noisy_lattice(seed, trial as u64, lo, hi, cfg.eps)
        .during("averaging::LineSequence::noisy_lattice")?;
    let mut out = Vec::with_capacity(cfg.steps + 1);
    out.push(central_discrepancy(&s, radius).during("averaging::central_discrepancy")?);
    for _ in 0..cfg.steps {
        s = step(&s).during("averaging::step")?;
        out.push(central_discrepancy(&s, radius).during("averaging::central_discrepancy")?);
    }
    Ok(out)
}

pub fn run(ctx: &Context, args: &AvgArgs) -> CliResult<()> {
    ctx.reject_exact("avg")?;
    let mut cfg = ctx.file.avg.clone();
    args.apply(&mut cfg);
    positive("trials", cfg.trials)?;
    let radius = cfg.radius.unwrap_or(cfg.n as i64 / 4);
    let first = cfg.first_sample.max(1);
    if cfg.fit && first >= cfg.steps {
        return Err(CliError::config(format!("first_sample {first} leaves nothing to fit in {} steps", cfg.steps)));
    }
    execute(ctx, "avg", &cfg, |run| {
        let runs = (0..cfg.trials)
            .into_par_iter()
            .map(|t| simulate(&cfg, ctx.seed, t, radius))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<CliResult<Vec<_>>>()?;

        let rows = runs
            .iter()
            .enumerate()
            .flat_map(|(t, ds)| ds.iter().enumerate().map(move |(j, &d)| vec![t.to_string(), j.to_string(), num(d)]));
        run.csv("discrepancy.csv", &["trial [index]", "step [count]", "discrepancy [spacing]"], rows)?;

        if cfg.fit {
            let xs: Vec<f64> = (first..=cfg.steps).map(|j| j as f64).collect();
            let trials = runs
                .iter()
                .enumerate()
                .map(|(trial, ds)| Ok(TrialFit { trial, fit: log_log(&xs, &ds[first..]).during("fit::log_log")? }))
                .collect::<CliResult<Vec<_>>>()?;
            let slope = trials.iter().map(|t| t.fit.slope).sum::<f64>() / trials.len() as f64;
            let rows = trials
                .iter()
                .map(|t| vec![t.trial.to_string(), num(t.fit.slope), num(t.fit.intercept), num(t.fit.r_squared)]);
            run.csv(
                "fit.csv",
                &["trial [index]", "slope [log D / log step]", "intercept [log spacing]", "r_squared [1]"],
                rows,
            )?;
            run.json("fit.json", &FitSummary { slope, first_sample: first, trials })?;
        }
        Ok(())
    })
}
