use clap::Args;
use num_complex::Complex64;
use rayon::prelude::*;
use zerolab::averaging::{circle_average_step, circle_contraction, predicted_circle_contraction, CirclePoints};
use zerolab::circle::{attractor_iterate, AttractorReport, CirclePolynomial};

use super::{execute, positive, Context};
use crate::config::{CircleConfig, CircleMode};
use crate::error::{CliResult, During};
use crate::run::{num, RunDir};

#[derive(Debug, Args)]
pub struct CircleArgs {
    #[arg(long, value_enum)]
    mode: Option<CircleMode>,
    #[arg(long)]
    trials: Option<usize>,
    /// Averaging: number of points.
    #[arg(long)]
    n: Option<usize>,
    /// Averaging: jitter of each point, in spacings.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    /// Attractor: degree of the random polynomials.
    #[arg(long)]
    degree: Option<usize>,
    /// Attractor: number of operator applications.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
}

impl CircleArgs {
    fn apply(&self, cfg: &mut CircleConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { cfg.$f = v; })*};
        }
        set!(mode, trials, n, jitter, burn_in, pairs, degree, k, r_min, r_max);
    }
}

fn averaging(ctx: &Context, cfg: &CircleConfig, run: &mut RunDir) -> CliResult<()> {
    let steps = cfg.burn_in + 2 * cfg.pairs;
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> CliResult<(Vec<f64>, f64)> {
            let start = CirclePoints::jittered(ctx.seed, t as u64, cfg.n, cfg.jitter)
                .during("averaging::CirclePoints::jittered")?;
            let mut cur = start.clone();
            let mut path = vec![cur.discrepancy()];
            for _ in 0..steps {
                cur = circle_average_step(&cur).during("averaging::circle_average_step")?;
                path.push(cur.discrepancy());
            }
            let rate = circle_contraction(&start, cfg.burn_in, cfg.pairs).during("averaging::circle_contraction")?;
            Ok((path, rate))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;

    let rows = results.iter().enumerate().flat_map(|(t, (path, _))| {
        path.iter().enumerate().map(move |(j, &d)| vec![t.to_string(), j.to_string(), num(d)])
    });
    run.csv("discrepancy.csv", &["trial [index]", "step [count]", "discrepancy [rad]"], rows)?;

    let predicted = predicted_circle_contraction(cfg.n);
    let rows = results
        .iter()
        .enumerate()
        .map(|(t, (_, rate))| vec![t.to_string(), num(*rate), num(predicted), num((rate - predicted) / predicted)]);
    run.csv(
        "rate.csv",
        &["trial [index]", "contraction [per step]", "predicted [per step]", "relative_error [1]"],
        rows,
    )
}

fn nearest<'a>(targets: &'a [Complex64], z: &Complex64) -> &'a Complex64 {
    targets.iter().min_by(|a, b| (*a - z).norm().total_cmp(&(*b - z).norm())).expect("degree is positive")
}

fn attractor(ctx: &Context, cfg: &CircleConfig, run: &mut RunDir) -> CliResult<()> {
    let trials = if cfg.polynomial.is_some() { 1 } else { cfg.trials };
    let reports = (0..trials)
        .into_par_iter()
        .map(|t| -> CliResult<AttractorReport> {
            let f = match &cfg.polynomial {
                Some(spec) => spec.build().during("circle::PolynomialSpec::build")?,
                None => CirclePolynomial::random_annulus(ctx.seed, t as u64, cfg.degree, cfg.r_min, cfg.r_max)
                    .during("circle::CirclePolynomial::random_annulus")?,
            };
            attractor_iterate(&f, cfg.k).during("circle::attractor_iterate")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;

    let rows = reports.iter().enumerate().map(|(t, r)| {
        vec![t.to_string(), r.zeros.len().to_string(), r.iterations.to_string(), num(r.radius), num(r.max_distance)]
    });
    run.csv(
        "attractor.csv",
        &["trial [index]", "degree [count]", "iterations [count]", "radius [modulus]", "max_distance [modulus]"],
        rows,
    )?;
    let rows = reports.iter().enumerate().flat_map(|(t, r)| {
        r.zeros.iter().enumerate().map(move |(i, z)| {
            let w = nearest(&r.targets, z);
            vec![t.to_string(), i.to_string(), num(z.re), num(z.im), num(w.re), num(w.im)]
        })
    });
    run.csv(
        "zeros.csv",
        &["trial [index]", "zero [index]", "re [1]", "im [1]", "nearest_target_re [1]", "nearest_target_im [1]"],
        rows,
    )
}

pub fn run(ctx: &Context, args: &CircleArgs) -> CliResult<()> {
    ctx.reject_exact("circle")?;
    let mut cfg = ctx.file.circle.clone();
    args.apply(&mut cfg);
    positive("trials", cfg.trials)?;
    execute(ctx, "circle", &cfg, |run| match cfg.mode {
        CircleMode::Averaging => averaging(ctx, &cfg, run),
        CircleMode::Attractor => attractor(ctx, &cfg, run),
    })
}
