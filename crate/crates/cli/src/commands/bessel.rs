use clap::Args;
use rayon::prelude::*;
use zerolab::models::bessel_cosine_error;

use super::{execute, Context};
use crate::config::BesselConfig;
use crate::error::{CliError, CliResult, During};
use crate::run::num;

#[derive(Debug, Args)]
pub struct BesselArgs {
    /// Bessel orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<u32>>,
    /// Derivative counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<u32>>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
}

impl BesselArgs {
    fn apply(&self, cfg: &mut BesselConfig) {
        if let Some(v) = &self.orders {
            cfg.orders = v.clone();
        }
        if let Some(v) = &self.ks {
            cfg.ks = v.clone();
        }
        if let Some(v) = self.grid_points {
            cfg.grid_points = v;
        }
        if let Some(v) = self.half_width {
            cfg.half_width = v;
        }
    }
}

pub fn run(ctx: &Context, args: &BesselArgs) -> CliResult<()> {
    ctx.reject_exact("bessel")?;
    let mut cfg = ctx.file.bessel.clone();
    args.apply(&mut cfg);
    if cfg.grid_points < 2 || cfg.half_width.is_nan() || cfg.half_width <= 0.0 {
        return Err(CliError::config("need grid_points >= 2 and half_width > 0"));
    }
    let step = 2.0 * cfg.half_width / (cfg.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..cfg.grid_points).map(|i| -cfg.half_width + i as f64 * step).collect();
    let cases: Vec<(u32, u32)> = cfg.orders.iter().flat_map(|&n| cfg.ks.iter().map(move |&k| (n, k))).collect();
    execute(ctx, "bessel", &cfg, |run| {
        let results = cases
            .par_iter()
            .map(|&(n, k)| bessel_cosine_error(n, k, &grid).during("models::bessel_cosine_error"))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<CliResult<Vec<_>>>()?;
        let rows = results.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                num(r.sup_relative_error),
                r.used.to_string(),
                r.excluded.len().to_string(),
                num(r.fitted_phase),
            ]
        });
        run.csv(
            "errors.csv",
            &[
                "order [n]",
                "k [derivatives]",
                "sup_relative_error [1]",
                "used [points]",
                "excluded [points]",
                "fitted_phase [rad]",
            ],
            rows,
        )
    })
}
