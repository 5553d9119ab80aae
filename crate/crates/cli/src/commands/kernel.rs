use clap::Args;
use serde::Serialize;
use zerolab::fit::LineFit;
use zerolab::kernels::{
    discrepancy_bound, fourier_center, fourier_center_exact, iterate_center, log_spaced, rate_fit, KernelSpec,
    SmoothingKernel,
};

use super::{execute, positive, Context};
use crate::config::{KernelConfig, Route};
use crate::error::{CliError, CliResult, During};
use crate::run::num;

const FOURIER_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// `delta`, `midpoint2`, `triple`, `diff2[:RADIUS]` or `tail:EXPONENT[:RADIUS]`.
    #[arg(long)]
    preset: Option<String>,
    /// Tabulate P^l(0) for l = 1..=lmax.
    #[arg(long)]
    center: bool,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long, value_enum)]
    route: Option<Route>,
    /// Fit the decay rate of P^l(0) over [LO, HI].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    fit_range: Option<Vec<usize>>,
    #[arg(long)]
    fit_points: Option<usize>,
    /// Also tabulate the discrepancy bound for a profile bounded by this value.
    #[arg(long)]
    bound_eps: Option<f64>,
}

impl KernelArgs {
    fn apply(&self, cfg: &mut KernelConfig) {
        if let Some(name) = &self.preset {
            cfg.kernel = KernelSpec::Preset(name.clone());
        }
        cfg.center |= self.center;
        if let Some(v) = self.lmax {
            cfg.lmax = v;
        }
        if let Some(v) = self.route {
            cfg.route = v;
        }
        if let Some(v) = &self.fit_range {
            cfg.fit_range = Some([v[0], v[1]]);
        }
        if let Some(v) = self.fit_points {
            cfg.fit_points = v;
        }
        if let Some(v) = self.bound_eps {
            cfg.bound_eps = Some(v);
        }
    }
}

#[derive(Serialize)]
struct KernelFit {
    kernel: String,
    powers: Vec<usize>,
    fit: LineFit,
}

#[derive(Serialize)]
struct Settings<'a> {
    exact: bool,
    #[serde(flatten)]
    kernel: &'a KernelConfig,
}

fn center_rows(
    p: &SmoothingKernel,
    cfg: &KernelConfig,
    exact: bool,
    header: &mut Vec<&str>,
) -> CliResult<Vec<Vec<String>>> {
    let mut rows = Vec::with_capacity(cfg.lmax);
    if exact {
        header.extend(["center [mass]", "center_decimal [mass]"]);
        for l in 1..=cfg.lmax {
            let r = fourier_center_exact(p, l).during("kernels::fourier_center_exact")?;
            let decimal = zerolab::kernels::Center::Exact(r.clone()).to_f64();
            rows.push(vec![l.to_string(), r.to_string(), num(decimal)]);
        }
    } else {
        match cfg.route {
            Route::Convolution => header.push("center [mass]"),
            Route::Fourier => header.push("fourier_center [mass]"),
            Route::Both => header.extend(["center [mass]", "fourier_center [mass]", "difference [mass]"]),
        }
        for l in 1..=cfg.lmax {
            let mut row = vec![l.to_string()];
            let conv = || iterate_center(p, l).map(|c| c.to_f64()).during("kernels::iterate_center");
            let four = || fourier_center(p, l, FOURIER_TOLERANCE).during("kernels::fourier_center");
            match cfg.route {
                Route::Convolution => row.push(num(conv()?)),
                Route::Fourier => row.push(num(four()?)),
                Route::Both => {
                    let (a, b) = (conv()?, four()?);
                    row.extend([num(a), num(b), num(a - b)]);
                }
            }
            rows.push(row);
        }
    }
    if let Some(eps) = cfg.bound_eps {
        header.push("discrepancy_bound [spacing]");
        for (l, row) in (1..).zip(rows.iter_mut()) {
            row.push(num(discrepancy_bound(p, l, eps).during("kernels::discrepancy_bound")?));
        }
    }
    Ok(rows)
}

pub fn run(ctx: &Context, args: &KernelArgs) -> CliResult<()> {
    let mut cfg = ctx.file.kernel.clone();
    args.apply(&mut cfg);
    if !cfg.center && cfg.fit_range.is_none() {
        return Err(CliError::config("nothing to compute: pass --center or --fit-range"));
    }
    if cfg.center {
        positive("lmax", cfg.lmax)?;
    }
    let settings = Settings { exact: ctx.exact, kernel: &cfg };
    execute(ctx, "kernel", &settings, |run| {
        let p = SmoothingKernel::from_spec(&cfg.kernel, ctx.exact).during("kernels::SmoothingKernel::from_spec")?;
        if ctx.exact && !p.is_exact() && p.symbol().is_none() {
            return Err(CliError::config(format!("kernel {} has no exact form; drop --exact", p.name())));
        }
        if cfg.center {
            let mut header = vec!["power [count]"];
            let rows = center_rows(&p, &cfg, ctx.exact, &mut header)?;
            run.csv("centers.csv", &header, rows)?;
        }
        if let Some([lo, hi]) = cfg.fit_range {
            let powers = log_spaced(lo, hi, cfg.fit_points);
            let fit = rate_fit(&p, &powers).during("kernels::rate_fit")?;
            run.json("fit.json", &KernelFit { kernel: p.name().to_string(), powers, fit })?;
        }
        Ok(())
    })
}
