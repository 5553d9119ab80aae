use clap::Args;
use serde::Serialize;
use zerolab::perturbation::{compare_circle, compare_line, Comparison, OffsetKind, ProfileSpec};

use super::{execute, positive, Context};
use crate::config::{Geometry, PerturbConfig};
use crate::error::{CliError, CliResult, During};
use crate::run::num;

fn parse_kind(s: &str) -> Result<OffsetKind, String> {
    match s {
        "alpha" => Ok(OffsetKind::Alpha),
        "beta" => Ok(OffsetKind::Beta),
        _ => Err(format!("expected alpha or beta, got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long, value_enum)]
    mode: Option<Geometry>,
    /// Truncation radius on the line.
    #[arg(long = "J", value_name = "J")]
    truncation: Option<usize>,
    /// Degree on the circle.
    #[arg(long)]
    n: Option<usize>,
    /// Offsets of the first (alpha) or second (beta) derivative zeros; the circle supports alpha only.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<OffsetKind>,
    /// Bound of a seeded uniform profile (spacings on the line, turns on the circle).
    #[arg(long)]
    eps: Option<f64>,
    /// Single perturbation of zero INDEX by VALUE.
    #[arg(long, num_args = 2, value_names = ["INDEX", "VALUE"], allow_negative_numbers = true)]
    bump: Option<Vec<f64>>,
    #[arg(long)]
    trial: Option<u64>,
}

impl PerturbArgs {
    fn apply(&self, cfg: &mut PerturbConfig) -> CliResult<()> {
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.truncation {
            cfg.truncation = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.kind {
            cfg.kind = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = Some(v);
            cfg.profile = None;
        }
        if let Some(v) = &self.bump {
            let (index, value) = (v[0], v[1]);
            if index.fract() != 0.0 || index.abs() > i64::MAX as f64 {
                return Err(CliError::config(format!("bump index {index} is not an integer")));
            }
            cfg.profile = Some(ProfileSpec::Bump { index: index as i64, value });
        }
        if let Some(v) = self.trial {
            cfg.trial = v;
        }
        Ok(())
    }
}

fn profile_spec(cfg: &PerturbConfig) -> ProfileSpec {
    if let Some(p) = &cfg.profile {
        return p.clone();
    }
    match cfg.mode {
        Geometry::Line => {
            let j = cfg.truncation as i64;
            ProfileSpec::Random { lo: -j, hi: j, eps: cfg.eps.unwrap_or(0.02) }
        }
        Geometry::Circle => {
            ProfileSpec::Random { lo: 0, hi: cfg.n as i64 - 1, eps: cfg.eps.unwrap_or(0.04 / cfg.n as f64) }
        }
    }
}

#[derive(Serialize)]
struct Summary {
    mode: Geometry,
    kind: OffsetKind,
    size: usize,
    shift: f64,
    max_abs_error: f64,
    tail_bound: f64,
    flagged: usize,
}

pub fn run(ctx: &Context, args: &PerturbArgs) -> CliResult<()> {
    ctx.reject_exact("perturb")?;
    let mut cfg = ctx.file.perturb.clone();
    args.apply(&mut cfg)?;
    let size = match cfg.mode {
        Geometry::Line => cfg.truncation,
        Geometry::Circle => cfg.n,
    };
    positive("size", size)?;
    if cfg.mode == Geometry::Circle && cfg.kind == OffsetKind::Beta {
        return Err(CliError::config("circle offsets are available for kind = alpha only"));
    }
    cfg.profile = Some(profile_spec(&cfg));
    execute(ctx, "perturb", &cfg, |run| {
        let spec = cfg.profile.as_ref().expect("profile resolved above");
        let e = spec.build(ctx.seed, cfg.trial).during("perturbation::ProfileSpec::build")?;
        let (cmp, unit): (Comparison, &str) = match cfg.mode {
            Geometry::Line => {
                (compare_line(&e, cfg.truncation, cfg.kind).during("perturbation::compare_line")?, "spacing")
            }
            Geometry::Circle => (compare_circle(&e, cfg.n).during("perturbation::compare_circle")?, "turns"),
        };
        let header = [
            "k [index]".to_string(),
            format!("predicted [{unit}]"),
            format!("measured [{unit}]"),
            format!("abs_error [{unit}]"),
            format!("eps [{unit}]"),
            "flagged [bool]".to_string(),
        ];
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = cmp.rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                num(r.predicted),
                num(r.measured),
                num(r.abs_error),
                num(r.eps),
                r.flagged.to_string(),
            ]
        });
        run.csv("table.csv", &header, rows)?;
        run.json(
            "summary.json",
            &Summary {
                mode: cfg.mode,
                kind: cfg.kind,
                size,
                shift: cmp.shift,
                max_abs_error: cmp.max_abs_error,
                tail_bound: cmp.tail_bound,
                flagged: cmp.rows.iter().filter(|r| r.flagged).count(),
            },
        )
    })
}
