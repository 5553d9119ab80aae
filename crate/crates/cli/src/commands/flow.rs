use clap::Args;
use serde::Serialize;
use zerolab::gaps::GapReport;
use zerolab::models::{build_model, cosine_fit, differentiation_flow, CosineFit};
use zerolab::perturbation::ProfileSpec;

use super::{execute, Context};
use crate::config::FlowConfig;
use crate::error::{CliResult, During};
use crate::run::num;

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Truncation radius: zeros indexed by |j| <= J.
    #[arg(long = "J", value_name = "J")]
    truncation: Option<usize>,
    /// Zero density.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Bound of a seeded uniform profile; replaces any profile from the config file.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    trial: Option<u64>,
    #[arg(long)]
    fit_window: Option<f64>,
}

impl FlowArgs {
    fn apply(&self, cfg: &mut FlowConfig) {
        if let Some(v) = self.truncation {
            cfg.truncation = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
            cfg.profile = None;
        }
        if let Some(v) = self.trial {
            cfg.trial = v;
        }
        if let Some(v) = self.fit_window {
            cfg.fit_window = v;
        }
    }
}

/// The profile a flow config describes.
pub fn profile_spec(cfg: &FlowConfig) -> ProfileSpec {
    match &cfg.profile {
        Some(p) => p.clone(),
        None if cfg.eps == 0.0 => ProfileSpec::Zero,
        None => {
            let j = cfg.truncation as i64;
            ProfileSpec::Random { lo: -j, hi: j, eps: cfg.eps }
        }
    }
}

#[derive(Serialize)]
struct StepReport<'a> {
    step: usize,
    report: &'a GapReport,
}

#[derive(Serialize)]
struct GapReports<'a> {
    window_radius: f64,
    steps: Vec<StepReport<'a>>,
}

#[derive(Serialize)]
struct StepFit {
    step: usize,
    fit: CosineFit,
}

#[derive(Serialize)]
struct FitSummary {
    window: (f64, f64),
    steps: Vec<StepFit>,
}

pub fn run(ctx: &Context, args: &FlowArgs) -> CliResult<()> {
    ctx.reject_exact("flow")?;
    let mut cfg = ctx.file.flow.clone();
    args.apply(&mut cfg);
    let spec = profile_spec(&cfg);
    cfg.profile = Some(spec.clone());
    execute(ctx, "flow", &cfg, |run| {
        let profile = spec.build(ctx.seed, cfg.trial).during("perturbation::ProfileSpec::build")?;
        let model = build_model(&profile, cfg.truncation, cfg.kappa).during("models::build_model")?;
        let flow = differentiation_flow(&model, cfg.steps).during("models::differentiation_flow")?;
        let radius = flow.window_radius;

        let mut trajectory = Vec::new();
        for step in &flow.steps {
            let zeros = step.zeros.values();
            let origin = zeros.partition_point(|&x| x < 0.0) as i64;
            for (i, &x) in zeros.iter().enumerate().filter(|(_, x)| x.abs() <= radius) {
                trajectory.push(vec![step.order.to_string(), (i as i64 - origin).to_string(), num(x)]);
            }
        }
        run.csv("trajectory.csv", &["step [derivatives]", "index [rank from origin]", "zero [x]"], trajectory)?;

        let summary = flow.steps.iter().map(|s| {
            let r = &s.report;
            vec![
                s.order.to_string(),
                r.gaps.len().to_string(),
                num(r.min_gap),
                num(r.max_gap),
                num(r.mean_gap),
                num(r.sup_discrepancy),
                num(s.order as f64 * r.sup_discrepancy),
            ]
        });
        run.csv(
            "steps.csv",
            &[
                "step [derivatives]",
                "gaps [count]",
                "min_gap [x]",
                "max_gap [x]",
                "mean_gap [x]",
                "sup_discrepancy [x]",
                "step_times_discrepancy [x]",
            ],
            summary,
        )?;

        let reports = GapReports {
            window_radius: radius,
            steps: flow.steps.iter().map(|s| StepReport { step: s.order, report: &s.report }).collect(),
        };
        run.json("gap_reports.json", &reports)?;

        let half = cfg.fit_window.min(radius);
        let window = (-half, half);
        let fits = flow
            .steps
            .iter()
            .map(|s| {
                Ok(StepFit { step: s.order, fit: cosine_fit(s.zeros.values(), window).during("models::cosine_fit")? })
            })
            .collect::<CliResult<Vec<_>>>()?;
        run.json("cosine_fit.json", &FitSummary { window, steps: fits })
    })
}
