//! TOML config file: optional top-level `seed`, `threads`, `exact`, and one
//! table per experiment. Every key has a default; command-line flags win.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use zerolab::circle::PolynomialSpec;
use zerolab::kernels::KernelSpec;
use zerolab::perturbation::{OffsetKind, ProfileSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub exact: Option<bool>,
    pub flow: FlowConfig,
    pub avg: AvgConfig,
    pub kernel: KernelConfig,
    pub perturb: PerturbConfig,
    pub circle: CircleConfig,
    pub bessel: BesselConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Zeros of the truncated product are indexed by `|j| <= truncation`.
    #[serde(alias = "J")]
    pub truncation: usize,
    pub kappa: f64,
    pub steps: usize,
    /// Bound of the seeded uniform profile, used when `profile` is absent.
    pub eps: f64,
    pub profile: Option<ProfileSpec>,
    pub trial: u64,
    /// Half-width of the cosine-fit window, clipped to the reliable window.
    pub fit_window: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { truncation: 500, kappa: 1.0, steps: 30, eps: 0.05, profile: None, trial: 0, fit_window: 25.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Midpoint,
    Triple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AvgConfig {
    /// Number of lattice points, centred on 0.
    pub n: usize,
    pub eps: f64,
    pub steps: usize,
    pub process: Process,
    pub trials: usize,
    /// Discrepancy is taken over indices `|n| <= radius`; defaults to a quarter of the points.
    pub radius: Option<i64>,
    pub first_sample: usize,
    pub fit: bool,
}

impl Default for AvgConfig {
    fn default() -> Self {
        AvgConfig {
            n: 4001,
            eps: 0.4,
            steps: 400,
            process: Process::Midpoint,
            trials: 1,
            radius: None,
            first_sample: 10,
            fit: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Convolution,
    Fourier,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub kernel: KernelSpec,
    pub center: bool,
    pub lmax: usize,
    pub route: Route,
    /// Fit `log P^l(0)` against `log l` over `[lo, hi]`.
    pub fit_range: Option<[usize; 2]>,
    pub fit_points: usize,
    /// Add the discrepancy bound for a profile bounded by this value.
    pub bound_eps: Option<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            kernel: KernelSpec::Preset("midpoint2".to_string()),
            center: false,
            lmax: 20,
            route: Route::Convolution,
            fit_range: None,
            fit_points: 12,
            bound_eps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Line,
    Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbConfig {
    pub mode: Geometry,
    #[serde(alias = "J")]
    pub truncation: usize,
    /// Degree on the circle.
    pub n: usize,
    pub kind: OffsetKind,
    /// Bound of the seeded uniform profile: spacings on the line, turns on
    /// the circle. Defaults to 0.02 on the line and 0.04/n on the circle.
    pub eps: Option<f64>,
    pub profile: Option<ProfileSpec>,
    pub trial: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            mode: Geometry::Line,
            truncation: zerolab::perturbation::DEFAULT_TRUNCATION,
            n: 16,
            kind: OffsetKind::Alpha,
            eps: None,
            profile: None,
            trial: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CircleMode {
    Averaging,
    Attractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    pub mode: CircleMode,
    pub trials: usize,
    /// Averaging: number of points and their jitter in spacings.
    pub n: usize,
    pub jitter: f64,
    pub burn_in: usize,
    pub pairs: usize,
    /// Attractor: random zeros with modulus in `[r_min, r_max)`, or a fixed polynomial.
    pub degree: usize,
    pub k: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub polynomial: Option<PolynomialSpec>,
}

impl Default for CircleConfig {
    fn default() -> Self {
        CircleConfig {
            mode: CircleMode::Averaging,
            trials: 1,
            n: 8,
            jitter: 0.3,
            burn_in: 50,
            pairs: 50,
            degree: 8,
            k: 60,
            r_min: 0.5,
            r_max: 2.0,
            polynomial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesselConfig {
    pub orders: Vec<u32>,
    pub ks: Vec<u32>,
    /// Evenly spaced sample points on `[-half_width, half_width]`.
    pub grid_points: usize,
    pub half_width: f64,
}

impl Default for BesselConfig {
    fn default() -> Self {
        BesselConfig { orders: vec![0, 1], ks: vec![10, 20, 40, 80], grid_points: 101, half_width: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: FileConfig = toml::from_str("").unwrap();
        assert_eq!(c.flow, FlowConfig::default());
        assert_eq!(c.seed, None);
    }

    #[test]
    fn sections_parse() {
        let c: FileConfig = toml::from_str(
            r#"
            seed = 11
            [flow]
            J = 200
            steps = 10
            profile = { kind = "explicit", values = [[0, 0.1], [3, -0.2]] }
            [kernel]
            kernel = { masses = [[0, "1/2"], [1, "1/4"]] }
            center = true
            [perturb]
            mode = "circle"
            kind = "beta"
            [circle]
            mode = "attractor"
            polynomial = { angles = [0.0, 1.0, 2.0] }
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, Some(11));
        assert_eq!(c.flow.truncation, 200);
        assert_eq!(c.flow.profile, Some(ProfileSpec::Explicit { values: vec![(0, 0.1), (3, -0.2)] }));
        assert!(matches!(c.kernel.kernel, KernelSpec::Masses { .. }));
        assert_eq!(c.perturb.mode, Geometry::Circle);
        assert_eq!(c.perturb.kind, OffsetKind::Beta);
        assert_eq!(c.circle.mode, CircleMode::Attractor);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[flow]\nsteps = 3\nstepz = 4\n").is_err());
        assert!(toml::from_str::<FileConfig>("[flw]\n").is_err());
    }
}
