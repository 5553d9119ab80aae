//! First-order displacement of derivative zeros for a perturbed lattice.
//!
//! A profile `eps` moves the lattice point `j` to `j + eps_j`. To first order
//! the zero of `f'` between `k` and `k + 1` sits at `k + 1/2 + alpha_k` and the
//! zero of `f''` near `k` at `k + beta_k`, where `alpha` and `beta` are fixed
//! linear filters of `eps`. On the circle the lattice is `e(j/n)` and the
//! filter is a finite cyclic sum.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{circle_zeros, d_operator, CirclePolynomial};
use crate::error::{invalid, Result};
use crate::models::build_model;
use crate::realroot::SolverOptions;
use crate::rng::trial_rng;
use crate::special::{neumaier_sum, trigamma};

pub const DEFAULT_TRUNCATION: usize = 200;

/// Offsets above this fraction of the spacing make the zero matching ambiguous.
pub const AMBIGUITY_THRESHOLD: f64 = 0.25;

/// Finitely supported displacements `eps_j` with a declared bound `|eps_j| <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonProfile {
    eps: BTreeMap<i64, f64>,
    bound: f64,
}

impl EpsilonProfile {
    pub fn new(eps: BTreeMap<i64, f64>, bound: f64) -> Result<Self> {
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(invalid("profile bound must be finite and non-negative"));
        }
        if let Some((j, v)) = eps.iter().find(|(_, v)| !v.is_finite() || v.abs() > bound) {
            return Err(invalid(format!("eps[{j}] = {v} violates the bound {bound}")));
        }
        let eps = eps.into_iter().filter(|&(_, v)| v != 0.0).collect();
        Ok(EpsilonProfile { eps, bound })
    }

    /// Bound taken as the largest entry.
    pub fn from_entries<I: IntoIterator<Item = (i64, f64)>>(entries: I) -> Result<Self> {
        let eps: BTreeMap<i64, f64> = entries.into_iter().collect();
        let bound = eps.values().fold(0.0_f64, |m, v| m.max(v.abs()));
        EpsilonProfile::new(eps, bound)
    }

    pub fn zero() -> Self {
        EpsilonProfile { eps: BTreeMap::new(), bound: 0.0 }
    }

    pub fn bump(index: i64, value: f64) -> Result<Self> {
        EpsilonProfile::from_entries([(index, value)])
    }

    /// The same `value` at every index in `lo..=hi`.
    pub fn uniform_on(lo: i64, hi: i64, value: f64) -> Result<Self> {
        EpsilonProfile::from_entries((lo..=hi).map(|j| (j, value)))
    }

    /// Independent uniform draws from `(-eps, eps)` on `lo..=hi`.
    pub fn seeded_uniform(seed: u64, trial: u64, lo: i64, hi: i64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(invalid("eps must be positive"));
        }
        let mut rng = trial_rng(seed, trial);
        let entries: BTreeMap<i64, f64> = (lo..=hi).map(|j| (j, rng.random_range(-eps..eps))).collect();
        EpsilonProfile::new(entries, eps)
    }

    pub fn get(&self, j: i64) -> f64 {
        self.eps.get(&j).copied().unwrap_or(0.0)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.eps.iter().map(|(&j, &v)| (j, v))
    }

    /// Smallest and largest index carrying a nonzero entry.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.eps.keys().next()?, *self.eps.keys().next_back()?))
    }

    /// The profile `j -> eps_{j + m}`.
    pub fn shift(&self, m: i64) -> Self {
        EpsilonProfile { eps: self.eps.iter().map(|(&j, &v)| (j - m, v)).collect(), bound: self.bound }
    }

    pub fn scale(&self, a: f64) -> Self {
        EpsilonProfile {
            eps: self.eps.iter().map(|(&j, &v)| (j, a * v)).filter(|&(_, v)| v != 0.0).collect(),
            bound: a.abs() * self.bound,
        }
    }

    pub fn add(&self, other: &EpsilonProfile) -> Self {
        let mut eps = self.eps.clone();
        for (j, v) in other.entries() {
            *eps.entry(j).or_insert(0.0) += v;
        }
        eps.retain(|_, v| *v != 0.0);
        EpsilonProfile { eps, bound: self.bound + other.bound }
    }

    /// True unless the perturbed lattice is mirror symmetric about 0,
    /// i.e. `eps_{-j} = -eps_j` for every `j != 0`.
    pub fn is_asymmetric(&self) -> bool {
        self.entries().any(|(j, v)| j != 0 && self.get(-j) != -v)
    }
}

/// How a profile is described in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Zero,
    Bump { index: i64, value: f64 },
    Uniform { lo: i64, hi: i64, value: f64 },
    Explicit { values: Vec<(i64, f64)> },
    Random { lo: i64, hi: i64, eps: f64 },
}

impl ProfileSpec {
    pub fn build(&self, seed: u64, trial: u64) -> Result<EpsilonProfile> {
        match self {
            ProfileSpec::Zero => Ok(EpsilonProfile::zero()),
            ProfileSpec::Bump { index, value } => EpsilonProfile::bump(*index, *value),
            ProfileSpec::Uniform { lo, hi, value } => EpsilonProfile::uniform_on(*lo, *hi, *value),
            ProfileSpec::Explicit { values } => EpsilonProfile::from_entries(values.iter().copied()),
            ProfileSpec::Random { lo, hi, eps } => EpsilonProfile::seeded_uniform(seed, trial, *lo, *hi, *eps),
        }
    }
}

/// A filtered value and a bound on what the truncated weights leave out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    pub tail_bound: f64,
}

/// Weight of `eps_{j+k}` in `alpha_k`.
pub fn alpha_weight(j: i64) -> f64 {
    let d = (2 * j - 1) as f64;
    4.0 / (PI * PI * d * d)
}

/// Weight of `eps_{j+k}` in `beta_k`.
pub fn beta_weight(j: i64) -> f64 {
    if j == 0 {
        1.0 / 3.0
    } else {
        2.0 / (PI * PI * (j * j) as f64)
    }
}

/// The `alpha` filter applied twice, evaluated at offset `m` of the `beta` filter.
///
/// Two differentiations move a zero by `alpha` of `alpha`; the composite
/// weight at offset `m` is `sum_j w(j) w(m + 1 - j)`, summed over `|j| <= radius`.
pub fn alpha_squared_weight(m: i64, radius: i64) -> f64 {
    neumaier_sum((-radius..=radius).map(|j| alpha_weight(j) * alpha_weight(m + 1 - j)))
}

fn filter(e: &EpsilonProfile, k: i64, truncation: usize, weight: fn(i64) -> f64) -> f64 {
    let j_max = truncation as i64;
    neumaier_sum(e.entries().map(|(i, v)| (i - k, v)).filter(|&(j, _)| j.abs() <= j_max).map(|(j, v)| weight(j) * v))
}

/// `(4/pi^2) sum_{|j|<=J} eps_{j+k} / (2j-1)^2`.
pub fn predict_alpha(e: &EpsilonProfile, k: i64, truncation: usize) -> Result<Prediction> {
    if truncation == 0 {
        return Err(invalid("truncation must be at least 1"));
    }
    let j = truncation as f64;
    // sum_{j>J} (2j-1)^-2 = trigamma(J+1/2)/4, sum_{j<-J} = trigamma(J+3/2)/4
    let tail = (trigamma(j + 0.5) + trigamma(j + 1.5)) / (PI * PI);
    Ok(Prediction { value: filter(e, k, truncation, alpha_weight), tail_bound: e.bound() * tail })
}

/// `eps_k/3 + (2/pi^2) sum_{0<|j|<=J} eps_{j+k} / j^2`.
pub fn predict_beta(e: &EpsilonProfile, k: i64, truncation: usize) -> Result<Prediction> {
    if truncation == 0 {
        return Err(invalid("truncation must be at least 1"));
    }
    let tail = 4.0 * trigamma(truncation as f64 + 1.0) / (PI * PI);
    Ok(Prediction { value: filter(e, k, truncation, beta_weight), tail_bound: e.bound() * tail })
}

/// Weight of `eps_{j+k}` in the degree-`n` circle filter.
pub fn circle_weight(j: i64, n: usize) -> f64 {
    let n = n as f64;
    let s = (PI * (2 * j - 1) as f64 / (2.0 * n)).sin();
    1.0 / (n * n * s * s)
}

/// Sum of the circle weights over one period; equal to 1 up to rounding.
pub fn circle_weight_total(n: usize) -> f64 {
    neumaier_sum((0..n as i64).map(|j| circle_weight(j, n)))
}

/// Line weights summed over `-n/2 < j <= n/2`; tends to 1.
pub fn alpha_weight_partial_sum(n: usize) -> f64 {
    let half = (n / 2) as i64;
    neumaier_sum((-half + 1..=half).map(alpha_weight))
}

/// Circle filter with `eps` read modulo `n`, in turns.
pub fn predict_alpha_circle(e: &EpsilonProfile, n: usize, k: i64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("circle degree must be at least 2"));
    }
    let m = n as i64;
    Ok(neumaier_sum((0..m).map(|j| circle_weight(j, n) * e.get((j + k).rem_euclid(m)))))
}

/// Which derivative the offsets refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetKind {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetRecord {
    pub k: i64,
    pub measured: f64,
    /// Offset beyond [`AMBIGUITY_THRESHOLD`] of the spacing.
    pub flagged: bool,
}

fn nearest(sorted: &[f64], target: f64) -> f64 {
    let i = sorted.partition_point(|&v| v < target);
    let right = sorted.get(i).copied();
    let left = if i > 0 { sorted.get(i - 1).copied() } else { None };
    match (left, right) {
        (Some(l), Some(r)) => {
            if target - l <= r - target {
                l
            } else {
                r
            }
        }
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (None, None) => f64::NAN,
    }
}

/// Measured offsets for `|k| <= J/4`, from the infinite lattice carrying `e`
/// on `|j| <= J` and unperturbed elsewhere.
pub fn measure_offsets_line(e: &EpsilonProfile, truncation: usize, kind: OffsetKind) -> Result<Vec<OffsetRecord>> {
    let model = build_model(e, truncation, 1.0)?;
    let opts = SolverOptions::default();
    let radius = (truncation / 4) as i64;
    if radius == 0 {
        return Err(invalid("truncation too small for a central window"));
    }
    let (zeros, target): (Vec<f64>, fn(i64) -> f64) = match kind {
        OffsetKind::Alpha => (model.completed_first_zeros(-radius - 1, radius + 1, &opts)?, |k| k as f64 + 0.5),
        OffsetKind::Beta => (model.completed_second_zeros(-radius - 1, radius + 1, &opts)?, |k| k as f64),
    };
    Ok((-radius..=radius)
        .map(|k| {
            let t = target(k);
            let measured = nearest(&zeros, t) - t;
            OffsetRecord { k, measured, flagged: !(measured.abs() <= AMBIGUITY_THRESHOLD) }
        })
        .collect())
}

/// Measured `alpha_k` in turns for `k = 0..n`: the zero of `D g` nearest
/// `(k + 1/2)/n`, where `g` has zeros `e(j/n + eps_j)`.
pub fn measure_offsets_circle(e: &EpsilonProfile, n: usize) -> Result<Vec<OffsetRecord>> {
    if n < 2 {
        return Err(invalid("circle degree must be at least 2"));
    }
    if let Some((lo, hi)) = e.support() {
        if lo < 0 || hi >= n as i64 {
            return Err(invalid(format!("circle profile support [{lo}, {hi}] exceeds 0..{n}")));
        }
    }
    let angles: Vec<f64> = (0..n as i64).map(|j| TAU * (j as f64 / n as f64 + e.get(j))).collect();
    let g = CirclePolynomial::from_angles(&angles)?;
    let zeros = circle_zeros(&d_operator(&g)?)?;
    let turns: Vec<f64> = zeros.angles.iter().map(|a| a / TAU).collect();
    let spacing = 1.0 / n as f64;
    Ok((0..n as i64)
        .map(|k| {
            let t = (k as f64 + 0.5) * spacing;
            let measured = turns
                .iter()
                .map(|&z| (z - t + 0.5).rem_euclid(1.0) - 0.5)
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(f64::NAN);
            OffsetRecord { k, measured, flagged: !(measured.abs() <= AMBIGUITY_THRESHOLD * spacing) }
        })
        .collect())
}

/// One line of a predicted-versus-measured table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub k: i64,
    pub predicted: f64,
    pub measured: f64,
    pub abs_error: f64,
    pub eps: f64,
    /// Truncation radius on the line, degree on the circle.
    pub size: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// Common offset removed from the measured values before comparing.
    pub shift: f64,
    pub max_abs_error: f64,
    pub tail_bound: f64,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn assemble(pairs: Vec<(OffsetRecord, f64)>, shift: f64, eps: f64, size: usize, tail_bound: f64) -> Comparison {
    let rows: Vec<ComparisonRow> = pairs
        .into_iter()
        .map(|(r, predicted)| {
            let measured = r.measured - shift;
            ComparisonRow {
                k: r.k,
                predicted,
                measured,
                abs_error: (measured - predicted).abs(),
                eps,
                size,
                flagged: r.flagged,
            }
        })
        .collect();
    let max_abs_error = rows.iter().fold(0.0_f64, |m, r| m.max(r.abs_error));
    Comparison { rows, shift, max_abs_error, tail_bound }
}

/// Predicted and measured line offsets side by side.
///
/// A profile that is not mirror symmetric moves every zero by a common first
/// order amount that the filters do not model; for such profiles the median
/// of `measured - predicted` is removed first.
pub fn compare_line(e: &EpsilonProfile, truncation: usize, kind: OffsetKind) -> Result<Comparison> {
    let measured = measure_offsets_line(e, truncation, kind)?;
    let predict = match kind {
        OffsetKind::Alpha => predict_alpha,
        OffsetKind::Beta => predict_beta,
    };
    let mut pairs = Vec::with_capacity(measured.len());
    let mut tail_bound = 0.0;
    for r in measured {
        let p = predict(e, r.k, truncation)?;
        tail_bound = p.tail_bound;
        pairs.push((r, p.value));
    }
    let shift = if e.is_asymmetric() { median(pairs.iter().map(|(r, p)| r.measured - p).collect()) } else { 0.0 };
    Ok(assemble(pairs, shift, e.bound(), truncation, tail_bound))
}

/// Predicted and measured circle offsets, in turns.
pub fn compare_circle(e: &EpsilonProfile, n: usize) -> Result<Comparison> {
    let measured = measure_offsets_circle(e, n)?;
    let pairs = measured.into_iter().map(|r| Ok((r, predict_alpha_circle(e, n, r.k)?))).collect::<Result<Vec<_>>>()?;
    Ok(assemble(pairs, 0.0, e.bound(), n, 0.0))
}
