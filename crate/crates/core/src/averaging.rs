//! Discrete averaging: alternating midpoints on the line, the three-point
//! average, and alternating midpoints on the circle.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::log_log;
use crate::rng::trial_rng;

/// Values `x_n` for `n` in `first_index .. first_index + len`, after `step_parity` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSequence {
    pub first_index: i64,
    pub values: Vec<f64>,
    pub step_parity: usize,
}

impl LineSequence {
    pub fn new(first_index: i64, values: Vec<f64>) -> Result<Self> {
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("line sequence must be non-decreasing"));
        }
        Ok(LineSequence { first_index, values, step_parity: 0 })
    }

    /// `x_n = n + eps(n)` for `n` in `lo..=hi`.
    pub fn perturbed_lattice<F: Fn(i64) -> f64>(lo: i64, hi: i64, eps: F) -> Result<Self> {
        LineSequence::new(lo, (lo..=hi).map(|n| n as f64 + eps(n)).collect())
    }

    /// `x_n = n + eps_n` on `lo..=hi` with `eps_n` uniform on `(-eps, eps)`.
    pub fn noisy_lattice(seed: u64, trial: u64, lo: i64, hi: i64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid("noise amplitude must lie in (0, 1/2)"));
        }
        let mut rng = trial_rng(seed, trial);
        let noise: Vec<f64> = (lo..=hi).map(|_| rng.random_range(-eps..eps)).collect();
        LineSequence::perturbed_lattice(lo, hi, |n| noise[(n - lo) as usize])
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.values.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        let i = usize::try_from(n - self.first_index).ok()?;
        self.values.get(i).copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.first_index..=self.last_index()
    }
}

/// `x_n <- (x_n + x_{n +- 1}) / 2`, pairing to the right on even steps and to
/// the left on odd ones. The unpaired endpoint is dropped.
pub fn midpoint_step(s: &LineSequence) -> Result<LineSequence> {
    if s.values.len() < 2 {
        return Err(Error::TooFew { needed: 2, got: s.values.len() });
    }
    let values = s.values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let first_index = if s.step_parity.is_multiple_of(2) { s.first_index } else { s.first_index + 1 };
    Ok(LineSequence { first_index, values, step_parity: s.step_parity + 1 })
}

/// `x_n <- (x_{n-1} + x_n + x_{n+1}) / 3`; both endpoints drop.
pub fn triple_average_step(s: &LineSequence) -> Result<LineSequence> {
    if s.values.len() < 3 {
        return Err(Error::TooFew { needed: 3, got: s.values.len() });
    }
    let values = s.values.windows(3).map(|w| (w[0] + w[1] + w[2]) / 3.0).collect();
    Ok(LineSequence { first_index: s.first_index + 1, values, step_parity: s.step_parity + 1 })
}

/// Apply `step` `count` times.
pub fn iterate<F>(s: &LineSequence, count: usize, step: F) -> Result<LineSequence>
where
    F: Fn(&LineSequence) -> Result<LineSequence>,
{
    let mut cur = s.clone();
    for _ in 0..count {
        cur = step(&cur)?;
    }
    Ok(cur)
}

/// Largest `|x_n - x_m - (n - m)|`-style deviation: sup over consecutive gaps of `|gap - 1|`
/// for indices with `|n| <= radius`.
pub fn central_discrepancy(s: &LineSequence, radius: i64) -> Result<f64> {
    let lo = s.first_index.max(-radius);
    let hi = s.last_index().min(radius);
    if hi - lo < 1 {
        return Err(Error::TooFew { needed: 2, got: (hi - lo + 1).max(0) as usize });
    }
    Ok((lo..hi).map(|n| (s.get(n + 1).unwrap() - s.get(n).unwrap() - 1.0).abs()).fold(0.0, f64::max))
}

/// Central discrepancy recorded along a midpoint run, with its log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRun {
    pub steps: Vec<usize>,
    pub discrepancy: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

/// Run `steps` midpoint steps, recording `central_discrepancy(radius)` from
/// step `first_sample` on, and fit `log D = slope log j + c`.
pub fn midpoint_rate(s: &LineSequence, steps: usize, radius: i64, first_sample: usize) -> Result<RateRun> {
    let first_sample = first_sample.max(1);
    let mut cur = s.clone();
    let (mut js, mut ds) = (Vec::new(), Vec::new());
    for j in 1..=steps {
        cur = midpoint_step(&cur)?;
        if j >= first_sample {
            js.push(j);
            ds.push(central_discrepancy(&cur, radius)?);
        }
    }
    let xs: Vec<f64> = js.iter().map(|&j| j as f64).collect();
    let fit = log_log(&xs, &ds)?;
    Ok(RateRun { steps: js, discrepancy: ds, slope: fit.slope, intercept: fit.intercept })
}

/// `n` points on the unit circle by angle, in cyclic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirclePoints {
    angles: Vec<f64>,
    step_parity: usize,
}

impl CirclePoints {
    /// Angles are reduced to `[0, 2pi)`; they must already be in cyclic order,
    /// i.e. the forward arcs between neighbours sum to one turn.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() < 2 {
            return Err(Error::TooFew { needed: 2, got: angles.len() });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(invalid("angles must be finite"));
        }
        let angles: Vec<f64> = angles.into_iter().map(reduce).collect();
        let c = CirclePoints { angles, step_parity: 0 };
        let turns: f64 = c.gaps().iter().sum::<f64>() / TAU;
        if (turns - 1.0).abs() > 1e-9 {
            return Err(invalid("angles are not in cyclic order"));
        }
        Ok(c)
    }

    pub fn equally_spaced(n: usize, offset: f64) -> Result<Self> {
        CirclePoints::new((0..n).map(|k| offset + TAU * k as f64 / n as f64).collect())
    }

    /// `n` points at `2pi (k + u_k)/n` with `u_k` uniform on `(-jitter, jitter)`, `jitter < 1/2`.
    pub fn jittered(seed: u64, trial: u64, n: usize, jitter: f64) -> Result<Self> {
        if !(jitter > 0.0 && jitter < 0.5) {
            return Err(invalid(format!("jitter {jitter} must lie in (0, 1/2)")));
        }
        let mut rng = trial_rng(seed, trial);
        CirclePoints::new((0..n).map(|k| TAU * (k as f64 + rng.random_range(-jitter..jitter)) / n as f64).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn step_parity(&self) -> usize {
        self.step_parity
    }

    /// Forward arcs `theta_{n+1} - theta_n` in `[0, 2pi)`, the last one wrapping.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.angles.len();
        (0..n).map(|i| reduce(self.angles[(i + 1) % n] - self.angles[i])).collect()
    }

    /// `sup |gap - 2pi/n|`.
    pub fn discrepancy(&self) -> f64 {
        let even = TAU / self.angles.len() as f64;
        self.gaps().iter().map(|g| (g - even).abs()).fold(0.0, f64::max)
    }

    /// Sum of angles unwrapped along the cyclic order, reduced to `[0, 2pi)`.
    pub fn angle_sum(&self) -> f64 {
        let mut total = 0.0;
        let mut cur = self.angles[0];
        for g in self.gaps() {
            total += cur;
            cur += g;
        }
        reduce(total)
    }
}

fn reduce(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Midpoint of the shorter arc between `from` and its cyclic successor `to`.
/// Antipodal pairs resolve to the counterclockwise midpoint from `from`.
fn arc_midpoint(from: f64, to: f64) -> f64 {
    let d = reduce(to - from);
    if d <= PI {
        reduce(from + 0.5 * d)
    } else {
        reduce(from + 0.5 * d - PI)
    }
}

/// Point `n` moves to the midpoint of itself and point `n + 1` on even steps,
/// point `n - 1` on odd ones, indices taken mod `len`.
pub fn circle_average_step(c: &CirclePoints) -> Result<CirclePoints> {
    let n = c.angles.len();
    if n < 2 {
        return Err(Error::TooFew { needed: 2, got: n });
    }
    let angles = (0..n)
        .map(|i| {
            if c.step_parity.is_multiple_of(2) {
                arc_midpoint(c.angles[i], c.angles[(i + 1) % n])
            } else {
                arc_midpoint(c.angles[(i + n - 1) % n], c.angles[i])
            }
        })
        .collect();
    Ok(CirclePoints { angles, step_parity: c.step_parity + 1 })
}

/// Observed per-step contraction of the discrepancy: the geometric mean of
/// two-step ratios over `pairs` pairs of steps after `burn_in` steps, square-rooted.
pub fn circle_contraction(c: &CirclePoints, burn_in: usize, pairs: usize) -> Result<f64> {
    if pairs == 0 {
        return Err(invalid("need at least one pair of steps"));
    }
    let mut cur = c.clone();
    for _ in 0..burn_in {
        cur = circle_average_step(&cur)?;
    }
    let start = cur.discrepancy();
    for _ in 0..2 * pairs {
        cur = circle_average_step(&cur)?;
    }
    let end = cur.discrepancy();
    if !(start > 0.0 && end > 0.0) {
        return Err(Error::EmptyResult("discrepancy vanished before the ratio could be measured"));
    }
    Ok((end / start).powf(1.0 / (2 * pairs) as f64))
}

/// Per-step contraction predicted for `n` points: `cos(pi / n)`.
pub fn predicted_circle_contraction(n: usize) -> f64 {
    (PI / n as f64).cos()
}

/// `C(2m, m) / 4^m` for `m = floor(steps / 2)`: the central mass of the two-step midpoint kernel.
pub fn midpoint_central_mass(steps: usize) -> f64 {
    let m = steps / 2;
    (1..=m).fold(1.0, |acc, i| acc * (2 * i - 1) as f64 / (2 * i) as f64)
}
