//! Truncated Hadamard products over a perturbed lattice, the repeated
//! differentiation flow on them, and the Bessel integral example.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::least_squares;
use crate::gaps::{gap_report, GapReport, IndexWindow};
use crate::perturbation::EpsilonProfile;
use crate::quadrature::integrate;
use crate::realroot::{solve_decreasing, RealRootedFunction, SolverOptions, ZeroSequence};
use crate::special::{digamma, neumaier_sum, tetragamma, trigamma};

/// Margin eaten from the truncation radius per derivative step.
pub const EDGE_EROSION_PER_STEP: usize = 8;

/// `C (z - z_0) prod_{0<|j|<=J} (1 - z/z_j) e^{z/z_j}` with `z_j = (j + eps_j)/kappa`.
///
/// The convergence factors are folded into a single slope
/// `compensator = sum_{j != 0} 1/z_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedProductModel {
    profile: EpsilonProfile,
    truncation: usize,
    kappa: f64,
    compensator: f64,
    zeros: Vec<f64>,
}

pub fn build_model(profile: &EpsilonProfile, truncation: usize, kappa: f64) -> Result<TruncatedProductModel> {
    if truncation == 0 {
        return Err(invalid("truncation must be at least 1"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid("kappa must be positive and finite"));
    }
    let j_max = truncation as i64;
    if let Some((lo, hi)) = profile.support() {
        if lo < -j_max || hi > j_max {
            return Err(invalid(format!("profile support [{lo}, {hi}] exceeds truncation {truncation}")));
        }
    }
    if let Some((j, v)) = profile.entries().find(|(_, v)| v.abs() >= 0.5) {
        return Err(invalid(format!("eps[{j}] = {v} would break the zero ordering")));
    }
    let zeros: Vec<f64> = (-j_max..=j_max).map(|j| (j as f64 + profile.get(j)) / kappa).collect();
    let at = |j: i64| zeros[(j + j_max) as usize];
    // pair j with -j so an unperturbed lattice gives exactly 0
    let compensator = neumaier_sum((1..=j_max).rev().map(|j| 1.0 / at(j) + 1.0 / at(-j)));
    Ok(TruncatedProductModel { profile: profile.clone(), truncation, kappa, compensator, zeros })
}

impl TruncatedProductModel {
    pub fn profile(&self) -> &EpsilonProfile {
        &self.profile
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn compensator(&self) -> f64 {
        self.compensator
    }

    /// Zeros in increasing order; `zeros()[j + J]` belongs to lattice index `j`.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn zero(&self, j: i64) -> Option<f64> {
        let i = j + self.truncation as i64;
        usize::try_from(i).ok().and_then(|i| self.zeros.get(i).copied())
    }

    pub fn function(&self) -> Result<RealRootedFunction> {
        Ok(RealRootedFunction::new(self.zeros.clone())?.with_slope(self.compensator))
    }

    /// `f'/f` and its first two derivatives for the infinite product that
    /// continues the model with the unperturbed lattice beyond `|j| > J`.
    pub fn completed_log_derivative(&self, x: f64) -> Result<[f64; 3]> {
        let (index, h, [m0, m1, m2]) = self.completed_parts(x)?;
        if h == 0.0 {
            return Err(Error::AtZero { index, x });
        }
        let r = 1.0 / h;
        Ok([m0 + r, m1 - r * r, m2 + 2.0 * r * r * r])
    }

    /// The nearest zero's index and offset `h = x - z`, and `f'/f` with its
    /// two derivatives after removing that zero's pole.
    fn completed_parts(&self, x: f64) -> Result<(usize, f64, [f64; 3])> {
        let n = (self.truncation + 1) as f64;
        let k = self.kappa;
        let y = k * x;
        if y.abs() >= n {
            return Err(invalid(format!("x = {x} lies beyond the perturbed block")));
        }
        let i = self.zeros.partition_point(|&z| z < x);
        let near = match i {
            0 => 0,
            i if i == self.zeros.len() => i - 1,
            i if x - self.zeros[i - 1] <= self.zeros[i] - x => i - 1,
            i => i,
        };
        let (mut l0, mut l1, mut l2) = (0.0, 0.0, 0.0);
        for (index, &z) in self.zeros.iter().enumerate() {
            if index == near {
                continue;
            }
            let r = 1.0 / (x - z);
            l0 += r;
            l1 -= r * r;
            l2 += 2.0 * r * r * r;
        }
        let (a, b) = (n - y, n + y);
        Ok((
            near,
            x - self.zeros[near],
            [
                self.compensator + l0 + k * (digamma(a) - digamma(b)),
                l1 - k * k * (trigamma(a) + trigamma(b)),
                l2 + k * k * k * (tetragamma(a) - tetragamma(b)),
            ],
        ))
    }

    /// `f''/f'` and its derivative; finite at zeros of `f`.
    fn second_ratio(&self, x: f64) -> Result<(f64, f64)> {
        // with L = 1/h + M: f''/f' = (L^2 + L')/L = (2M + (M^2 + M') h) / (1 + M h)
        let (_, h, [m0, m1, m2]) = self.completed_parts(x)?;
        let num = 2.0 * m0 + (m0 * m0 + m1) * h;
        let den = 1.0 + m0 * h;
        let dnum = 2.0 * m1 + (2.0 * m0 * m1 + m2) * h + m0 * m0 + m1;
        let dden = m1 * h + m0;
        Ok((num / den, (dnum * den - num * dden) / (den * den)))
    }

    fn gap(&self, k: i64) -> Result<(f64, f64)> {
        match (self.zero(k), self.zero(k + 1)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(invalid(format!("gap {k} outside the perturbed block"))),
        }
    }

    /// Zeros of `f'` of the completed product, one in each gap `(z_k, z_{k+1})`, `lo <= k <= hi`.
    pub fn completed_first_zeros(&self, lo: i64, hi: i64, opts: &SolverOptions) -> Result<Vec<f64>> {
        (lo..=hi)
            .map(|k| {
                let (a, b) = self.gap(k)?;
                let g = |x: f64| match self.completed_log_derivative(x) {
                    Ok([v, d, _]) => (v, d),
                    Err(_) => (f64::NAN, f64::NAN),
                };
                solve_decreasing(g, a, b, opts)
            })
            .collect()
    }

    /// Zeros of `f''` of the completed product; the one for `k` lies between
    /// the `f'` zeros of gaps `k - 1` and `k`.
    pub fn completed_second_zeros(&self, lo: i64, hi: i64, opts: &SolverOptions) -> Result<Vec<f64>> {
        let first = self.completed_first_zeros(lo - 1, hi, opts)?;
        first
            .windows(2)
            .map(|w| {
                let g = |x: f64| self.second_ratio(x).unwrap_or((f64::NAN, f64::NAN));
                solve_decreasing(g, w[0], w[1], opts)
            })
            .collect()
    }

    /// Abscissa radius of the window trusted after `steps` derivatives.
    pub fn central_radius(&self, steps: usize) -> f64 {
        self.truncation.saturating_sub(EDGE_EROSION_PER_STEP * steps) as f64 / self.kappa
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStep {
    pub order: usize,
    pub zeros: ZeroSequence,
    pub report: GapReport,
}

/// Zeros of `f, f', ..., f^{(steps)}` with gap reports on `|x| <= central_radius(steps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub window_radius: f64,
    pub steps: Vec<FlowStep>,
}

fn check_steps(m: &TruncatedProductModel, steps: usize) -> Result<()> {
    if steps > m.truncation / EDGE_EROSION_PER_STEP {
        return Err(invalid(format!("{steps} steps exceed J/{EDGE_EROSION_PER_STEP} for J = {}", m.truncation)));
    }
    Ok(())
}

pub fn differentiation_flow(m: &TruncatedProductModel, steps: usize) -> Result<Flow> {
    check_steps(m, steps)?;
    let radius = m.central_radius(steps);
    let opts = SolverOptions::default();
    let mut f = m.function()?;
    let mut out = Vec::with_capacity(steps + 1);
    for order in 0..=steps {
        if order > 0 {
            f = f.derivative(0.0, &opts).map_err(|e| e.at_step(order))?;
        }
        let zeros = ZeroSequence::new(f.zeros().to_vec(), order, "flow")?;
        let report =
            gap_report(&zeros, IndexWindow::around(zeros.values(), 0.0, radius)).map_err(|e| e.at_step(order))?;
        out.push(FlowStep { order, zeros, report });
    }
    Ok(Flow { window_radius: radius, steps: out })
}

/// `ln |f(x)|` for a function in either normalization.
pub fn log_magnitude(f: &RealRootedFunction, x: f64) -> f64 {
    let product: f64 = if f.is_compensated() {
        f.zeros().iter().map(|z| (1.0 - x / z).abs().ln() + x / z).sum()
    } else {
        f.zeros().iter().map(|z| (x - z).abs().ln()).sum()
    };
    f.scale().abs().ln() + f.slope() * x + product
}

/// Least-squares arithmetic progression through the zeros in a window,
/// read as the zeros of `e^{B x} cos(C x + D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub window: (f64, f64),
    pub fitted_c: f64,
    pub fitted_d: f64,
    pub fitted_b: f64,
    /// Largest distance from a zero to the progression, in units of the spacing.
    pub residual: f64,
    pub spacing: f64,
    pub samples: usize,
    /// Gaps split into two well separated populations.
    pub bimodal: bool,
}

pub const MIN_FIT_ZEROS: usize = 8;

pub fn cosine_fit(zeros: &[f64], window: (f64, f64)) -> Result<CosineFit> {
    let (lo, hi) = window;
    let picked: Vec<f64> = zeros.iter().copied().filter(|&z| z >= lo && z <= hi).collect();
    if picked.len() < MIN_FIT_ZEROS {
        return Err(Error::TooFew { needed: MIN_FIT_ZEROS, got: picked.len() });
    }
    let index: Vec<f64> = (0..picked.len()).map(|i| i as f64).collect();
    let line = least_squares(&index, &picked)?;
    let spacing = line.slope;
    if !(spacing > 0.0) {
        return Err(invalid("zeros in the window are not increasing"));
    }
    let residual =
        picked.iter().zip(&index).map(|(z, i)| (z - line.intercept - i * spacing).abs()).fold(0.0, f64::max) / spacing;
    let c = PI / spacing;
    // zeros of cos(c x + d) at c x + d = pi/2 mod pi
    let d = (PI - c * line.intercept).rem_euclid(PI) - FRAC_PI_2;
    let gaps: Vec<f64> = picked.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(CosineFit {
        window,
        fitted_c: c,
        fitted_d: d,
        fitted_b: 0.0,
        residual,
        spacing,
        samples: picked.len(),
        bimodal: is_bimodal(&gaps, spacing),
    })
}

/// As [`cosine_fit`], with the tilt `B` fitted from `ln|f|` at extrema `(x, ln|f(x)|)`.
pub fn cosine_fit_with_extrema(zeros: &[f64], window: (f64, f64), extrema: &[(f64, f64)]) -> Result<CosineFit> {
    let mut fit = cosine_fit(zeros, window)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        extrema.iter().copied().filter(|&(x, _)| x >= window.0 && x <= window.1).unzip();
    fit.fitted_b = least_squares(&xs, &ys)?.slope;
    Ok(fit)
}

/// Two clusters split at the mean, each holding a quarter of the gaps or more,
/// whose centres differ by more than 4 pooled standard deviations and 5% of `spacing`.
fn is_bimodal(gaps: &[f64], spacing: f64) -> bool {
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let (low, high): (Vec<f64>, Vec<f64>) = gaps.iter().partition(|&&g| g < mean);
    let quarter = gaps.len().div_ceil(4);
    if low.len() < quarter || high.len() < quarter {
        return false;
    }
    let centre = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (cl, ch) = (centre(&low), centre(&high));
    let spread = low.iter().map(|g| (g - cl).powi(2)).chain(high.iter().map(|g| (g - ch).powi(2))).sum::<f64>();
    let pooled = (spread / gaps.len() as f64).sqrt();
    let separation = ch - cl;
    separation > 4.0 * pooled && separation > 0.05 * spacing
}

/// `J_n^{(2k)}(pi z)` from `((-1)^k/pi) int_0^pi sin^{2k}(t) cos(pi z sin t - n t) dt`.
pub fn bessel_derivative(n: u32, k: u32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(invalid("z must be finite"));
    }
    let x = PI * z;
    let power = 2 * k as i32;
    let integrand = |t: f64| t.sin().powi(power) * (x * t.sin() - n as f64 * t).cos();
    // the mass sits within a few multiples of 1/sqrt(k) of pi/2
    let mut breaks = vec![FRAC_PI_2];
    if k >= 4 {
        let width = 1.0 / (k as f64).sqrt();
        for i in 1..=4 {
            let off = i as f64 * width;
            if off < FRAC_PI_2 {
                breaks.push(FRAC_PI_2 - off);
                breaks.push(FRAC_PI_2 + off);
            }
        }
        breaks.sort_by(f64::total_cmp);
    }
    let scale = if k == 0 { PI } else { (PI / k as f64).sqrt() };
    let q = integrate(integrand, 0.0, PI, &breaks, 1e-10 * scale)?;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * q.value / PI)
}

/// `(-1)^k (pi k)^{-1/2} cos(pi z - n pi/2)`.
pub fn bessel_asymptotic(n: u32, k: u32, z: f64) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (PI * k as f64).sqrt().recip() * (PI * z - n as f64 * FRAC_PI_2).cos()
}

/// Grid points where `|cos(pi z - n pi/2)|` is below this are left out of the ratio.
pub const COSINE_EXCLUSION: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselError {
    pub n: u32,
    pub k: u32,
    pub sup_relative_error: f64,
    pub used: usize,
    pub excluded: Vec<f64>,
    /// Phase `phi` of the best fit `cos(pi z + phi)` over the whole grid.
    pub fitted_phase: f64,
}

/// Compare `J_n^{(2k)}(pi z)` with its large-`k` cosine form on a grid in `[-1, 1]`.
pub fn bessel_cosine_error(n: u32, k: u32, grid: &[f64]) -> Result<BesselError> {
    if k == 0 {
        return Err(invalid("the cosine form needs k >= 1"));
    }
    if let Some(z) = grid.iter().find(|z| !(z.abs() <= 1.0)) {
        return Err(invalid(format!("grid point {z} outside [-1, 1]")));
    }
    let norm = (PI * k as f64).sqrt() * if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut sup = 0.0_f64;
    let mut used = 0;
    let mut excluded = Vec::new();
    let (mut scc, mut scs, mut sss, mut syc, mut sys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &z in grid {
        let y = bessel_derivative(n, k, z)? * norm;
        let (c, s) = ((PI * z).cos(), (PI * z).sin());
        scc += c * c;
        scs += c * s;
        sss += s * s;
        syc += y * c;
        sys += y * s;
        let shape = (PI * z - n as f64 * FRAC_PI_2).cos();
        if shape.abs() < COSINE_EXCLUSION {
            excluded.push(z);
            continue;
        }
        sup = sup.max((y / shape - 1.0).abs());
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyResult("every grid point was excluded"));
    }
    // y ~ a cos(pi z) + b sin(pi z) = r cos(pi z + phi)
    let det = scc * sss - scs * scs;
    if det.abs() < 1e-12 * (scc * sss).max(f64::MIN_POSITIVE) {
        return Err(invalid("grid does not separate cos and sin"));
    }
    let a = (syc * sss - sys * scs) / det;
    let b = (sys * scc - syc * scs) / det;
    Ok(BesselError { n, k, sup_relative_error: sup, used, excluded, fitted_phase: (-b).atan2(a) })
}

/// Gap statistics for one step of a `(d/dx + a)` flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStep {
    pub step: usize,
    pub derivative_min_gap: f64,
    pub derivative_max_gap: f64,
    /// `inf (z_{n+2} - z_n)/2` over the zeros before the step.
    pub half_span_inf: f64,
    /// `sup (z_{n+2} - z_n)/2` over the zeros before the step.
    pub half_span_sup: f64,
    pub violation: bool,
}

pub const COMPARISON_TOLERANCE: f64 = 1e-9;

/// Zeros of `f' + a f` for `f(x) = prod_i sin(pi (x - z_i)/P)`, given the
/// increasing zeros `z` of one period `[z_0, z_0 + P)`.
///
/// Here `f'/f = (pi/P) sum_i cot(pi (x - z_i)/P)` exactly, and one zero lies in
/// each of the `z.len()` cyclic gaps; the result again covers one period,
/// starting inside the first gap.
pub fn periodic_derivative_zeros(zeros: &[f64], period: f64, a: f64, opts: &SolverOptions) -> Result<Vec<f64>> {
    if zeros.len() < 2 {
        return Err(Error::TooFew { needed: 2, got: zeros.len() });
    }
    if zeros.windows(2).any(|w| !(w[1] > w[0])) || !(zeros[zeros.len() - 1] < zeros[0] + period) {
        return Err(invalid("zeros must increase strictly within one period"));
    }
    let w = PI / period;
    let g = |x: f64| {
        let (mut v, mut d) = (a, 0.0);
        for z in zeros {
            let (s, c) = (w * (x - z)).sin_cos();
            v += w * c / s;
            d -= w * w / (s * s);
        }
        (v, d)
    };
    let n = zeros.len();
    (0..n)
        .map(|i| {
            let hi = if i + 1 == n { zeros[0] + period } else { zeros[i + 1] };
            solve_decreasing(g, zeros[i], hi, opts)
        })
        .collect()
}

/// Forward gaps around the circle of one period.
fn cyclic_spans(zeros: &[f64], period: f64, width: usize) -> impl Iterator<Item = f64> + '_ {
    let n = zeros.len();
    (0..n).map(move |i| {
        let j = i + width;
        let wrap = (j / n) as f64 * period;
        zeros[j % n] + wrap - zeros[i]
    })
}

/// Compare gaps of `f' + a f` with half next-nearest spans of `f`, step by
/// step, along the flow of the periodic continuation of the model's zeros
/// (period `(2J + 1)/kappa`); violations are recorded, not raised.
pub fn diff_vs_midpoint_compare(m: &TruncatedProductModel, steps: usize, a: f64) -> Result<Vec<ComparisonStep>> {
    check_steps(m, steps)?;
    let opts = SolverOptions::default();
    let period = m.zeros.len() as f64 / m.kappa;
    let mut zeros = m.zeros.clone();
    let mut rows = Vec::with_capacity(steps);
    for step in 1..=steps {
        let next = periodic_derivative_zeros(&zeros, period, a, &opts).map_err(|e| e.at_step(step))?;
        let (dmin, dmax) = extremes(cyclic_spans(&next, period, 1));
        let (hmin, hmax) = extremes(cyclic_spans(&zeros, period, 2).map(|s| 0.5 * s));
        rows.push(ComparisonStep {
            step,
            derivative_min_gap: dmin,
            derivative_max_gap: dmax,
            half_span_inf: hmin,
            half_span_sup: hmax,
            violation: dmin < hmin - COMPARISON_TOLERANCE || dmax > hmax + COMPARISON_TOLERANCE,
        });
        zeros = next;
    }
    Ok(rows)
}

fn extremes<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::{triple_average_step, LineSequence};
    use crate::realroot::min_gap;
    use proptest::prelude::*;

    fn central(values: &[f64], radius: f64, pad: usize) -> &[f64] {
        let w = IndexWindow::around(values, 0.0, radius);
        &values[w.start.saturating_sub(pad)..(w.end + pad).min(values.len())]
    }

    fn random_model(seed: u64, trial: u64, j: usize, eps: f64) -> TruncatedProductModel {
        let jj = j as i64;
        build_model(&EpsilonProfile::seeded_uniform(seed, trial, -jj, jj, eps).unwrap(), j, 1.0).unwrap()
    }

    #[test]
    fn unperturbed_model_is_the_integers() {
        let m = build_model(&EpsilonProfile::zero(), 100, 1.0).unwrap();
        assert_eq!(m.zeros().len(), 201);
        assert!(m.zeros().iter().zip(-100..=100).all(|(&z, j)| z == j as f64));
        assert_eq!(m.compensator(), 0.0);
    }

    #[test]
    fn uniform_profile_translates() {
        let e = EpsilonProfile::uniform_on(-50, 50, 0.2).unwrap();
        let m = build_model(&e, 50, 2.0).unwrap();
        for (i, &z) in m.zeros().iter().enumerate() {
            assert!((z - (i as f64 - 50.0 + 0.2) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn model_is_deterministic() {
        let a = random_model(42, 1, 80, 0.1);
        let b = random_model(42, 1, 80, 0.1);
        assert_eq!(a.zeros(), b.zeros());
        assert_eq!(a.compensator().to_bits(), b.compensator().to_bits());
    }

    #[test]
    fn support_and_size_checks() {
        assert!(build_model(&EpsilonProfile::bump(11, 0.1).unwrap(), 10, 1.0).is_err());
        assert!(build_model(&EpsilonProfile::bump(1, 0.5).unwrap(), 10, 1.0).is_err());
        assert!(build_model(&EpsilonProfile::zero(), 10, 0.0).is_err());
        let m = build_model(&EpsilonProfile::zero(), 16, 1.0).unwrap();
        assert!(differentiation_flow(&m, 3).is_err());
    }

    #[test]
    fn completion_matches_cotangent() {
        let m = build_model(&EpsilonProfile::zero(), 30, 1.0).unwrap();
        for x in [0.3, -2.7, 5.5, 7.01] {
            let [l, d, dd] = m.completed_log_derivative(x).unwrap();
            let (s, c) = (PI * x).sin_cos();
            let rel = |got: f64, want: f64| (got - want).abs() / (1.0 + want.abs());
            assert!(rel(l, PI * c / s) < 1e-11);
            assert!(rel(d, -PI * PI / (s * s)) < 1e-11);
            assert!(rel(dd, 2.0 * PI.powi(3) * c / s.powi(3)) < 1e-9);
        }
    }

    #[test]
    fn completed_zeros_are_midpoints_and_lattice_points() {
        let m = build_model(&EpsilonProfile::zero(), 20, 1.0).unwrap();
        let opts = SolverOptions::default();
        let p = m.completed_first_zeros(-4, 4, &opts).unwrap();
        let q = m.completed_second_zeros(-4, 4, &opts).unwrap();
        for (i, k) in (-4..=4).enumerate() {
            assert!((p[i] - (k as f64 + 0.5)).abs() < 1e-11);
            assert!((q[i] - k as f64).abs() < 1e-11);
        }
    }

    #[test]
    fn flat_flow_stays_flat() {
        let m = build_model(&EpsilonProfile::zero(), 240, 1.0).unwrap();
        let flow = differentiation_flow(&m, 20).unwrap();
        assert_eq!(flow.steps.len(), 21);
        assert_eq!(flow.steps[0].report.sup_discrepancy, 0.0);
        for s in &flow.steps {
            assert!(s.report.sup_discrepancy < 5e-3, "step {}: {}", s.order, s.report.sup_discrepancy);
        }
    }

    #[test]
    fn flow_gaps_stay_inside_previous_bounds() {
        let m = random_model(5, 0, 200, 0.2);
        let flow = differentiation_flow(&m, 10).unwrap();
        let radius = flow.window_radius;
        for w in flow.steps.windows(2) {
            let prev = central(w[0].zeros.values(), radius, 1);
            let next = central(w[1].zeros.values(), radius, 0);
            let (pmin, pmax) = extremes(prev.windows(2).map(|v| v[1] - v[0]));
            let (nmin, nmax) = extremes(next.windows(2).map(|v| v[1] - v[0]));
            assert!(nmin >= pmin - 1e-9 && nmax <= pmax + 1e-9);
            let (pn, _) = extremes(prev.windows(3).map(|v| v[2] - v[0]));
            let (nn, _) = extremes(next.windows(3).map(|v| v[2] - v[0]));
            assert!(nn >= pn - 1e-9);
            assert!(min_gap(&w[1].zeros).unwrap() >= min_gap(&w[0].zeros).unwrap() - 1e-9);
        }
    }

    #[test]
    fn triple_average_spans_a_third() {
        let s = LineSequence::perturbed_lattice(-30, 30, |j| 0.3 * ((j * 7 % 11) as f64 / 11.0 - 0.5)).unwrap();
        let t = triple_average_step(&s).unwrap();
        for n in t.indices() {
            if let (Some(a), Some(b), Some(z3), Some(z0)) = (t.get(n + 2), t.get(n + 1), s.get(n + 3), s.get(n)) {
                assert!((z3 - z0 - 3.0 * (a - b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn arithmetic_progression_fits_exactly() {
        let z: Vec<f64> = (-20..20).map(|j| j as f64 + 0.5).collect();
        let fit = cosine_fit(&z, (-10.0, 10.0)).unwrap();
        assert!(fit.residual < 1e-12);
        assert!((fit.fitted_c - PI).abs() < 1e-12);
        assert!(fit.fitted_d.abs() < 1e-9);
        assert!(!fit.bimodal);
        assert!(z.iter().all(|x| (fit.fitted_c * x + fit.fitted_d).cos().abs() < 1e-9));
        assert!(cosine_fit(&z, (0.0, 5.0)).is_err());
    }

    #[test]
    fn interlaced_lattices_are_bimodal() {
        let mut z: Vec<f64> = (-20..20).map(|j| j as f64).chain((-20..20).map(|j| j as f64 + 0.3)).collect();
        z.sort_by(f64::total_cmp);
        let fit = cosine_fit(&z, (-10.0, 10.0)).unwrap();
        assert!(fit.bimodal);
        assert!(fit.residual > 0.2);
    }

    #[test]
    fn tilt_is_recovered_from_extrema() {
        let z: Vec<f64> = (0..20).map(|j| j as f64 + 0.5).collect();
        let extrema: Vec<(f64, f64)> = (0..20).map(|j| (j as f64, 0.7 * j as f64 + 2.0)).collect();
        let fit = cosine_fit_with_extrema(&z, (0.0, 20.0), &extrema).unwrap();
        assert!((fit.fitted_b - 0.7).abs() < 1e-12);
    }

    #[test]
    fn log_magnitude_of_a_small_product() {
        let f = RealRootedFunction::new(vec![-1.0, 2.0]).unwrap().with_slope(0.5).with_scale(3.0).unwrap();
        let x = 0.25_f64;
        let direct = (3.0 * (0.5 * x).exp() * (x + 1.0) * (x - 2.0)).abs().ln();
        assert!((log_magnitude(&f, x) - direct).abs() < 1e-14);
    }

    #[test]
    fn bessel_base_cases() {
        assert!((bessel_derivative(0, 0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        // J_0(1) and J_1(2) from tables
        assert!((bessel_derivative(0, 0, 1.0 / PI).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-11);
        assert!((bessel_derivative(1, 0, 2.0 / PI).unwrap() - 0.576_724_807_756_873_4).abs() < 1e-11);
        // J_0'' = -J_0 + J_1/x
        let x = 1.3_f64;
        let j0 = bessel_derivative(0, 0, x / PI).unwrap();
        let j1 = bessel_derivative(1, 0, x / PI).unwrap();
        assert!((bessel_derivative(0, 1, x / PI).unwrap() - (-j0 + j1 / x)).abs() < 1e-11);
    }

    #[test]
    fn first_bessel_zero_by_bisection() {
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bessel_derivative(0, 0, mid).unwrap() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 0.7655).abs() < 5e-5);
        assert!((PI * lo - 2.404_825_557_695_773).abs() < 1e-9);
    }

    fn grid() -> Vec<f64> {
        (0..=100).map(|i| -1.0 + i as f64 / 50.0).collect()
    }

    #[test]
    fn cosine_form_improves_with_k() {
        for n in [0, 1] {
            let errs: Vec<f64> = [10, 20, 40, 80]
                .iter()
                .map(|&k| bessel_cosine_error(n, k, &grid()).unwrap().sup_relative_error)
                .collect();
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "n = {n}: {errs:?}");
        }
        let e = bessel_cosine_error(0, 100, &grid()).unwrap();
        assert!(e.sup_relative_error < 0.1, "{}", e.sup_relative_error);
        assert!(!e.excluded.is_empty());
        assert_eq!(e.used + e.excluded.len(), grid().len());
    }

    #[test]
    fn fitted_phase_follows_the_order() {
        for n in [0u32, 1] {
            let e = bessel_cosine_error(n, 80, &grid()).unwrap();
            assert!((e.fitted_phase + n as f64 * FRAC_PI_2).abs() < 0.05, "n = {n}: {}", e.fitted_phase);
        }
    }

    #[test]
    fn comparator_on_flat_lattice_is_tight() {
        let m = build_model(&EpsilonProfile::zero(), 80, 1.0).unwrap();
        let rows = diff_vs_midpoint_compare(&m, 4, 0.0).unwrap();
        for r in rows {
            assert!(!r.violation);
            for v in [r.derivative_min_gap, r.derivative_max_gap, r.half_span_inf, r.half_span_sup] {
                assert!((v - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn comparator_flags_a_large_shift() {
        let m = random_model(9, 0, 160, 0.1);
        assert!(diff_vs_midpoint_compare(&m, 5, 0.0).unwrap().iter().all(|r| !r.violation));
        let shifted = diff_vs_midpoint_compare(&m, 1, 10.0).unwrap();
        assert!(shifted[0].violation);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn fit_residual_is_scale_invariant(jitter in prop::collection::vec(-0.2f64..0.2, 30), scale in 0.01f64..100.0) {
            let z: Vec<f64> = jitter.iter().enumerate().map(|(i, e)| i as f64 + e).collect();
            let scaled: Vec<f64> = z.iter().map(|v| v * scale).collect();
            let a = cosine_fit(&z, (-1.0, 31.0)).unwrap();
            let b = cosine_fit(&scaled, (-scale, 31.0 * scale)).unwrap();
            prop_assert!((a.residual - b.residual).abs() < 1e-9);
            prop_assert!((a.fitted_c / b.fitted_c - scale).abs() < 1e-9 * scale);
        }

        #[test]
        fn one_step_respects_gap_bounds(seed in 0u64..1000) {
            let m = random_model(seed, 0, 40, 0.3);
            let f = m.function().unwrap();
            let p = f.derivative_zeros(0.0, &SolverOptions::default()).unwrap();
            let outer = central(f.zeros(), 20.0, 1);
            let inner = central(p.values(), 20.0, 0);
            let (fmin, fmax) = extremes(outer.windows(2).map(|w| w[1] - w[0]));
            let (pmin, pmax) = extremes(inner.windows(2).map(|w| w[1] - w[0]));
            prop_assert!(pmin >= fmin - 1e-9 && pmax <= fmax + 1e-9);
        }
    }
}
