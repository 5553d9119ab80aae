//! Polynomials with zeros on or near the unit circle.
//!
//! A degree-`n` polynomial `f(z) = sum a_m z^m` is read as
//! `g(z) = z^{-n/2} f(z) = sum a_m z^{m - n/2}`; the operator `z d/dz` on `g`
//! multiplies `a_m` by `m - n/2`, which keeps zeros on the circle when `f` is
//! self-inversive.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::trial_rng;

/// Backward-error threshold for accepted roots.
pub const ROOT_BACKWARD_ERROR: f64 = 1e-10;
const ANGLE_TOLERANCE: f64 = 1e-12;
const MAX_SCAN_DOUBLINGS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirclePolynomial {
    coeffs: Vec<Complex64>,
}

impl CirclePolynomial {
    /// `coeffs[m]` multiplies `z^m`; the last must be nonzero.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(invalid("polynomial needs at least one coefficient")),
            Some(c) if *c == Complex64::new(0.0, 0.0) => Err(invalid("leading coefficient must be nonzero")),
            _ if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) => {
                Err(invalid("coefficients must be finite"))
            }
            _ => Ok(CirclePolynomial { coeffs }),
        }
    }

    /// Monic polynomial with the given zeros.
    pub fn from_zeros(zeros: &[Complex64]) -> Result<Self> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in zeros {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            c = next;
        }
        CirclePolynomial::new(c)
    }

    /// Monic polynomial whose zeros have modulus uniform on `[r_min, r_max)` and uniform argument.
    pub fn random_annulus(seed: u64, trial: u64, degree: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(invalid(format!("annulus [{r_min}, {r_max}) must satisfy 0 < r_min < r_max")));
        }
        let mut rng = trial_rng(seed, trial);
        let zeros: Vec<Complex64> = (0..degree)
            .map(|_| Complex64::from_polar(rng.random_range(r_min..r_max), rng.random_range(0.0..TAU)))
            .collect();
        CirclePolynomial::from_zeros(&zeros)
    }

    /// Monic polynomial with zeros `e^{i theta}`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        let zeros: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        CirclePolynomial::from_zeros(&zeros)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// The unimodular `u` with `a_k = u conj(a_{n-k})`, if `f` is self-inversive within `tol`.
    pub fn self_inversive_factor(&self, tol: f64) -> Option<Complex64> {
        let n = self.degree();
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return None;
        }
        let u = self.coeffs[n] / a0.conj();
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let ok = (u.norm() - 1.0).abs() <= tol
            && (0..=n).all(|k| (self.coeffs[k] - u * self.coeffs[n - k].conj()).norm() <= tol * scale);
        ok.then_some(u)
    }

    /// `Z(theta) = Re(e^{-i n theta/2} f(e^{i theta}) / sqrt(u))`, real on the circle
    /// for self-inversive `f`; antiperiodic when `n` is odd.
    fn circle_function(&self, u: Complex64) -> impl Fn(f64) -> f64 + '_ {
        let w = u.sqrt();
        let half = self.degree() as f64 / 2.0;
        move |theta: f64| {
            let z = Complex64::from_polar(1.0, theta);
            (self.eval(z) * Complex64::from_polar(1.0, -half * theta) / w).re
        }
    }
}

/// `D f`: coefficient `m` multiplied by `(m - n/2) * scale`.
pub fn d_operator_scaled(f: &CirclePolynomial, scale: f64) -> CirclePolynomial {
    let n = f.degree() as f64;
    let coeffs = f.coeffs.iter().enumerate().map(|(m, &a)| a * ((m as f64 - n / 2.0) * scale)).collect();
    CirclePolynomial { coeffs }
}

/// `(z d/dz)(z^{-n/2} f)`, returned as the coefficients of `z^{n/2}` times it.
/// Fails when the leading coefficient vanishes (degree 0).
pub fn d_operator(f: &CirclePolynomial) -> Result<CirclePolynomial> {
    if f.degree() == 0 {
        return Err(invalid("the operator annihilates constants"));
    }
    Ok(d_operator_scaled(f, 1.0))
}

/// Whether `D` is applied where the limiting configuration is defined.
pub fn constant_term_vanishes(f: &CirclePolynomial) -> bool {
    f.coeffs[0] == Complex64::new(0.0, 0.0)
}

/// Zeros as angles in `[0, 2pi)`, sorted, with the number of `D` steps behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularZeroSet {
    pub angles: Vec<f64>,
    pub operator_order: usize,
}

impl AngularZeroSet {
    /// Forward arcs between cyclic neighbours.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.angles.len();
        (0..n)
            .map(|i| {
                let next = if i + 1 == n { self.angles[0] + TAU } else { self.angles[i + 1] };
                next - self.angles[i]
            })
            .collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Exactly one of `other`'s angles in each open arc between consecutive angles of `self`.
    pub fn interlaces(&self, other: &AngularZeroSet) -> bool {
        let n = self.angles.len();
        if other.angles.len() != n || n == 0 {
            return false;
        }
        (0..n).all(|i| {
            let lo = self.angles[i];
            let hi = if i + 1 == n { self.angles[0] + TAU } else { self.angles[i + 1] };
            other
                .angles
                .iter()
                .filter(|&&a| {
                    let a = if a < lo { a + TAU } else { a };
                    a > lo && a < hi
                })
                .count()
                == 1
        })
    }
}

/// All `n` zeros of a self-inversive polynomial on the unit circle, by a sign
/// scan of `Z(theta)` at `4n` points (doubled up to `2^10 n`) and bisection.
pub fn circle_zeros(f: &CirclePolynomial) -> Result<AngularZeroSet> {
    circle_zeros_with_order(f, 0)
}

pub fn circle_zeros_with_order(f: &CirclePolynomial, operator_order: usize) -> Result<AngularZeroSet> {
    let n = f.degree();
    if n == 0 {
        return Err(Error::EmptyResult("constant polynomial has no zeros"));
    }
    let u = f.self_inversive_factor(1e-9).ok_or_else(|| invalid("polynomial is not self-inversive"))?;
    let z = f.circle_function(u);
    let mut samples = 4 * n;
    let mut found = 0;
    for _ in 0..=MAX_SCAN_DOUBLINGS {
        // offset start so roots of unity never sit on a sample
        let start = 0.381_966_011_250_105 * TAU / samples as f64;
        let step = TAU / samples as f64;
        let values: Vec<f64> = (0..=samples).map(|i| z(start + step * i as f64)).collect();
        let mut angles = Vec::with_capacity(n);
        for i in 0..samples {
            let (a, b) = (values[i], values[i + 1]);
            let lo = start + step * i as f64;
            if a == 0.0 {
                angles.push(lo);
            } else if a.signum() != b.signum() && b != 0.0 {
                angles.push(bisect(&z, lo, lo + step, a));
            }
        }
        found = angles.len();
        if found == n {
            let mut angles: Vec<f64> = angles
                .into_iter()
                .map(|a| a.rem_euclid(TAU))
                .map(|a| if TAU - a <= ANGLE_TOLERANCE { 0.0 } else { a })
                .collect();
            angles.sort_by(f64::total_cmp);
            return Ok(AngularZeroSet { angles, operator_order });
        }
        samples *= 2;
    }
    Err(Error::ZeroCount { found, expected: n })
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let positive = f_lo > 0.0;
    while hi - lo > ANGLE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zeros of a complex polynomial by Aberth-Ehrlich iteration. Every root must
/// pass a backward-error check of [`ROOT_BACKWARD_ERROR`].
pub fn polynomial_roots(f: &CirclePolynomial) -> Result<Vec<Complex64>> {
    let n = f.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = f.coeffs[n];
    let monic: Vec<Complex64> = f.coeffs.iter().map(|c| c / lead).collect();
    let deriv: Vec<Complex64> = monic.iter().enumerate().skip(1).map(|(m, c)| c * m as f64).collect();
    let horner = |c: &[Complex64], z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);

    let radius = if monic[0].norm() > 0.0 { monic[0].norm().powf(1.0 / n as f64) } else { 1.0 };
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius, TAU * k as f64 / n as f64 + 0.4)).collect();
    let max_iterations = 500;
    for _ in 0..max_iterations {
        let mut biggest = 0.0f64;
        for i in 0..n {
            let p = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / horner(&deriv, z[i]);
            let repulsion: Complex64 =
                (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                biggest = biggest.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if biggest < 1e-15 {
            break;
        }
    }
    for &r in &z {
        let scale = monic.iter().enumerate().map(|(m, c)| c.norm() * r.norm().powi(m as i32)).sum::<f64>();
        let backward = horner(&monic, r).norm() / scale;
        if !(backward <= ROOT_BACKWARD_ERROR) {
            return Err(Error::NonConvergence { lo: backward, hi: ROOT_BACKWARD_ERROR, iterations: max_iterations });
        }
    }
    Ok(z)
}

/// Outcome of iterating `D` on a polynomial with `a_0 != 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorReport {
    pub iterations: usize,
    pub zeros: Vec<Complex64>,
    /// Zeros of `z^n + (-1)^k a_0/a_n`.
    pub targets: Vec<Complex64>,
    pub radius: f64,
    pub max_distance: f64,
}

/// Apply `D` (normalized by `2/n` per step) `k` times and compare zeros with
/// the equally spaced configuration `z^n = -(-1)^k a_0/a_n`.
pub fn attractor_iterate(f: &CirclePolynomial, k: usize) -> Result<AttractorReport> {
    let n = f.degree();
    if n == 0 {
        return Err(invalid("degree must be positive"));
    }
    if constant_term_vanishes(f) {
        return Err(invalid("the limiting configuration needs a_0 != 0"));
    }
    let mut cur = f.clone();
    for _ in 0..k {
        cur = d_operator_scaled(&cur, 2.0 / n as f64);
    }
    let zeros = polynomial_roots(&cur)?;
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    let c = f.coeffs[0] / f.coeffs[n] * sign;
    let radius = c.norm().powf(1.0 / n as f64);
    let targets: Vec<Complex64> =
        (0..n).map(|j| Complex64::from_polar(radius, (c.arg() + TAU * j as f64) / n as f64)).collect();
    let max_distance =
        zeros.iter().map(|z| targets.iter().map(|t| (z - t).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    Ok(AttractorReport { iterations: k, zeros, targets, radius, max_distance })
}

/// Minimum angular gap of the zeros of `f, Df, ..., D^steps f`, for
/// self-inversive `f`. Whether it is non-decreasing is reported, not assumed.
pub fn min_gap_trend(f: &CirclePolynomial, steps: usize) -> Result<Vec<f64>> {
    let mut cur = f.clone();
    let mut out = Vec::with_capacity(steps + 1);
    for order in 0..=steps {
        if order > 0 {
            cur = d_operator(&cur)?;
        }
        out.push(circle_zeros_with_order(&cur, order)?.min_gap());
    }
    Ok(out)
}

/// Polynomial as given in a config or JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolynomialSpec {
    Coefficients {
        coeffs: Vec<[f64; 2]>,
    },
    Zeros {
        zeros: Vec<[f64; 2]>,
    },
    /// Zeros on the unit circle, by angle in radians.
    Angles {
        angles: Vec<f64>,
    },
}

impl PolynomialSpec {
    pub fn build(&self) -> Result<CirclePolynomial> {
        let cx = |v: &[[f64; 2]]| v.iter().map(|&[re, im]| Complex64::new(re, im)).collect::<Vec<_>>();
        match self {
            PolynomialSpec::Coefficients { coeffs } => CirclePolynomial::new(cx(coeffs)),
            PolynomialSpec::Zeros { zeros } => CirclePolynomial::from_zeros(&cx(zeros)),
            PolynomialSpec::Angles { angles } => CirclePolynomial::from_angles(angles),
        }
    }
}

/// Angle in `(-pi, pi]` of `a - b`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
