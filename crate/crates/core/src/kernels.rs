//! Symmetric unimodal probability kernels on the integers and the decay of
//! their self-convolutions at the origin.
//!
//! Kernels are stored one-sided: `masses[n] = P(n) = P(-n)` for `0 <= n <= radius`.
//! Finite kernels can be exact (arbitrary-size rationals); long kernels such
//! as the differentiation kernel are truncated floats with a declared tail.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{log_log, LineFit};
use crate::quadrature::integrate;
use crate::special::{neumaier_sum, trigamma};

/// Absolute tolerance for float mass sums and shape checks.
pub const MASS_TOLERANCE: f64 = 1e-12;
const SHAPE_TOLERANCE: f64 = 1e-13;
/// Direct self-convolution is used while `2 l^2 r^2` stays below this.
const DIRECT_BUDGET: f64 = 5e7;
/// Largest DFT length used for float centers.
pub const MAX_DFT_LEN: usize = 1 << 22;
/// Default truncation radius for the differentiation and power-tail presets.
pub const DEFAULT_RADIUS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Masses {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Mass missing from a truncated kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub mass: f64,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingKernel {
    name: String,
    masses: Masses,
    tail: Option<Tail>,
    /// `F_P(x) = sum_n P(n) e(nx)` as a polynomial in `x` on `[0, 1]`, when it is one.
    symbol: Option<Vec<BigRational>>,
}

/// Center mass `P^l(0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    Exact(BigRational),
    Float(f64),
}

impl Center {
    pub fn to_f64(&self) -> f64 {
        match self {
            Center::Exact(r) => ratio_to_f64(r),
            Center::Float(x) => *x,
        }
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl SmoothingKernel {
    pub fn exact(name: impl Into<String>, one_sided: Vec<BigRational>) -> Result<Self> {
        let k = SmoothingKernel { name: name.into(), masses: Masses::Exact(one_sided), tail: None, symbol: None };
        k.validate()?;
        Ok(k)
    }

    pub fn float(name: impl Into<String>, one_sided: Vec<f64>, tail: Option<Tail>) -> Result<Self> {
        let k = SmoothingKernel { name: name.into(), masses: Masses::Float(one_sided), tail, symbol: None };
        k.validate()?;
        Ok(k)
    }

    /// From `(n, P(n))` pairs covering both sides; must be symmetric.
    pub fn from_pairs(name: impl Into<String>, pairs: &[(i64, f64)]) -> Result<Self> {
        let side = one_sided(pairs, 0.0, |a, b| a == b)?;
        SmoothingKernel::float(name, side, None)
    }

    pub fn from_rational_pairs(name: impl Into<String>, pairs: &[(i64, BigRational)]) -> Result<Self> {
        let side = one_sided(pairs, BigRational::zero(), |a, b| a == b)?;
        SmoothingKernel::exact(name, side)
    }

    pub fn delta() -> Self {
        SmoothingKernel::exact("delta", vec![BigRational::one()]).expect("valid preset")
    }

    /// `(1/4, 1/2, 1/4)`: two alternating midpoint steps.
    pub fn midpoint() -> Self {
        SmoothingKernel::exact("midpoint2", vec![ratio(1, 2), ratio(1, 4)]).expect("valid preset")
    }

    /// `(1/3, 1/3, 1/3)`.
    pub fn triple() -> Self {
        SmoothingKernel::exact("triple", vec![ratio(1, 3), ratio(1, 3)]).expect("valid preset")
    }

    /// `P(0) = 1/3`, `P(n) = 2/(pi^2 n^2)`, truncated at `radius`, with
    /// symbol `4 (x - 1/2)^2`.
    pub fn differentiation(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(invalid("differentiation kernel needs radius >= 1"));
        }
        let c = 2.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let mut side = Vec::with_capacity(radius + 1);
        side.push(1.0 / 3.0);
        side.extend((1..=radius).map(|n| c / (n as f64 * n as f64)));
        let tail = Tail { mass: 2.0 * c * trigamma(radius as f64 + 1.0), formula: format!("diff2:{radius}") };
        let mut k = SmoothingKernel::float(format!("diff2:{radius}"), side, Some(tail))?;
        k.symbol = Some(vec![ratio(1, 1), ratio(-4, 1), ratio(4, 1)]);
        Ok(k)
    }

    /// `P(n) ~ (1 + |n|)^(-exponent)` on `|n| <= radius`, normalized there.
    pub fn power_tail(exponent: f64, radius: usize) -> Result<Self> {
        if !(exponent > 1.0) {
            return Err(invalid("tail exponent must exceed 1"));
        }
        let raw: Vec<f64> = (0..=radius).map(|n| (1.0 + n as f64).powf(-exponent)).collect();
        let total = raw[0] + 2.0 * neumaier_sum(raw[1..].iter().copied());
        let side = raw.into_iter().map(|w| w / total).collect();
        SmoothingKernel::float(format!("tail:{exponent}:{radius}"), side, None)
    }

    /// Preset by name: `delta`, `midpoint2`, `triple`, `diff2[:M]`, `tail:A[:M]`.
    pub fn preset(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| invalid(format!("bad number {s:?} in kernel {name:?}")));
        let radius = |s: Option<&&str>| -> Result<usize> {
            match s {
                None => Ok(DEFAULT_RADIUS),
                Some(s) => s.parse().map_err(|_| invalid(format!("bad radius {s:?} in kernel {name:?}"))),
            }
        };
        match parts.as_slice() {
            ["delta"] => Ok(SmoothingKernel::delta()),
            ["midpoint2"] | ["midpoint"] => Ok(SmoothingKernel::midpoint()),
            ["triple"] => Ok(SmoothingKernel::triple()),
            ["diff2", rest @ ..] if rest.len() <= 1 => SmoothingKernel::differentiation(radius(rest.first())?),
            ["tail", a, rest @ ..] if rest.len() <= 1 => SmoothingKernel::power_tail(num(a)?, radius(rest.first())?),
            _ => Err(invalid(format!("unknown kernel preset {name:?}"))),
        }
    }

    pub fn from_spec(spec: &KernelSpec, exact: bool) -> Result<Self> {
        match spec {
            KernelSpec::Preset(name) => SmoothingKernel::preset(name),
            KernelSpec::Masses { masses } => {
                if exact {
                    let pairs: Vec<(i64, BigRational)> =
                        masses.iter().map(|(n, v)| Ok((*n, v.to_rational()?))).collect::<Result<_>>()?;
                    SmoothingKernel::from_rational_pairs("custom", &pairs)
                } else {
                    let pairs: Vec<(i64, f64)> =
                        masses.iter().map(|(n, v)| Ok((*n, v.to_f64()?))).collect::<Result<_>>()?;
                    SmoothingKernel::from_pairs("custom", &pairs)
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self) -> usize {
        match &self.masses {
            Masses::Exact(v) => v.len() - 1,
            Masses::Float(v) => v.len() - 1,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.masses, Masses::Exact(_))
    }

    pub fn masses(&self) -> &Masses {
        &self.masses
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn symbol(&self) -> Option<&[BigRational]> {
        self.symbol.as_deref()
    }

    /// `P(n)` as a float, zero outside the support.
    pub fn mass(&self, n: i64) -> f64 {
        let i = n.unsigned_abs() as usize;
        match &self.masses {
            Masses::Exact(v) => v.get(i).map(ratio_to_f64).unwrap_or(0.0),
            Masses::Float(v) => v.get(i).copied().unwrap_or(0.0),
        }
    }

    /// One-sided masses as floats.
    pub fn float_masses(&self) -> Vec<f64> {
        match &self.masses {
            Masses::Exact(v) => v.iter().map(ratio_to_f64).collect(),
            Masses::Float(v) => v.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.masses {
            Masses::Exact(v) => {
                if v.is_empty() || v.iter().any(|m| m.is_negative()) {
                    return Err(Error::KernelShape("masses must be non-negative"));
                }
                if v.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::KernelShape("masses must be non-increasing away from 0"));
                }
                let total = v[1..].iter().fold(v[0].clone(), |acc, m| acc + m * BigInt::from(2));
                if !total.is_one() {
                    return Err(Error::MassDefect { sum: ratio_to_f64(&total), tail_estimate: 0.0 });
                }
            }
            Masses::Float(v) => {
                if v.is_empty() || v.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
                    return Err(Error::KernelShape("masses must be finite and non-negative"));
                }
                if v.windows(2).any(|w| w[1] > w[0] + SHAPE_TOLERANCE) {
                    return Err(Error::KernelShape("masses must be non-increasing away from 0"));
                }
                let tail = self.tail.as_ref().map_or(0.0, |t| t.mass);
                let sum = v[0] + 2.0 * neumaier_sum(v[1..].iter().copied());
                if (sum + tail - 1.0).abs() > MASS_TOLERANCE {
                    return Err(Error::MassDefect { sum, tail_estimate: tail });
                }
            }
        }
        Ok(())
    }
}

fn one_sided<T: Clone>(pairs: &[(i64, T)], zero: T, eq: impl Fn(&T, &T) -> bool) -> Result<Vec<T>> {
    let radius = pairs.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    let mut pos = vec![zero.clone(); radius + 1];
    let mut neg = vec![zero; radius + 1];
    for (n, m) in pairs {
        let slot = if *n >= 0 { &mut pos[*n as usize] } else { &mut neg[n.unsigned_abs() as usize] };
        *slot = m.clone();
    }
    neg[0] = pos[0].clone();
    if pos.iter().zip(&neg).any(|(a, b)| !eq(a, b)) {
        return Err(Error::KernelShape("kernel must be symmetric"));
    }
    Ok(pos)
}

/// Kernel description as found in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSpec {
    Preset(String),
    Masses { masses: Vec<(i64, MassValue)> },
}

/// A mass given as a number or as a rational string like `"1/4"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassValue {
    Number(f64),
    Ratio(String),
}

impl MassValue {
    fn to_rational(&self) -> Result<BigRational> {
        match self {
            MassValue::Number(x) => BigRational::from_float(*x).ok_or_else(|| invalid(format!("mass {x} not finite"))),
            MassValue::Ratio(s) => BigRational::from_str(s.trim()).map_err(|_| invalid(format!("bad rational {s:?}"))),
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            MassValue::Number(x) => Ok(*x),
            MassValue::Ratio(_) => Ok(ratio_to_f64(&self.to_rational()?)),
        }
    }
}

fn mirror<T: Clone>(side: &[T]) -> Vec<T> {
    side[1..].iter().rev().chain(side.iter()).cloned().collect()
}

fn full_convolve_exact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn full_convolve_float(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    if (a.len() as f64) * (b.len() as f64) <= 1e8 {
        let mut out = vec![0.0; len];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let n = len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let pad = |v: &[f64]| {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(n, Complex::new(0.0, 0.0));
        buf
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    fa[..len].iter().map(|c| (c.re / n as f64).max(0.0)).collect()
}

/// Fold a symmetric full vector of odd length back to its right half.
fn fold<T: Clone>(full: Vec<T>) -> Vec<T> {
    let c = full.len() / 2;
    full.into_iter().skip(c).collect()
}

fn symmetrize(full: &[f64]) -> Vec<f64> {
    let c = full.len() / 2;
    (0..=c).map(|n| 0.5 * (full[c + n] + full[c - n])).collect()
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    full_convolve_exact(a, b)
}

/// `P * Q`. Both kernels must use the same arithmetic.
pub fn convolve(p: &SmoothingKernel, q: &SmoothingKernel) -> Result<SmoothingKernel> {
    let name = format!("{}*{}", p.name, q.name);
    let symbol = match (&p.symbol, &q.symbol) {
        (Some(a), Some(b)) => Some(poly_mul(a, b)),
        _ => None,
    };
    let mut k = match (&p.masses, &q.masses) {
        (Masses::Exact(a), Masses::Exact(b)) => {
            let side = fold(full_convolve_exact(&mirror(a), &mirror(b)));
            SmoothingKernel { name, masses: Masses::Exact(side), tail: None, symbol: None }
        }
        (Masses::Float(a), Masses::Float(b)) => {
            let side = symmetrize(&full_convolve_float(&mirror(a), &mirror(b)));
            let (ta, tb) = (p.tail.as_ref().map_or(0.0, |t| t.mass), q.tail.as_ref().map_or(0.0, |t| t.mass));
            let tail = match (&p.tail, &q.tail) {
                (None, None) => None,
                _ => Some(Tail {
                    mass: ta + tb - ta * tb,
                    formula: format!(
                        "{}*{}",
                        p.tail.as_ref().map_or("none", |t| t.formula.as_str()),
                        q.tail.as_ref().map_or("none", |t| t.formula.as_str())
                    ),
                }),
            };
            SmoothingKernel { name, masses: Masses::Float(side), tail, symbol: None }
        }
        _ => return Err(Error::KernelShape("cannot convolve exact and float kernels")),
    };
    k.validate()?;
    k.symbol = symbol;
    Ok(k)
}

/// `P^l(0)`: exact for exact kernels, otherwise the center of the `l`-fold
/// convolution of the stored (truncated) masses.
pub fn iterate_center(p: &SmoothingKernel, l: usize) -> Result<Center> {
    if l == 0 {
        return Err(invalid("convolution power must be at least 1"));
    }
    match &p.masses {
        Masses::Exact(side) => {
            let base = mirror(side);
            let mut cur = base.clone();
            for _ in 1..l {
                cur = full_convolve_exact(&cur, &base);
            }
            Ok(Center::Exact(cur[cur.len() / 2].clone()))
        }
        Masses::Float(side) => {
            let r = (side.len() - 1) as f64;
            if 2.0 * (l as f64).powi(2) * r * r <= DIRECT_BUDGET {
                let base = mirror(side);
                let mut cur = base.clone();
                for _ in 1..l {
                    cur = full_convolve_float(&cur, &base);
                }
                Ok(Center::Float(cur[cur.len() / 2]))
            } else {
                Ok(Center::Float(SpectralCenters::new(p, l)?.center(l)))
            }
        }
    }
}

/// The DFT `F(k) = sum_n P(n) e(-kn/N)` of a float kernel, from which
/// `P^l(0) = (1/N) sum_k F(k)^l` for every `l` with `l * 2 * radius < N`.
/// Larger `l` alias the masses at multiples of `N`.
pub struct SpectralCenters {
    spectrum: Vec<f64>,
}

impl SpectralCenters {
    /// Sized so that powers up to `max_power` do not wrap, capped at [`MAX_DFT_LEN`].
    pub fn new(p: &SmoothingKernel, max_power: usize) -> Result<Self> {
        let side = p.float_masses();
        let radius = side.len() - 1;
        let n = (max_power.max(1) * 2 * radius + 1).next_power_of_two().clamp(2, MAX_DFT_LEN);
        if 2 * radius + 1 > n {
            return Err(invalid(format!("kernel radius {radius} too large for a DFT of length {n}")));
        }
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        buf[0].re = side[0];
        for (i, &m) in side.iter().enumerate().skip(1) {
            buf[i].re = m;
            buf[n - i].re = m;
        }
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        Ok(SpectralCenters { spectrum: buf.into_iter().map(|c| c.re).collect() })
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    pub fn center(&self, l: usize) -> f64 {
        let n = self.spectrum.len() as f64;
        neumaier_sum(self.spectrum.iter().map(|f| f.powi(l as i32))) / n
    }
}

/// `F_P(x)` from the masses: `P(0) + 2 sum_n P(n) cos(2 pi n x)`.
pub fn symbol_value(p: &SmoothingKernel, x: f64) -> f64 {
    if let Some(poly) = &p.symbol {
        let coeffs: Vec<f64> = poly.iter().map(ratio_to_f64).collect();
        return coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    }
    let side = p.float_masses();
    let t = std::f64::consts::TAU * x;
    side[0] + 2.0 * side.iter().enumerate().skip(1).map(|(n, m)| m * (t * n as f64).cos()).sum::<f64>()
}

/// `int_0^1 F_P(x)^l dx` by adaptive quadrature split at `1/2`. Uses the
/// closed-form symbol when the kernel carries one.
pub fn fourier_center(p: &SmoothingKernel, l: usize, tol: f64) -> Result<f64> {
    if l == 0 {
        return Err(invalid("convolution power must be at least 1"));
    }
    Ok(integrate(|x| symbol_value(p, x).powi(l as i32), 0.0, 1.0, &[0.5], tol)?.value)
}

/// `int_0^1 F_P(x)^l dx` in exact arithmetic. Needs a polynomial symbol, or a
/// finite exact kernel (where the answer is the exact convolution center).
pub fn fourier_center_exact(p: &SmoothingKernel, l: usize) -> Result<BigRational> {
    if l == 0 {
        return Err(invalid("convolution power must be at least 1"));
    }
    if let Some(poly) = &p.symbol {
        let mut acc = vec![BigRational::one()];
        let mut base = poly.clone();
        let mut e = l;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = poly_mul(&base, &base);
            }
        }
        return Ok(acc.iter().enumerate().fold(BigRational::zero(), |s, (i, c)| s + c / BigInt::from(i + 1)));
    }
    match iterate_center(p, l)? {
        Center::Exact(r) => Ok(r),
        Center::Float(_) => Err(Error::KernelShape("no exact symbol for a float kernel")),
    }
}

/// `2 eps P^l(0)`: bound on the gap discrepancy after smoothing `l` times.
pub fn discrepancy_bound(p: &SmoothingKernel, l: usize, eps_bound: f64) -> Result<f64> {
    Ok(2.0 * eps_bound * iterate_center(p, l)?.to_f64())
}

/// `points` log-spaced integers from `lo` to `hi`, deduplicated.
pub fn log_spaced(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let (a, b) = ((lo.max(1) as f64).ln(), (hi.max(1) as f64).ln());
    let mut v: Vec<usize> = (0..points.max(2))
        .map(|i| (a + (b - a) * i as f64 / (points.max(2) - 1) as f64).exp().round() as usize)
        .collect();
    v.dedup();
    v
}

/// Log-log slope of `P^l(0)` against `l` over `powers` (which must span a decade).
pub fn rate_fit(p: &SmoothingKernel, powers: &[usize]) -> Result<LineFit> {
    let lo = powers.iter().copied().min().unwrap_or(0);
    let hi = powers.iter().copied().max().unwrap_or(0);
    if lo == 0 || hi < 10 * lo {
        return Err(invalid(format!("powers {lo}..{hi} must be positive and span a decade")));
    }
    let direct = matches!(p.masses, Masses::Exact(_))
        || 2.0 * (hi as f64).powi(2) * (p.radius() as f64).powi(2) <= DIRECT_BUDGET;
    let centers: Vec<f64> = if direct {
        let side = p.float_masses();
        let base = mirror(&side);
        let mut cur = base.clone();
        let mut out = Vec::new();
        let mut sorted: Vec<usize> = powers.to_vec();
        sorted.sort_unstable();
        let mut power = 1;
        let mut values = std::collections::BTreeMap::new();
        for &target in &sorted {
            while power < target {
                cur = full_convolve_float(&cur, &base);
                power += 1;
            }
            values.insert(target, cur[cur.len() / 2]);
        }
        for l in powers {
            out.push(values[l]);
        }
        out
    } else {
        let spectral = SpectralCenters::new(p, hi)?;
        powers.iter().map(|&l| spectral.center(l)).collect()
    };
    if let Some(bad) = centers.iter().find(|c| !(**c > 0.0)) {
        return Err(invalid(format!("non-positive center {bad}")));
    }
    let xs: Vec<f64> = powers.iter().map(|&l| l as f64).collect();
    log_log(&xs, &centers)
}

/// Shape diagnosis for an arbitrary probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnosis {
    pub unit_mass: bool,
    pub symmetric: bool,
    pub unimodal: bool,
    pub center_is_max: bool,
    /// gcd of the differences between support points.
    pub period: u64,
    /// `F_P(1/2) = -1`: the kernel only moves mass between even and odd sites.
    pub bipartite: bool,
    /// `|F_P| = 1` only at `x = 0`, so iterates converge to equal spacing.
    pub mixing: bool,
    pub verdict: String,
}

pub fn counterexample_check(pmf: &[(i64, f64)]) -> Diagnosis {
    let tol = SHAPE_TOLERANCE;
    let lookup = |n: i64| pmf.iter().filter(|(m, _)| *m == n).map(|(_, p)| *p).sum::<f64>();
    let support: Vec<i64> = {
        let mut s: Vec<i64> = pmf.iter().filter(|(_, p)| *p > 0.0).map(|(n, _)| *n).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let total: f64 = pmf.iter().map(|(_, p)| p).sum();
    let unit_mass = (total - 1.0).abs() <= MASS_TOLERANCE && pmf.iter().all(|(_, p)| *p >= 0.0);
    let symmetric = support.iter().all(|&n| (lookup(n) - lookup(-n)).abs() <= tol);
    let reach = support.iter().map(|n| n.unsigned_abs()).max().unwrap_or(0) as i64;
    let unimodal = (0..reach).all(|n| lookup(n + 1) <= lookup(n) + tol && lookup(-n - 1) <= lookup(-n) + tol);
    let peak = lookup(0);
    let center_is_max = support.iter().all(|&n| lookup(n) <= peak + tol);
    let period = support.windows(2).map(|w| (w[1] - w[0]).unsigned_abs()).fold(0u64, |g, d| g.gcd(&d));
    let half: f64 = pmf.iter().map(|(n, p)| if n.rem_euclid(2) == 0 { *p } else { -*p }).sum();
    let bipartite = (half + 1.0).abs() <= 1e-12;
    let mixing = period == 1;

    let mut problems = Vec::new();
    if !unit_mass {
        problems.push("mass is not 1".to_string());
    }
    if !symmetric {
        problems.push("not symmetric".to_string());
    }
    if !unimodal || !center_is_max {
        problems.push("P(0) is not the maximum of a unimodal profile".to_string());
    }
    if bipartite {
        problems.push("F_P(1/2) = -1: even and odd sites never mix, two interlaced sequences persist".to_string());
    } else if !mixing {
        problems.push(format!("support has period {period}: |F_P| = 1 away from 0, spacing does not equalize"));
    }
    let verdict = if problems.is_empty() { "pass".to_string() } else { problems.join("; ") };
    Diagnosis { unit_mass, symmetric, unimodal, center_is_max, period, bipartite, mixing, verdict }
}

/// `sum_n |P(n) - P(n-1)|` over the full support of the one-sided float masses.
pub fn total_variation(side: &[f64]) -> f64 {
    let full = mirror(side);
    let inner: f64 = full.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    inner + full[0] + full[full.len() - 1]
}
