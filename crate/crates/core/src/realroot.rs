//! Real-rooted functions `A e^{Bx} prod (x - z_j)` and the zeros of `f' + a f`.
//!
//! Everything here works through the logarithmic derivative
//!
//! ```text
//! (f' + a f) / f (x) = a + B + sum_j 1/(x - z_j)      [+ sum_j 1/z_j if compensated]
//! ```
//!
//! which is strictly decreasing between consecutive zeros of `f`, running from
//! `+inf` to `-inf`. Each open gap therefore holds exactly one zero of
//! `f' + a f`, and a bracketed solver finds it without any initial guess.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerances for the bracketed root solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance in abscissa units.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-12, max_iterations: 200 }
    }
}

/// Number of bracket doublings allowed when looking for the zero outside the hull.
pub const MAX_BRACKET_DOUBLINGS: usize = 64;

/// A function `A e^{Bx} prod_j (x - z_j)`, or with `compensated` set,
/// `A e^{Bx} prod_j (1 - x/z_j) e^{x/z_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRootedFunction {
    zeros: Vec<f64>,
    slope: f64,
    scale: f64,
    compensated: bool,
}

impl RealRootedFunction {
    /// Monic product over `zeros` (sorted on construction), with `A = 1`, `B = 0`.
    pub fn new(mut zeros: Vec<f64>) -> Result<Self> {
        if let Some(bad) = zeros.iter().find(|z| !z.is_finite()) {
            return Err(invalid(format!("zero {bad} is not finite")));
        }
        zeros.sort_by(f64::total_cmp);
        Ok(RealRootedFunction { zeros, slope: 0.0, scale: 1.0, compensated: false })
    }

    pub fn with_slope(mut self, slope: f64) -> Self {
        self.slope = slope;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if scale == 0.0 || !scale.is_finite() {
            return Err(invalid("scale must be finite and nonzero"));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Switch to the Hadamard form with `e^{x/z_j}` convergence factors.
    pub fn with_compensators(mut self) -> Result<Self> {
        if self.zeros.contains(&0.0) {
            return Err(invalid("compensated form needs all zeros away from 0"));
        }
        self.compensated = true;
        Ok(self)
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_compensated(&self) -> bool {
        self.compensated
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    fn compensator_sum(&self) -> f64 {
        if self.compensated {
            self.zeros.iter().map(|z| 1.0 / z).sum()
        } else {
            0.0
        }
    }

    /// The constant part `a + B (+ sum 1/z_j)` of `(f' + a f)/f`.
    pub fn shift(&self, a: f64) -> f64 {
        a + self.slope + self.compensator_sum()
    }

    /// `(f' + a f)/f` at `x`.
    pub fn log_derivative(&self, a: f64, x: f64) -> Result<f64> {
        if let Some(index) = self.zeros.iter().position(|&z| z == x) {
            return Err(Error::AtZero { index, x });
        }
        Ok(self.shift(a) + self.zeros.iter().map(|z| 1.0 / (x - z)).sum::<f64>())
    }

    /// All real zeros of `f' + a f`.
    ///
    /// A zero of multiplicity `m` contributes `m - 1` copies of itself; each
    /// gap between distinct zeros contributes one solved zero; when the
    /// constant `a + B` is nonzero one more zero lies outside the hull.
    pub fn derivative_zeros(&self, a: f64, opts: &SolverOptions) -> Result<ZeroSequence> {
        if self.zeros.is_empty() {
            return Err(Error::EmptyResult("function has no zeros"));
        }
        let clusters = Clusters::new(&self.zeros);
        let c = self.shift(a);
        let mut out = Vec::with_capacity(self.zeros.len() + 1);

        for (&u, &m) in clusters.values.iter().zip(&clusters.mult) {
            let repeats = m as usize - 1;
            out.extend(std::iter::repeat_n(u, repeats));
        }
        for w in clusters.values.windows(2) {
            out.push(solve_decreasing(|x| clusters.eval(c, x), w[0], w[1], opts)?);
        }
        if c != 0.0 {
            out.push(clusters.outer_zero(c, opts)?);
        }
        if out.is_empty() {
            return Err(Error::EmptyResult("f' + a f has no zeros"));
        }
        out.sort_by(f64::total_cmp);
        Ok(ZeroSequence { values: out, derivative_order: 1, source_id: String::new() })
    }

    /// `f' + a f` as a real-rooted function in the same normalization.
    ///
    /// The uncompensated form keeps `B`; the compensated form folds the old
    /// and new reciprocal sums into `B` so that the function is unchanged.
    pub fn derivative(&self, a: f64, opts: &SolverOptions) -> Result<RealRootedFunction> {
        let zeros = self.derivative_zeros(a, opts)?.values;
        let c = self.shift(a);
        let lead = if c != 0.0 { c } else { self.zeros.len() as f64 };
        if !self.compensated {
            return Ok(RealRootedFunction { zeros, slope: self.slope, scale: self.scale * lead, compensated: false });
        }
        // A e^{(B+s)x} prod(1 - x/z) differentiated is
        // A lead prod(-1/z) e^{(B+s)x} prod(x - p).
        let old_sum = self.compensator_sum();
        if zeros.contains(&0.0) {
            let scale = self.scale * lead * signed_product(self.zeros.iter().map(|z| -1.0 / z));
            return Ok(RealRootedFunction { zeros, slope: self.slope + old_sum, scale, compensated: false });
        }
        let new_sum: f64 = zeros.iter().map(|p| 1.0 / p).sum();
        let ratio = signed_product(zeros.iter().map(|p| -p).chain(self.zeros.iter().map(|z| -1.0 / z)));
        Ok(RealRootedFunction {
            zeros,
            slope: self.slope + old_sum - new_sum,
            scale: self.scale * lead * ratio,
            compensated: true,
        })
    }
}

impl AsRef<[f64]> for RealRootedFunction {
    fn as_ref(&self) -> &[f64] {
        &self.zeros
    }
}

/// Product computed in log space to dodge intermediate overflow.
fn signed_product<I: Iterator<Item = f64>>(factors: I) -> f64 {
    let mut log = 0.0;
    let mut negative = false;
    for f in factors {
        log += f.abs().ln();
        negative ^= f < 0.0;
    }
    let mag = log.exp();
    if negative {
        -mag
    } else {
        mag
    }
}

/// Distinct zeros with multiplicities.
struct Clusters {
    values: Vec<f64>,
    mult: Vec<f64>,
}

impl Clusters {
    fn new(sorted: &[f64]) -> Self {
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut mult: Vec<f64> = Vec::with_capacity(sorted.len());
        for &z in sorted {
            match values.last() {
                Some(&last) if last == z => *mult.last_mut().unwrap() += 1.0,
                _ => {
                    values.push(z);
                    mult.push(1.0);
                }
            }
        }
        Clusters { values, mult }
    }

    /// `(c + sum m/(x-u), -sum m/(x-u)^2)`.
    fn eval(&self, c: f64, x: f64) -> (f64, f64) {
        let mut g = c;
        let mut dg = 0.0;
        for (&u, &m) in self.values.iter().zip(&self.mult) {
            let r = 1.0 / (x - u);
            g += m * r;
            dg -= m * r * r;
        }
        (g, dg)
    }

    fn outer_zero(&self, c: f64, opts: &SolverOptions) -> Result<f64> {
        let first = self.values[0];
        let last = *self.values.last().unwrap();
        let mut step = (last - first).max(1.0);
        if c < 0.0 {
            // g decreases from +inf at the last zero towards c < 0.
            let mut lo = last;
            for _ in 0..MAX_BRACKET_DOUBLINGS {
                let x = last + step;
                if self.eval(c, x).0 <= 0.0 {
                    return solve_decreasing(|t| self.eval(c, t), lo, x, opts);
                }
                lo = x;
                step *= 2.0;
            }
            Err(Error::NonConvergence { lo, hi: f64::INFINITY, iterations: MAX_BRACKET_DOUBLINGS })
        } else {
            let mut hi = first;
            for _ in 0..MAX_BRACKET_DOUBLINGS {
                let x = first - step;
                if self.eval(c, x).0 >= 0.0 {
                    return solve_decreasing(|t| self.eval(c, t), x, hi, opts);
                }
                hi = x;
                step *= 2.0;
            }
            Err(Error::NonConvergence { lo: f64::NEG_INFINITY, hi, iterations: MAX_BRACKET_DOUBLINGS })
        }
    }
}

/// Zero of a decreasing function on `(lo, hi)` where `g(lo+) > 0 > g(hi-)`.
///
/// `g` returns the value and its derivative. Newton steps are taken while
/// they stay inside the shrinking bracket; otherwise the bracket is bisected.
pub fn solve_decreasing<G>(g: G, mut lo: f64, mut hi: f64, opts: &SolverOptions) -> Result<f64>
where
    G: Fn(f64) -> (f64, f64),
{
    let tol = |x: f64| opts.tolerance.max(4.0 * f64::EPSILON * x.abs());
    let mut x = 0.5 * (lo + hi);
    for _ in 0..opts.max_iterations {
        if hi - lo <= tol(x) {
            return Ok(0.5 * (lo + hi));
        }
        let (v, d) = g(x);
        if v.is_nan() {
            break;
        }
        if v == 0.0 {
            return Ok(x);
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= tol(x) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence { lo, hi, iterations: opts.max_iterations })
}

/// Sorted zeros produced by one derivative step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSequence {
    values: Vec<f64>,
    derivative_order: usize,
    source_id: String,
}

impl ZeroSequence {
    pub fn new(mut values: Vec<f64>, derivative_order: usize, source_id: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("zero sequence entries must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(ZeroSequence { values, derivative_order, source_id: source_id.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn derivative_order(&self) -> usize {
        self.derivative_order
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.derivative_order = order;
        self
    }

    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }
}

impl AsRef<[f64]> for ZeroSequence {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Smallest distance between zeros counted with multiplicity (0 for a repeated zero).
pub fn min_gap<Z: AsRef<[f64]> + ?Sized>(zeros: &Z) -> Result<f64> {
    let z = zeros.as_ref();
    if z.len() < 2 {
        return Err(Error::TooFew { needed: 2, got: z.len() });
    }
    let sorted;
    let z = if z.windows(2).all(|w| w[0] <= w[1]) {
        z
    } else {
        let mut v = z.to_vec();
        v.sort_by(f64::total_cmp);
        sorted = v;
        &sorted[..]
    };
    Ok(z.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DisplacementRegime {
    /// `|M| * gap < 1`: quadratic correction from the midpoint.
    SmallM,
    /// The zero hugs an endpoint at distance `1/|M|`.
    LargeM,
}

/// Heuristic location of the zero of `f'` in one gap, from `M = f'/f(midpoint)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Displacement {
    pub m: f64,
    pub midpoint: f64,
    pub predicted: f64,
    pub offset: f64,
    pub regime: DisplacementRegime,
}

/// Two-regime estimate of where `f'` vanishes inside gap `gap_index`
/// (between zeros `gap_index` and `gap_index + 1`). Diagnostic only.
pub fn displacement_diagnostic(f: &RealRootedFunction, gap_index: usize) -> Result<Displacement> {
    let z = f.zeros();
    if gap_index + 1 >= z.len() {
        return Err(invalid(format!("gap {gap_index} out of range for {} zeros", z.len())));
    }
    let (left, right) = (z[gap_index], z[gap_index + 1]);
    let simple_left = gap_index == 0 || z[gap_index - 1] != left;
    let simple_right = gap_index + 2 >= z.len() || z[gap_index + 2] != right;
    if left == right || !simple_left || !simple_right {
        return Err(invalid(format!("gap {gap_index} does not have simple endpoints")));
    }
    let width = right - left;
    let midpoint = 0.5 * (left + right);
    let m = f.log_derivative(0.0, midpoint)?;
    let (predicted, regime) = if m.abs() * width < 1.0 {
        (midpoint + m * width * width / 8.0, DisplacementRegime::SmallM)
    } else if m > 0.0 {
        (right - 1.0 / m, DisplacementRegime::LargeM)
    } else {
        (left - 1.0 / m, DisplacementRegime::LargeM)
    };
    Ok(Displacement { m, midpoint, predicted, offset: predicted - midpoint, regime })
}

/// Turán inequalities `c_k^2 - c_{k-1} c_{k+1} >= 0` for `1 <= k <= len - 2`,
/// where `c_j` are the coefficients of `sum c_j x^j / j!`.
pub fn turan_check(taylor_coeffs: &[f64]) -> Result<Vec<bool>> {
    if taylor_coeffs.len() < 3 {
        return Err(Error::TooFew { needed: 3, got: taylor_coeffs.len() });
    }
    Ok(taylor_coeffs.windows(3).map(|w| w[1] * w[1] - w[0] * w[2] >= 0.0).collect())
}
