//! Gap statistics over index windows and the close-pair witness search.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Half-open range `[start, end)` of zero indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub start: usize,
    pub end: usize,
}

impl IndexWindow {
    pub fn new(start: usize, end: usize) -> Self {
        IndexWindow { start, end }
    }

    pub fn full(len: usize) -> Self {
        IndexWindow { start: 0, end: len }
    }

    /// Indices of the sorted `values` lying in `[center - radius, center + radius]`.
    pub fn around(values: &[f64], center: f64, radius: f64) -> Self {
        let start = values.partition_point(|&v| v < center - radius);
        let end = values.partition_point(|&v| v <= center + radius);
        IndexWindow { start, end: end.max(start) }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One consecutive gap: `gap = values[index + 1] - values[index]`, located at `abscissa = values[index]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub index: usize,
    pub abscissa: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub min_gap: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
    pub sup_discrepancy: f64,
    pub window: IndexWindow,
    pub gaps: Vec<Gap>,
}

/// The scalar part of a [`GapReport`], for JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sup_discrepancy: f64,
    pub window: IndexWindow,
    pub count: usize,
}

impl GapReport {
    pub fn summary(&self) -> GapSummary {
        GapSummary {
            min: self.min_gap,
            max: self.max_gap,
            mean: self.mean_gap,
            sup_discrepancy: self.sup_discrepancy,
            window: self.window,
            count: self.gaps.len(),
        }
    }
}

/// Statistics of the gaps between consecutive zeros whose indices both lie in `window`.
pub fn gap_report<Z: AsRef<[f64]> + ?Sized>(zeros: &Z, window: IndexWindow) -> Result<GapReport> {
    let values = zeros.as_ref();
    if window.end > values.len() || window.start > window.end {
        return Err(invalid(format!("window [{}, {}) outside 0..{}", window.start, window.end, values.len())));
    }
    if window.len() < 2 {
        return Err(Error::TooFew { needed: 2, got: window.len() });
    }
    let slice = &values[window.start..window.end];
    let gaps: Vec<Gap> = slice
        .windows(2)
        .enumerate()
        .map(|(i, w)| Gap { index: window.start + i, abscissa: w[0], gap: w[1] - w[0] })
        .collect();
    let min_gap = gaps.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let max_gap = gaps.iter().map(|g| g.gap).fold(f64::NEG_INFINITY, f64::max);
    let span = slice[slice.len() - 1] - slice[0];
    let mean_gap = (span / gaps.len() as f64).clamp(min_gap, max_gap);
    let sup_discrepancy = (mean_gap - min_gap).max(max_gap - mean_gap);
    Ok(GapReport { min_gap, max_gap, mean_gap, sup_discrepancy, window, gaps })
}

/// Linear counting model `n(r) ~ kappa r` with a constant counting error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub kappa: f64,
    pub error_bound: f64,
}

impl DensityModel {
    pub fn new(kappa: f64, error_bound: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid("density kappa must be positive"));
        }
        Ok(DensityModel { kappa, error_bound })
    }

    /// Density fitted from the span of a sorted zero list.
    pub fn from_zeros(zeros: &[f64], error_bound: f64) -> Result<Self> {
        if zeros.len() < 2 {
            return Err(Error::TooFew { needed: 2, got: zeros.len() });
        }
        let span = zeros[zeros.len() - 1] - zeros[0];
        DensityModel::new((zeros.len() - 1) as f64 / span, error_bound)
    }

    pub fn mean_spacing(&self) -> f64 {
        1.0 / self.kappa
    }

    /// Search radius used when none is given: two mean spacings.
    pub fn default_radius(&self) -> f64 {
        2.0 / self.kappa
    }
}

/// A close pair of `f' + a f` zeros and, if found, the nearby close pair of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub q: f64,
    pub p: f64,
    pub derivative_gap: f64,
    /// Index `n` of the tightest pair `(z_n, z_{n+1})` within the radius.
    pub pair_index: Option<usize>,
    pub pair: Option<(f64, f64)>,
}

impl Witness {
    pub fn found(&self) -> bool {
        self.pair.is_some()
    }
}

/// For every consecutive pair `q < p` of `derivative_zeros` with
/// `p - q < close_frac * mean`, look for a consecutive pair of `zeros` with
/// both ends within `radius` of `q` and gap below `pair_frac * mean`, where
/// `mean` is the mean gap of `zeros`. Reports; never asserts.
pub fn close_pair_witness(
    zeros: &[f64],
    derivative_zeros: &[f64],
    close_frac: f64,
    pair_frac: f64,
    radius: f64,
) -> Result<Vec<Witness>> {
    if !(close_frac > 0.0 && close_frac < pair_frac && pair_frac < 1.0) {
        return Err(invalid(format!("need 0 < {close_frac} < {pair_frac} < 1")));
    }
    if !(radius > 0.0) {
        return Err(invalid("search radius must be positive"));
    }
    let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
    if !sorted(zeros) || !sorted(derivative_zeros) {
        return Err(invalid("zero lists must be sorted"));
    }
    let mean = gap_report(zeros, IndexWindow::full(zeros.len()))?.mean_gap;
    if !(mean > 0.0) {
        return Err(invalid("mean gap must be positive"));
    }

    let mut out = Vec::new();
    for w in derivative_zeros.windows(2) {
        let (q, p) = (w[0], w[1]);
        if p - q >= close_frac * mean {
            continue;
        }
        let lo = zeros.partition_point(|&z| z < q - radius);
        let hi = zeros.partition_point(|&z| z <= q + radius);
        let best = (lo..hi.saturating_sub(1))
            .map(|n| (n, zeros[n + 1] - zeros[n]))
            .filter(|&(_, g)| g < pair_frac * mean)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        out.push(Witness {
            q,
            p,
            derivative_gap: p - q,
            pair_index: best.map(|(n, _)| n),
            pair: best.map(|(n, _)| (zeros[n], zeros[n + 1])),
        });
    }
    Ok(out)
}
