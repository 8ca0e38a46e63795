//! Temporal stationarity from the spectral divergence between averaged PDPs.
//!
//! For windows `i`, `j` with PDPs `a`, `b` over `N` delay bins:
//!
//! ```text
//! gamma(i, j) = ln( (1/N^2) * sum_p a_p / b_p * sum_p b_p / a_p )
//! ```
//!
//! which is zero for proportional PDPs and non-negative otherwise (by
//! Cauchy-Schwarz). The stationarity region around window `i` is the run of
//! windows whose divergence to `i` stays at or below a threshold.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::RelativeTrack;

/// Default divergence threshold, `e^-1`.
pub const DEFAULT_THRESHOLD: f64 = 0.367_879_441_171_442_33;
/// Bins are floored at this fraction of their window's peak before the
/// divergence is evaluated.
pub const PDP_FLOOR: f64 = 1e-12;

/// Symmetric, zero-diagonal matrix of pairwise divergences.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DivergenceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Floors every bin at `floor_rel` times the profile peak.
pub fn regularize(pdp: &[f64], floor_rel: f64) -> Vec<f64> {
    let peak = pdp.iter().copied().fold(0.0, f64::max);
    let floor = peak * floor_rel;
    pdp.iter().map(|&p| p.max(floor)).collect()
}

/// Divergence between two strictly positive profiles of equal length.
pub fn spectral_divergence(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let (ab, ba) = a
        .iter()
        .zip(b)
        .fold((0.0, 0.0), |(s1, s2), (x, y)| (s1 + x / y, s2 + y / x));
    ((ab / n) * (ba / n)).ln().max(0.0)
}

/// Pairwise divergences of regularized PDPs. Rows are evaluated in parallel;
/// only the upper triangle is computed and mirrored so symmetry is exact.
pub fn divergence_matrix<P: AsRef<[f64]> + Sync>(pdps: &[P]) -> Result<DivergenceMatrix> {
    let n = pdps.len();
    let bins = pdps.first().map_or(0, |p| p.as_ref().len());
    let mut reg = Vec::with_capacity(n);
    for (w, p) in pdps.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != bins {
            return Err(Error::Index(format!(
                "window {w} has {} bins, expected {bins}",
                p.len()
            )));
        }
        let r = regularize(p, PDP_FLOOR);
        if r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::NullBin { window: w });
        }
        reg.push(r);
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| spectral_divergence(&reg[i], &reg[j]))
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &g) in row.iter().enumerate() {
            let j = i + 1 + k;
            values[i * n + j] = g;
            values[j * n + i] = g;
        }
    }
    Ok(DivergenceMatrix { n, values })
}

/// How the bounds of a stationarity region are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanRule {
    /// Longest contiguous run of sub-threshold windows containing the reference.
    #[default]
    ContiguousRun,
    /// Farthest sub-threshold window on each side, ignoring excursions between.
    Farthest,
}

impl std::str::FromStr for SpanRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "contiguous" => Ok(Self::ContiguousRun),
            "farthest" => Ok(Self::Farthest),
            other => Err(format!("unknown span rule {other:?} (contiguous|farthest)")),
        }
    }
}

impl std::fmt::Display for SpanRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpanRule::ContiguousRun => "contiguous",
            SpanRule::Farthest => "farthest",
        })
    }
}

/// Placement of the PDP windows on the time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTiming {
    /// Start time of each window, s.
    pub starts: Vec<f64>,
    /// Duration covered by one window, s.
    pub length: f64,
}

impl WindowTiming {
    pub fn from_samples(starts: &[usize], window: usize, dt: f64) -> Self {
        Self {
            starts: starts.iter().map(|&s| s as f64 * dt).collect(),
            length: window as f64 * dt,
        }
    }

    /// Time from the start of the first window to the end of the last.
    pub fn total(&self) -> f64 {
        match (self.starts.first(), self.starts.last()) {
            (Some(a), Some(b)) => b + self.length - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarySpan {
    /// Centre of the reference window, s.
    pub t: f64,
    /// Start of the earliest window in the region, s.
    pub t_min: f64,
    /// End of the latest window in the region, s.
    pub t_max: f64,
    /// First and last window index of the region.
    pub lo: usize,
    pub hi: usize,
    /// Stationary distance, m.
    pub d_sd: f64,
}

fn span_bounds(gamma: &DivergenceMatrix, i: usize, c_th: f64, rule: SpanRule) -> (usize, usize) {
    let row = gamma.row(i);
    match rule {
        SpanRule::ContiguousRun => {
            let mut lo = i;
            while lo > 0 && row[lo - 1] <= c_th {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < row.len() && row[hi + 1] <= c_th {
                hi += 1;
            }
            (lo, hi)
        }
        SpanRule::Farthest => {
            let lo = (0..i).find(|&j| row[j] <= c_th).unwrap_or(i);
            let hi = (i + 1..row.len()).rev().find(|&j| row[j] <= c_th).unwrap_or(i);
            (lo, hi)
        }
    }
}

fn check_inputs(gamma: &DivergenceMatrix, timing: &WindowTiming, c_th: f64) -> Result<()> {
    if !(c_th > 0.0) {
        return Err(Error::range("c_th", c_th));
    }
    if timing.starts.len() != gamma.len() {
        return Err(Error::Index(format!(
            "{} window times for a {}x{0} divergence matrix",
            timing.starts.len(),
            gamma.len()
        )));
    }
    Ok(())
}

fn spans_with(
    gamma: &DivergenceMatrix,
    timing: &WindowTiming,
    c_th: f64,
    rule: SpanRule,
    distance: impl Fn(f64, f64) -> f64 + Sync,
) -> Vec<StationarySpan> {
    (0..gamma.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = span_bounds(gamma, i, c_th, rule);
            let t_min = timing.starts[lo];
            let t_max = timing.starts[hi] + timing.length;
            StationarySpan {
                t: timing.starts[i] + timing.length / 2.0,
                t_min,
                t_max,
                lo,
                hi,
                d_sd: distance(t_min, t_max),
            }
        })
        .collect()
}

/// Stationary distance `v * (t_max - t_min)` for every reference window.
pub fn stationary_spans(
    gamma: &DivergenceMatrix,
    timing: &WindowTiming,
    v: f64,
    c_th: f64,
    rule: SpanRule,
) -> Result<Vec<StationarySpan>> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::range("speed", v));
    }
    check_inputs(gamma, timing, c_th)?;
    Ok(spans_with(gamma, timing, c_th, rule, |a, b| v * (b - a)))
}

/// As [`stationary_spans`], with the distance integrated from the track's
/// per-fix speed over each region.
pub fn per_sample_speed_spans(
    gamma: &DivergenceMatrix,
    timing: &WindowTiming,
    track: &RelativeTrack,
    c_th: f64,
    rule: SpanRule,
) -> Result<Vec<StationarySpan>> {
    check_inputs(gamma, timing, c_th)?;
    Ok(spans_with(gamma, timing, c_th, rule, |a, b| {
        track.speed_integral(a, b)
    }))
}
