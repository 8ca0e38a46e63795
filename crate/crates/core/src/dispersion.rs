//! Delay dispersion: mean delay, integrated power and RMS delay spread of
//! averaged PDPs, plus empirical CDF summaries.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::RelativeTrack;
use crate::stats::{gaussian_fit, mean, sample_std, GaussianFit};
use crate::tensor::CsiView;
use crate::transforms::{averaged_pdps, AveragedPdp, DelayWindow};

pub const DEFAULT_GATE_DB: f64 = 20.0;

/// Zeroth, first and central second moments of one PDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayMoments {
    /// Mean delay `T_m`, s.
    pub mean_delay: f64,
    /// Integrated power `P_m`, linear.
    pub power: f64,
    /// RMS delay spread `S_tau`, s.
    pub rms_spread: f64,
}

/// Moments of `pdp` with bin `k` at delay `k * delay_resolution`.
///
/// Moments are accumulated relative to the first positive bin and the
/// second moment is taken about the mean, so a single tap gives exactly zero
/// spread and the radicand is never negative.
pub fn rms_delay_spread(pdp: &[f64], delay_resolution: f64) -> Result<DelayMoments> {
    if let Some(&bad) = pdp.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::range("PDP bin power", bad));
    }
    let first = pdp.iter().position(|&p| p > 0.0).ok_or(Error::NullProfile)?;
    let bins = &pdp[first..];
    let power: f64 = bins.iter().sum();
    let m1 = bins
        .iter()
        .enumerate()
        .map(|(k, p)| p * k as f64)
        .sum::<f64>()
        / power;
    let m2 = bins
        .iter()
        .enumerate()
        .map(|(k, p)| p * (k as f64 - m1).powi(2))
        .sum::<f64>()
        / power;
    Ok(DelayMoments {
        mean_delay: (first as f64 + m1) * delay_resolution,
        power,
        rms_spread: m2.sqrt() * delay_resolution,
    })
}

/// Zeroes every bin more than `gate_db` below the profile peak.
pub fn gate_pdp(pdp: &[f64], gate_db: f64) -> Vec<f64> {
    let peak = pdp.iter().copied().fold(0.0, f64::max);
    let floor = peak * 10f64.powf(-gate_db / 10.0);
    pdp.iter()
        .map(|&p| if p >= floor { p } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySpreadPoint {
    /// Window centre, s.
    pub t: f64,
    pub dist3d: Option<f64>,
    pub mean_delay: f64,
    pub power: f64,
    pub rms_spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpreadSeries {
    pub window: usize,
    pub gate_db: f64,
    pub points: Vec<DelaySpreadPoint>,
}

impl DelaySpreadSeries {
    pub fn rms_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rms_spread).collect()
    }
}

/// Centre time of a window starting at absolute sample `first_sample`.
pub fn window_centre(first_sample: usize, window: usize, dt: f64) -> f64 {
    (first_sample as f64 + window as f64 / 2.0) * dt
}

/// RMS delay spread per averaged PDP, gated at `gate_db` below each window's
/// peak, with the 3D distance of the nearest track fix at the window centre.
pub fn delay_spread_from_pdps(
    pdps: &[AveragedPdp],
    track: Option<&RelativeTrack>,
    gate_db: f64,
    dt: f64,
) -> Result<DelaySpreadSeries> {
    let window = pdps.first().map_or(0, |p| p.window);
    let points = pdps
        .iter()
        .map(|pdp| {
            let gated = gate_pdp(&pdp.power, gate_db);
            let m = rms_delay_spread(&gated, pdp.delay_resolution)?;
            let t = window_centre(pdp.first_sample, pdp.window, dt);
            Ok(DelaySpreadPoint {
                t,
                dist3d: track.map(|tr| tr.nearest(t).dist3d),
                mean_delay: m.mean_delay,
                power: m.power,
                rms_spread: m.rms_spread,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DelaySpreadSeries {
        window,
        gate_db,
        points,
    })
}

/// Non-overlapping windows of `w` snapshots across the whole view.
pub fn delay_spread_series(
    view: &CsiView<'_>,
    track: Option<&RelativeTrack>,
    w: usize,
    gate_db: f64,
) -> Result<DelaySpreadSeries> {
    if w == 0 {
        return Err(Error::DegenerateInput("window must be at least 1".into()));
    }
    let pdps = averaged_pdps(view, w, w, DelayWindow::Rectangular)?;
    delay_spread_from_pdps(&pdps, track, gate_db, view.meta().dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfSummary {
    /// Sorted sample values.
    pub values: Vec<f64>,
    /// Plotting positions `(k - 0.5) / n`.
    pub cdf: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub gaussian: GaussianFit,
}

pub fn cdf_summary(values: &[f64]) -> Result<CdfSummary> {
    if values.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "CDF needs at least 2 values, got {}",
            values.len()
        )));
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::range("CDF sample", bad));
    }
    let mut sorted = values.to_vec();
    sorted.par_sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let cdf = (1..=sorted.len()).map(|k| (k as f64 - 0.5) / n).collect();
    Ok(CdfSummary {
        mean: mean(values),
        std: sample_std(values),
        gaussian: gaussian_fit(values),
        values: sorted,
        cdf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tap_has_zero_spread() {
        for k in [0, 1, 17, 99] {
            let mut pdp = vec![0.0; 100];
            pdp[k] = 3.7;
            let m = rms_delay_spread(&pdp, 1.0 / 18e6).unwrap();
            assert_eq!(m.rms_spread, 0.0);
            assert_eq!(m.mean_delay, k as f64 / 18e6);
            assert_eq!(m.power, 3.7);
        }
    }

    #[test]
    fn two_equal_taps() {
        let mut pdp = vec![0.0; 10];
        pdp[0] = 1.0;
        pdp[2] = 1.0;
        let m = rms_delay_spread(&pdp, 50e-9).unwrap();
        assert!((m.mean_delay - 50e-9).abs() < 1e-9 * 50e-9);
        assert!((m.rms_spread - 50e-9).abs() < 1e-9 * 50e-9);
    }

    #[test]
    fn null_and_invalid_profiles() {
        assert!(matches!(
            rms_delay_spread(&[0.0; 8], 1.0),
            Err(Error::NullProfile)
        ));
        assert!(matches!(
            rms_delay_spread(&[1.0, -0.5], 1.0),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn gate_drops_weak_bins() {
        let g = gate_pdp(&[1.0, 0.011, 0.009, 0.5], 20.0);
        assert_eq!(g, vec![1.0, 0.011, 0.0, 0.5]);
    }

    #[test]
    fn cdf_plotting_positions() {
        let s = cdf_summary(&[3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.cdf, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(s.mean, 2.5);
    }

    #[test]
    fn constant_cdf() {
        let s = cdf_summary(&[5.0; 6]).unwrap();
        assert_eq!(s.std, 0.0);
        assert!(s.values.iter().all(|&v| v == 5.0));
        assert!(cdf_summary(&[1.0]).is_err());
    }
}
