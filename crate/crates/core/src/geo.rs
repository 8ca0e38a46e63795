//! BS-relative drone geometry and attitude statistics.
//!
//! Positions are projected onto a local east-north-up tangent plane centred
//! on the base-station antenna, using the WGS-84 meridian and prime-vertical
//! radii at the site latitude. Flights stay within a few hundred metres of
//! the array, where the flat-plane error is millimetric.

use crate::error::{Error, Result};
use crate::stats::{gaussian_fit, sample_std, GaussianFit};
use crate::trajectory::TrajectoryLog;

pub const WGS84_A: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

fn wgs84_e2() -> f64 {
    WGS84_F * (2.0 - WGS84_F)
}

/// Base-station placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteConfig {
    pub bs_lat: f64,
    pub bs_lon: f64,
    /// Antenna height above ground, m.
    pub bs_height_agl: f64,
    /// Ground level above sea level, m.
    pub ground_asl: f64,
}

impl SiteConfig {
    pub const DEFAULT_HEIGHT_AGL: f64 = 1.2;
    pub const DEFAULT_GROUND_ASL: f64 = 25.0;

    pub fn new(bs_lat: f64, bs_lon: f64) -> Self {
        Self {
            bs_lat,
            bs_lon,
            bs_height_agl: Self::DEFAULT_HEIGHT_AGL,
            ground_asl: Self::DEFAULT_GROUND_ASL,
        }
    }

    /// Parking-lot site of the reference campaign
    /// (50°51'43.51917" N, 4°41'7.84688" E).
    pub fn reference() -> Self {
        Self::new(
            50.0 + 51.0 / 60.0 + 43.519_17 / 3600.0,
            4.0 + 41.0 / 60.0 + 7.846_88 / 3600.0,
        )
    }

    /// Altitude of the antenna phase centre above sea level.
    pub fn antenna_asl(&self) -> f64 {
        self.ground_asl + self.bs_height_agl
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bs_height_agl >= 0.0) {
            return Err(Error::range("bs_height_agl", self.bs_height_agl));
        }
        if !(self.bs_lat.abs() <= 90.0) {
            return Err(Error::range("bs_lat", self.bs_lat));
        }
        if !(self.bs_lon.abs() <= 180.0) {
            return Err(Error::range("bs_lon", self.bs_lon));
        }
        if !self.ground_asl.is_finite() {
            return Err(Error::range("ground_asl", self.ground_asl));
        }
        Ok(())
    }
}

/// Tangent-plane projection about the antenna phase centre.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    lat0: f64,
    lon0: f64,
    alt0: f64,
    /// Metres per radian of latitude.
    north_scale: f64,
    /// Metres per radian of longitude.
    east_scale: f64,
}

impl LocalFrame {
    pub fn new(site: &SiteConfig) -> Self {
        let phi = site.bs_lat.to_radians();
        let e2 = wgs84_e2();
        let w = 1.0 - e2 * phi.sin().powi(2);
        let meridian = WGS84_A * (1.0 - e2) / w.powf(1.5);
        let prime_vertical = WGS84_A / w.sqrt();
        let alt0 = site.antenna_asl();
        Self {
            lat0: phi,
            lon0: site.bs_lon.to_radians(),
            alt0,
            north_scale: meridian + alt0,
            east_scale: (prime_vertical + alt0) * phi.cos(),
        }
    }

    pub fn to_enu(&self, lat: f64, lon: f64, alt_asl: f64) -> [f64; 3] {
        let mut dlon = lon.to_radians() - self.lon0;
        if dlon > std::f64::consts::PI {
            dlon -= 2.0 * std::f64::consts::PI;
        } else if dlon < -std::f64::consts::PI {
            dlon += 2.0 * std::f64::consts::PI;
        }
        [
            dlon * self.east_scale,
            (lat.to_radians() - self.lat0) * self.north_scale,
            alt_asl - self.alt0,
        ]
    }

    /// Inverse of [`LocalFrame::to_enu`]: returns `(lat, lon, alt_asl)`.
    pub fn from_enu(&self, east: f64, north: f64, up: f64) -> (f64, f64, f64) {
        (
            (self.lat0 + north / self.north_scale).to_degrees(),
            (self.lon0 + east / self.east_scale).to_degrees(),
            up + self.alt0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub east: f64,
    pub north: f64,
    pub up: f64,
    pub dist3d: f64,
    pub horiz_dist: f64,
    /// m/s, non-negative.
    pub speed: f64,
}

impl TrackPoint {
    fn position(&self) -> [f64; 3] {
        [self.east, self.north, self.up]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeTrack {
    points: Vec<TrackPoint>,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl RelativeTrack {
    /// Builds a track from `(t, [east, north, up])` samples with strictly
    /// increasing times. Speeds use central differences, one-sided at the ends.
    pub fn from_positions(samples: &[(f64, [f64; 3])]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "speed needs at least two fixes, got {}",
                samples.len()
            )));
        }
        if let Some(i) = (1..samples.len()).find(|&i| samples[i].0 <= samples[i - 1].0) {
            return Err(Error::Order {
                record: i,
                prev: samples[i - 1].0,
                t: samples[i].0,
            });
        }
        let last = samples.len() - 1;
        let points = samples
            .iter()
            .enumerate()
            .map(|(i, &(t, p))| {
                let (a, b) = match i {
                    0 => (0, 1),
                    _ if i == last => (last - 1, last),
                    _ => (i - 1, i + 1),
                };
                let speed = distance(samples[b].1, samples[a].1) / (samples[b].0 - samples[a].0);
                let horiz = p[0].hypot(p[1]);
                TrackPoint {
                    t,
                    east: p[0],
                    north: p[1],
                    up: p[2],
                    dist3d: horiz.hypot(p[2]),
                    horiz_dist: horiz,
                    speed,
                }
            })
            .collect();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.points.last().unwrap().t - self.points[0].t
    }

    /// Sum of straight segments between consecutive fixes.
    pub fn total_distance(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| distance(w[1].position(), w[0].position()))
            .sum()
    }

    /// Index of the fix whose timestamp is closest to `t` (ties go to the
    /// earlier fix).
    pub fn nearest_index(&self, t: f64) -> usize {
        let idx = self.points.partition_point(|p| p.t < t);
        if idx == 0 {
            0
        } else if idx == self.points.len() || t - self.points[idx - 1].t <= self.points[idx].t - t {
            idx - 1
        } else {
            idx
        }
    }

    pub fn nearest(&self, t: f64) -> &TrackPoint {
        &self.points[self.nearest_index(t)]
    }

    /// Distance covered over `[a, b]` with each fix's speed held until the
    /// next fix (first and last speeds extend past the ends).
    pub fn speed_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let pts = &self.points;
        let mut total = 0.0;
        for (k, p) in pts.iter().enumerate() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { p.t };
            let hi = pts.get(k + 1).map_or(f64::INFINITY, |q| q.t);
            let (s, e) = (lo.max(a), hi.min(b));
            if e > s {
                total += p.speed * (e - s);
            }
        }
        total
    }
}

pub fn to_relative_track(log: &TrajectoryLog, site: &SiteConfig) -> Result<RelativeTrack> {
    site.validate()?;
    if log.is_empty() {
        return Err(Error::DegenerateInput("empty trajectory log".into()));
    }
    let frame = LocalFrame::new(site);
    let samples: Vec<(f64, [f64; 3])> = log
        .records()
        .iter()
        .map(|r| (r.t, frame.to_enu(r.lat, r.lon, r.alt_asl)))
        .collect();
    RelativeTrack::from_positions(&samples)
}

/// Path length divided by elapsed time.
pub fn average_speed(track: &RelativeTrack) -> Result<f64> {
    if track.len() < 2 {
        return Err(Error::DegenerateInput(
            "average speed needs at least two samples".into(),
        ));
    }
    Ok(track.total_distance() / track.duration())
}

/// Sliding-window attitude fluctuation statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct WobbleStats {
    pub window: usize,
    /// Centre time of each sliding window, s.
    pub t: Vec<f64>,
    pub pitch_sigma: Vec<f64>,
    pub roll_sigma: Vec<f64>,
    pub pitch_fit: GaussianFit,
    pub roll_fit: GaussianFit,
}

/// Number of records spanning one second of log, at least 2.
pub fn default_wobble_window(log: &TrajectoryLog) -> usize {
    match log.median_interval() {
        Some(dt) if dt > 0.0 => ((1.0 / dt).round() as usize).max(2),
        _ => 2,
    }
}

pub fn wobble_stats(log: &TrajectoryLog, window: usize) -> Result<WobbleStats> {
    if window < 2 || log.len() < window {
        return Err(Error::DegenerateInput(format!(
            "wobble window {window} needs 2 <= window <= {} records",
            log.len()
        )));
    }
    let rec = log.records();
    let pitch: Vec<f64> = rec.iter().map(|r| r.pitch).collect();
    let roll: Vec<f64> = rec.iter().map(|r| r.roll).collect();
    let count = rec.len() - window + 1;
    let mut t = Vec::with_capacity(count);
    let mut pitch_sigma = Vec::with_capacity(count);
    let mut roll_sigma = Vec::with_capacity(count);
    for s in 0..count {
        t.push(0.5 * (rec[s].t + rec[s + window - 1].t));
        pitch_sigma.push(sample_std(&pitch[s..s + window]));
        roll_sigma.push(sample_std(&roll[s..s + window]));
    }
    Ok(WobbleStats {
        window,
        t,
        pitch_sigma,
        roll_sigma,
        pitch_fit: fluctuation_fit(&pitch, window),
        roll_fit: fluctuation_fit(&roll, window),
    })
}

/// Gaussian fit of deviations from per-block means over non-overlapping
/// blocks of `window` records; sigma uses the pooled within-block variance.
fn fluctuation_fit(xs: &[f64], window: usize) -> GaussianFit {
    let mut dev = Vec::with_capacity(xs.len());
    let mut blocks = 0usize;
    for block in xs.chunks(window).filter(|b| b.len() >= 2) {
        let m = block.iter().sum::<f64>() / block.len() as f64;
        dev.extend(block.iter().map(|x| x - m));
        blocks += 1;
    }
    let fit = gaussian_fit(&dev);
    let dof = dev.len().saturating_sub(blocks).max(1);
    let ss: f64 = dev.iter().map(|d| d * d).sum();
    GaussianFit {
        mu: fit.mu,
        sigma: (ss / dof as f64).sqrt(),
    }
}
