//! Streaming analysis of one CSI recording and its flight log.
//!
//! Windows are read in blocks so the full tensor never has to be resident;
//! the Doppler and correlation windows are read separately.

use log::{debug, info, warn};

use crate::csit::CsiReader;
use crate::dispersion::{cdf_summary, delay_spread_from_pdps, CdfSummary, DelaySpreadSeries};
use crate::error::{Error, Result};
use crate::geo::{average_speed, default_wobble_window, to_relative_track, wobble_stats};
use crate::geo::{RelativeTrack, SiteConfig, WobbleStats};
use crate::link::{se_from_snapshots, snapshot_gains, NoiseModel, SeSeries, SnapshotGains};
use crate::spatial::{correlation_matrix_with, element_map, CorrelationMatrix, CorrelationMode};
use crate::spatial::UraLayout;
use crate::stationarity::{divergence_matrix, per_sample_speed_spans, stationary_spans};
use crate::stationarity::{DivergenceMatrix, SpanRule, StationarySpan, WindowTiming};
use crate::tensor::{CsiMeta, CsiTensor, CsiView, Dims};
use crate::trajectory::TrajectoryLog;
use crate::transforms::{
    antenna_mean_ctf, doppler_power, window_pdp_with, window_starts, wavelength, AveragedPdp,
    CtfMean, DelayWindow, DopplerPower, UnitaryDft,
};

/// Speed used to turn stationarity intervals into distances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SpanSpeed {
    /// Path length over duration of the flight log.
    #[default]
    Average,
    /// Per-fix track speed integrated over each interval.
    Track,
    /// Constant speed, m/s.
    Fixed(f64),
}

impl std::str::FromStr for SpanSpeed {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "average" => Ok(Self::Average),
            "track" => Ok(Self::Track),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0 && v.is_finite())
                .map(Self::Fixed)
                .ok_or_else(|| format!("unknown span speed {s:?} (average|track|<m/s>)")),
        }
    }
}

impl std::fmt::Display for SpanSpeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpanSpeed::Average => f.write_str("average"),
            SpanSpeed::Track => f.write_str("track"),
            SpanSpeed::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// PDP averaging window `W`, snapshots.
    pub window: usize,
    pub stride: usize,
    pub gate_db: f64,
    pub c_th: f64,
    pub span_rule: SpanRule,
    pub span_speed: SpanSpeed,
    pub noise: NoiseModel,
    /// SE snapshot spacing.
    pub decimation: usize,
    pub delay_window: DelayWindow,
    pub doppler_t0: usize,
    pub doppler_w: usize,
    pub corr_t0: usize,
    /// Correlation window; defaults to `window`.
    pub corr_w: Option<usize>,
    pub corr_mode: CorrelationMode,
    /// Array grid (rows, cols); defaults to square.
    pub ura: Option<(usize, usize)>,
    /// Element pitch, m; defaults to half a wavelength.
    pub spacing: Option<f64>,
    /// 0-based (row, col) of the map reference element.
    pub reference: (usize, usize),
    pub site: SiteConfig,
    /// Attitude window in log records; defaults to one second.
    pub wobble_window: Option<usize>,
    /// Upper bound on snapshots held per streamed block.
    pub block_samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            window: 100,
            stride: 100,
            gate_db: crate::dispersion::DEFAULT_GATE_DB,
            c_th: crate::stationarity::DEFAULT_THRESHOLD,
            span_rule: SpanRule::ContiguousRun,
            span_speed: SpanSpeed::Average,
            noise: NoiseModel::TailOfPdp,
            decimation: crate::link::DEFAULT_DECIMATION,
            delay_window: DelayWindow::Rectangular,
            doppler_t0: 0,
            doppler_w: 5000,
            corr_t0: 0,
            corr_w: None,
            corr_mode: CorrelationMode::Pooled,
            ura: None,
            spacing: None,
            reference: (4, 4),
            site: SiteConfig::reference(),
            wobble_window: None,
            block_samples: 5000,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::DegenerateInput("window W must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::DegenerateInput("stride must be at least 1".into()));
        }
        if self.decimation == 0 {
            return Err(Error::DegenerateInput("decimation must be at least 1".into()));
        }
        if !(self.c_th > 0.0 && self.c_th.is_finite()) {
            return Err(Error::range("c_th", self.c_th));
        }
        if !(self.gate_db > 0.0) {
            return Err(Error::range("gate_db", self.gate_db));
        }
        if let Some(s) = self.spacing {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::range("element spacing", s));
            }
        }
        if self.doppler_w == 0 {
            return Err(Error::DegenerateInput("Doppler window must be at least 1".into()));
        }
        self.noise.validate()?;
        self.site.validate()
    }

    /// Array geometry for `n_ant` elements, if one is configured or the
    /// count is a perfect square.
    pub fn layout_for(&self, n_ant: usize, f_c: f64) -> Result<Option<UraLayout>> {
        let spacing = self.spacing.unwrap_or_else(|| wavelength(f_c) / 2.0);
        let (rows, cols) = match self.ura {
            Some(rc) => rc,
            None => {
                let r = (n_ant as f64).sqrt().round() as usize;
                if r * r != n_ant {
                    return Ok(None);
                }
                (r, r)
            }
        };
        UraLayout::new(rows, cols, spacing).map(Some)
    }
}

/// Random access to time windows of a recording.
pub trait SampleSource {
    fn dims(&self) -> Dims;
    fn meta(&self) -> CsiMeta;
    fn read(&mut self, t0: usize, w: usize) -> Result<CsiTensor>;
}

impl SampleSource for CsiReader {
    fn dims(&self) -> Dims {
        self.header().dims
    }

    fn meta(&self) -> CsiMeta {
        self.header().meta
    }

    fn read(&mut self, t0: usize, w: usize) -> Result<CsiTensor> {
        self.read_window(t0, w)
    }
}

impl SampleSource for CsiView<'_> {
    fn dims(&self) -> Dims {
        CsiView::dims(self)
    }

    fn meta(&self) -> CsiMeta {
        CsiView::meta(self)
    }

    fn read(&mut self, t0: usize, w: usize) -> Result<CsiTensor> {
        Ok(self.slice_window(t0, w)?.to_tensor())
    }
}

#[derive(Debug, Clone)]
pub struct Spans {
    /// Constant speed used, when not integrating the track.
    pub speed: Option<f64>,
    pub spans: Vec<StationarySpan>,
    pub cdf: Option<CdfSummary>,
}

#[derive(Debug, Clone)]
pub struct Correlation {
    pub matrix: CorrelationMatrix,
    pub layout: Option<UraLayout>,
    /// `|R(ref, .)|` on the array grid.
    pub map: Option<Vec<Vec<f64>>>,
    pub lambda: f64,
}

/// Everything `analyze` derives from one recording.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub dims: Dims,
    pub meta: CsiMeta,
    pub config: AnalysisConfig,
    pub starts: Vec<usize>,
    pub pdps: Vec<AveragedPdp>,
    pub ctf: Vec<CtfMean>,
    pub dispersion: DelaySpreadSeries,
    pub rms_cdf: Option<CdfSummary>,
    pub gamma: DivergenceMatrix,
    pub spans: Option<Spans>,
    pub correlation: Correlation,
    pub doppler: DopplerPower,
    pub se: SeSeries,
    pub track: Option<RelativeTrack>,
    pub wobble: Option<WobbleStats>,
}

impl Analysis {
    pub fn window_time(&self, i: usize) -> f64 {
        crate::dispersion::window_centre(self.starts[i], self.config.window, self.meta.dt)
    }
}

/// Runs every metric over `source`, with an optional aligned flight log.
pub fn analyze(
    source: &mut impl SampleSource,
    flight: Option<&TrajectoryLog>,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    config.validate()?;
    let dims = source.dims();
    let meta = source.meta();
    let w = config.window;
    let starts = window_starts(dims.n_time, w, config.stride);
    if starts.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "window {w} longer than {} samples",
            dims.n_time
        )));
    }

    let track = flight
        .map(|log| to_relative_track(log, &config.site))
        .transpose()
        .map_err(|e| e.in_stage("geo-kinematics", "to_relative_track"))?;
    let wobble = match flight {
        Some(log) => {
            let win = config.wobble_window.unwrap_or_else(|| default_wobble_window(log));
            match wobble_stats(log, win) {
                Ok(s) => Some(s),
                Err(Error::DegenerateInput(msg)) => {
                    warn!("skipping attitude statistics: {msg}");
                    None
                }
                Err(e) => return Err(e.in_stage("geo-kinematics", "wobble_stats")),
            }
        }
        None => None,
    };

    info!("{} windows of {w} snapshots", starts.len());
    let (pdps, ctf, gains) = stream_windows(source, &starts, config)
        .map_err(|e| e.in_stage("channel-transforms", "averaged_pdp"))?;

    let dispersion = delay_spread_from_pdps(&pdps, track.as_ref(), config.gate_db, meta.dt)
        .map_err(|e| e.in_stage("dispersion-metrics", "rms_delay_spread"))?;
    let rms_cdf = (dispersion.points.len() >= 2)
        .then(|| cdf_summary(&dispersion.rms_values()))
        .transpose()
        .map_err(|e| e.in_stage("dispersion-metrics", "cdf_summary"))?;

    let powers: Vec<&[f64]> = pdps.iter().map(|p| p.power.as_slice()).collect();
    let gamma = divergence_matrix(&powers)
        .map_err(|e| e.in_stage("stationarity", "divergence_matrix"))?;
    let timing = WindowTiming::from_samples(&starts, w, meta.dt);
    let spans = span_distances(&gamma, &timing, track.as_ref(), config)
        .map_err(|e| e.in_stage("stationarity", "stationary_spans"))?;

    let correlation = correlate(source, config)
        .map_err(|e| e.in_stage("spatial-correlation", "correlation_matrix"))?;

    let dop_t0 = config.doppler_t0;
    if dop_t0 >= dims.n_time {
        return Err(Error::Index(format!(
            "Doppler window start {dop_t0} outside {} samples",
            dims.n_time
        ))
        .in_stage("channel-transforms", "doppler_functions"));
    }
    let dop_w = config.doppler_w.min(dims.n_time - dop_t0);
    debug!("Doppler window [{dop_t0}, {})", dop_t0 + dop_w);
    let doppler = source
        .read(dop_t0, dop_w)
        .and_then(|block| doppler_power(&block.view(), 0, dop_w))
        .map_err(|e| e.in_stage("channel-transforms", "doppler_functions"))?;

    let se = se_from_snapshots(&gains, track.as_ref(), config.noise, meta.dt)
        .map_err(|e| e.in_stage("link-performance", "se_series"))?;

    Ok(Analysis {
        dims,
        meta,
        config: config.clone(),
        starts,
        pdps,
        ctf,
        dispersion,
        rms_cdf,
        gamma,
        spans,
        correlation,
        doppler,
        se,
        track,
        wobble,
    })
}

type WindowOutputs = (Vec<AveragedPdp>, Vec<CtfMean>, Vec<SnapshotGains>);

/// Per-window PDPs and CTF means plus decimated snapshot gains, reading
/// the recording in blocks of whole windows.
fn stream_windows(
    source: &mut impl SampleSource,
    starts: &[usize],
    config: &AnalysisConfig,
) -> Result<WindowOutputs> {
    use rayon::prelude::*;

    let dims = source.dims();
    let w = config.window;
    let dft = UnitaryDft::new(dims.n_sub);
    let per_block = (config.block_samples.saturating_sub(w) / config.stride + 1).max(1);
    let needed: Vec<usize> = (0..dims.n_time).step_by(config.decimation).collect();
    let mut next = 0;
    let mut pdps = Vec::with_capacity(starts.len());
    let mut ctf = Vec::with_capacity(starts.len());
    let mut gains = Vec::with_capacity(needed.len());

    for chunk in starts.chunks(per_block) {
        let lo = chunk[0];
        let hi = chunk[chunk.len() - 1] + w;
        while next < needed.len() && needed[next] < lo {
            gains.extend(single_snapshot_gains(source, needed[next])?);
            next += 1;
        }
        let block = source.read(lo, hi - lo)?;
        let view = block.view();
        let results: Vec<(AveragedPdp, CtfMean)> = chunk
            .par_iter()
            .map(|&s| {
                let win = view.slice_window(s - lo, w)?;
                Ok((
                    window_pdp_with(&win, config.delay_window, &dft),
                    antenna_mean_ctf(&win),
                ))
            })
            .collect::<Result<_>>()?;
        for (p, c) in results {
            pdps.push(p);
            ctf.push(c);
        }
        let end = needed[next..].partition_point(|&s| s < hi) + next;
        if end > next {
            let first = needed[next] - lo;
            let span = view.slice_window(first, hi - lo - first)?;
            let g = snapshot_gains(&span, config.decimation)?;
            debug_assert!(g.iter().zip(&needed[next..end]).all(|(g, &s)| g.sample == s));
            gains.extend(g);
            next = end;
        }
        debug!("windows up to sample {hi} done");
    }
    while next < needed.len() {
        gains.extend(single_snapshot_gains(source, needed[next])?);
        next += 1;
    }
    Ok((pdps, ctf, gains))
}

fn single_snapshot_gains(source: &mut impl SampleSource, t: usize) -> Result<Vec<SnapshotGains>> {
    let one = source.read(t, 1)?;
    // `snapshot_gains` keys on absolute indices; decimation 1 keeps the sample.
    snapshot_gains(&one.view(), 1)
}

fn span_distances(
    gamma: &DivergenceMatrix,
    timing: &WindowTiming,
    track: Option<&RelativeTrack>,
    config: &AnalysisConfig,
) -> Result<Option<Spans>> {
    let (speed, spans) = match (config.span_speed, track) {
        (SpanSpeed::Fixed(v), _) => (
            Some(v),
            stationary_spans(gamma, timing, v, config.c_th, config.span_rule)?,
        ),
        (SpanSpeed::Average, Some(track)) => {
            let v = average_speed(track)?;
            (
                Some(v),
                stationary_spans(gamma, timing, v, config.c_th, config.span_rule)?,
            )
        }
        (SpanSpeed::Track, Some(track)) => (
            None,
            per_sample_speed_spans(gamma, timing, track, config.c_th, config.span_rule)?,
        ),
        (_, None) => {
            warn!("no flight log and no fixed speed; stationary distances skipped");
            return Ok(None);
        }
    };
    let d: Vec<f64> = spans.iter().map(|s| s.d_sd).collect();
    let cdf = (d.len() >= 2).then(|| cdf_summary(&d)).transpose()?;
    Ok(Some(Spans { speed, spans, cdf }))
}

fn correlate(source: &mut impl SampleSource, config: &AnalysisConfig) -> Result<Correlation> {
    let dims = source.dims();
    let meta = source.meta();
    let t0 = config.corr_t0;
    let w = config.corr_w.unwrap_or(config.window);
    let block = source.read(t0, w)?;
    let matrix = correlation_matrix_with(&block.view(), 0, w, config.corr_mode)?;
    let layout = config.layout_for(dims.n_ant, meta.f_c)?;
    let map = match layout {
        Some(l) if l.len() == dims.n_ant => Some(element_map(&matrix, &l, config.reference)?),
        Some(l) => {
            return Err(Error::Index(format!(
                "{}x{} layout does not describe {} antennas",
                l.rows, l.cols, dims.n_ant
            )))
        }
        None => None,
    };
    Ok(Correlation {
        matrix,
        layout,
        map,
        lambda: wavelength(meta.f_c),
    })
}
