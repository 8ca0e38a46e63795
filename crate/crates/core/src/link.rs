//! MRC combining, per-snapshot spectral efficiency and the max-normalized
//! received power trace.

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::RelativeTrack;
use crate::tensor::CsiView;
use crate::transforms::{power_db, UnitaryDft};

pub const DEFAULT_DECIMATION: usize = 100;

/// Fraction of trailing delay bins treated as noise-only.
pub const TAIL_FRACTION: f64 = 0.1;

/// Post-combining power gain `sum |h_n|^2` with weights `w_n = conj(h_n)`.
pub fn mrc_combine(h: &[Complex64]) -> f64 {
    h.iter().map(|x| x.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Linear noise power per subcarrier.
    Fixed(f64),
    /// Mean power of the last 10% of delay bins, averaged over snapshots.
    TailOfPdp,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Fixed(p) if !(p > 0.0 && p.is_finite()) => {
                Err(Error::range("noise power", p))
            }
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "tail" {
            return Ok(Self::TailOfPdp);
        }
        let p: f64 = s
            .strip_prefix("fixed:")
            .unwrap_or(s)
            .parse()
            .map_err(|_| format!("unknown noise model {s:?} (tail|fixed:<linear>)"))?;
        if p > 0.0 && p.is_finite() {
            Ok(Self::Fixed(p))
        } else {
            Err(format!("noise power must be positive, got {p}"))
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::Fixed(p) => write!(f, "fixed:{p}"),
            NoiseModel::TailOfPdp => f.write_str("tail"),
        }
    }
}

/// `(1/F) sum_f log2(1 + g_f / noise)` for per-subcarrier MRC gains `g_f`.
pub fn se_from_gains(gains: &[f64], noise_power: f64) -> f64 {
    if gains.is_empty() {
        return 0.0;
    }
    gains.iter().map(|g| (g / noise_power).ln_1p()).sum::<f64>()
        / (gains.len() as f64 * std::f64::consts::LN_2)
}

/// Spectral efficiency of snapshot `t` of `view`, bit/s/Hz.
pub fn spectral_efficiency(view: &CsiView<'_>, noise_power: f64, t: usize) -> Result<f64> {
    if t >= view.n_time() {
        return Err(Error::Index(format!(
            "snapshot {t} outside {} samples",
            view.n_time()
        )));
    }
    if !(noise_power > 0.0 && noise_power.is_finite()) {
        return Err(Error::range("noise power", noise_power));
    }
    Ok(se_from_gains(
        &snapshot_mrc_gains(view.snapshot(t), view.n_ant(), view.n_sub()),
        noise_power,
    ))
}

fn snapshot_mrc_gains(snap: &[Complex32], n_ant: usize, n_sub: usize) -> Vec<f64> {
    let mut gains = vec![0.0; n_sub];
    for row in snap.chunks_exact(n_sub).take(n_ant) {
        for (g, h) in gains.iter_mut().zip(row) {
            *g += (h.re as f64).powi(2) + (h.im as f64).powi(2);
        }
    }
    gains
}

/// Antenna-mean power of the trailing `TAIL_FRACTION` of CIR bins.
fn snapshot_tail_noise(snap: &[Complex32], n_sub: usize, dft: &UnitaryDft) -> f64 {
    let tail = ((n_sub as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n_sub);
    let mut buf = vec![Complex64::default(); n_sub];
    let mut scratch = dft.scratch();
    let mut acc = 0.0;
    let mut n_ant = 0;
    for row in snap.chunks_exact(n_sub) {
        for (b, h) in buf.iter_mut().zip(row) {
            *b = Complex64::new(h.re as f64, h.im as f64);
        }
        dft.inverse(&mut buf, &mut scratch);
        acc += buf[n_sub - tail..].iter().map(|c| c.norm_sqr()).sum::<f64>() / tail as f64;
        n_ant += 1;
    }
    acc / n_ant as f64
}

/// Per-subcarrier MRC gains and tail noise estimate of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGains {
    /// Absolute sample index.
    pub sample: usize,
    pub gains: Vec<f64>,
    pub tail_noise: f64,
}

impl SnapshotGains {
    /// Subcarrier-mean combined power.
    pub fn received_power(&self) -> f64 {
        self.gains.iter().sum::<f64>() / self.gains.len().max(1) as f64
    }
}

/// Gains for every local snapshot `t` of `view` with absolute index a
/// multiple of `decimation`.
pub fn snapshot_gains(view: &CsiView<'_>, decimation: usize) -> Result<Vec<SnapshotGains>> {
    if decimation == 0 {
        return Err(Error::DegenerateInput("decimation must be at least 1".into()));
    }
    let first = view.first_sample();
    let start = (decimation - first % decimation) % decimation;
    let (n_ant, n_sub) = (view.n_ant(), view.n_sub());
    let dft = UnitaryDft::new(n_sub);
    Ok((start..view.n_time())
        .step_by(decimation)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            let snap = view.snapshot(t);
            SnapshotGains {
                sample: first + t,
                gains: snapshot_mrc_gains(snap, n_ant, n_sub),
                tail_noise: snapshot_tail_noise(snap, n_sub, &dft),
            }
        })
        .collect())
}

/// Resolves the noise model to a linear power.
pub fn resolve_noise(noise: NoiseModel, gains: &[SnapshotGains]) -> Result<f64> {
    noise.validate()?;
    match noise {
        NoiseModel::Fixed(p) => Ok(p),
        NoiseModel::TailOfPdp => {
            if gains.is_empty() {
                return Err(Error::DegenerateInput("no snapshots for noise estimate".into()));
            }
            let p = gains.iter().map(|g| g.tail_noise).sum::<f64>() / gains.len() as f64;
            if p > 0.0 && p.is_finite() {
                Ok(p)
            } else {
                Err(Error::DegenerateInput(
                    "tail-of-PDP noise estimate is zero; set a fixed noise power".into(),
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SePoint {
    pub t: f64,
    pub dist3d: Option<f64>,
    pub se: f64,
    pub max_norm_power_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeSeries {
    pub noise: NoiseModel,
    pub noise_power: f64,
    pub points: Vec<SePoint>,
}

impl SeSeries {
    pub fn se_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.se).collect()
    }
}

/// SE and max-normalized power per snapshot, sampled at `sample * dt`.
pub fn se_from_snapshots(
    gains: &[SnapshotGains],
    track: Option<&RelativeTrack>,
    noise: NoiseModel,
    dt: f64,
) -> Result<SeSeries> {
    let noise_power = resolve_noise(noise, gains)?;
    let pmax = gains
        .iter()
        .map(SnapshotGains::received_power)
        .fold(0.0, f64::max);
    let points = gains
        .iter()
        .map(|g| {
            let t = g.sample as f64 * dt;
            let p = g.received_power();
            SePoint {
                t,
                dist3d: track.map(|tr| tr.nearest(t).dist3d),
                se: se_from_gains(&g.gains, noise_power),
                max_norm_power_db: if pmax > 0.0 {
                    power_db(p / pmax)
                } else {
                    f64::NEG_INFINITY
                },
            }
        })
        .collect();
    Ok(SeSeries {
        noise,
        noise_power,
        points,
    })
}

pub fn se_series(
    view: &CsiView<'_>,
    track: Option<&RelativeTrack>,
    noise: NoiseModel,
    decimation: usize,
) -> Result<SeSeries> {
    let gains = snapshot_gains(view, decimation)?;
    se_from_snapshots(&gains, track, noise, view.meta().dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{CsiMeta, CsiTensor, Dims};

    #[test]
    fn mrc_trivial_cases() {
        let mut h = vec![Complex64::default(); 64];
        h[0] = Complex64::new(1.0, 0.0);
        assert_eq!(mrc_combine(&h), 1.0);
        let eq: Vec<_> = (0..64).map(|k| Complex64::from_polar(0.5, k as f64)).collect();
        assert!((mrc_combine(&eq) - 64.0 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn unit_snr_single_antenna() {
        let t = CsiTensor::from_fn(Dims::new(1, 1, 8), CsiMeta::reference(), |_, _, f| {
            Complex32::from_polar(2.0, f as f32)
        })
        .unwrap();
        let se = spectral_efficiency(&t.view(), 4.0, 0).unwrap();
        assert!((se - 1.0).abs() < 1e-6);
        assert!(spectral_efficiency(&t.view(), 4.0, 1).is_err());
        assert!(spectral_efficiency(&t.view(), 0.0, 0).is_err());
    }

    #[test]
    fn null_channel_zero_se() {
        let t = CsiTensor::from_fn(Dims::new(2, 4, 8), CsiMeta::reference(), |_, _, _| {
            Complex32::default()
        })
        .unwrap();
        assert_eq!(spectral_efficiency(&t.view(), 1.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn noise_model_parsing() {
        assert_eq!("tail".parse::<NoiseModel>().unwrap(), NoiseModel::TailOfPdp);
        assert_eq!("fixed:0.5".parse::<NoiseModel>().unwrap(), NoiseModel::Fixed(0.5));
        assert_eq!("2".parse::<NoiseModel>().unwrap(), NoiseModel::Fixed(2.0));
        assert!("fixed:-1".parse::<NoiseModel>().is_err());
        assert_eq!(NoiseModel::Fixed(0.5).to_string(), "fixed:0.5");
    }

    #[test]
    fn decimation_uses_absolute_samples() {
        let t = CsiTensor::from_fn(Dims::new(250, 2, 10), CsiMeta::reference(), |t, _, _| {
            Complex32::new(1.0 + t as f32, 0.0)
        })
        .unwrap();
        let w = t.view().slice_window(30, 200).unwrap();
        let g = snapshot_gains(&w, 100).unwrap();
        assert_eq!(g.iter().map(|g| g.sample).collect::<Vec<_>>(), vec![100, 200]);
        assert!((g[0].gains[0] - 2.0 * 101f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn tail_noise_of_white_profile() {
        // Flat CIR: every delay bin carries |c|^2.
        let n_sub = 20;
        let mut cir = vec![Complex64::new(0.3, -0.4); n_sub];
        let dft = UnitaryDft::new(n_sub);
        let mut scratch = dft.scratch();
        dft.forward(&mut cir, &mut scratch);
        let t = CsiTensor::from_fn(Dims::new(1, 3, n_sub), CsiMeta::reference(), |_, _, f| {
            Complex32::new(cir[f].re as f32, cir[f].im as f32)
        })
        .unwrap();
        let g = snapshot_gains(&t.view(), 1).unwrap();
        assert!((g[0].tail_noise - 0.25).abs() < 1e-6);
        assert!((resolve_noise(NoiseModel::TailOfPdp, &g).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn normalized_power_peaks_at_zero_db() {
        let t = CsiTensor::from_fn(Dims::new(300, 2, 4), CsiMeta::reference(), |t, _, _| {
            Complex32::new((t as f32 / 100.0).max(0.1), 0.0)
        })
        .unwrap();
        let s = se_series(&t.view(), None, NoiseModel::Fixed(1.0), 100).unwrap();
        assert_eq!(s.points.len(), 3);
        assert_eq!(s.points[2].max_norm_power_db, 0.0);
        assert!(s.points[0].max_norm_power_db < s.points[1].max_norm_power_db);
        assert!(s.points[0].se < s.points[1].se);
    }
}
