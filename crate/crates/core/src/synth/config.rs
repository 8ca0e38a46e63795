//! `key=value` synthesis specs, `.meta` sidecars and straight-line flight
//! tracks.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, write_streaming, SnapshotSource, SpatialMode, SpatialSource, SpatialSpec};
use super::{SwitchSource, TapSpec, TappedDelay};
use crate::error::{Error, Result};
use crate::geo::{LocalFrame, SiteConfig};
use crate::kv::KvMap;
use crate::spatial::UraLayout;
use crate::tensor::{CsiMeta, Dims};
use crate::trajectory::{write_trajectory, TrajectoryLog, TrajectoryRecord};
use crate::transforms::wavelength;

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "n_time",
    "n_ant",
    "n_sub",
    "dt",
    "f_c",
    "bw",
    "seed",
    "taps",
    "taps_b",
    "switch_at",
    "spatial",
    "ura_rows",
    "ura_cols",
    "spacing_m",
    "trajectory",
    "start_enu",
    "speed_mps",
    "heading_deg",
    "climb_mps",
    "traj_dt",
    "wobble_deg",
    "bs_lat",
    "bs_lon",
    "bs_height_agl",
    "ground_asl",
];

/// Sidecar path: same basename, `.meta` suffix.
pub fn meta_path(csit: &Path) -> PathBuf {
    csit.with_extension("meta")
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthKind {
    Taps(TapSpec),
    Switch {
        a: TapSpec,
        b: TapSpec,
        switch_at: usize,
    },
    Spatial(SpatialSpec),
}

/// Constant-velocity flight with optional Gaussian attitude wobble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTrajectory {
    /// Start position in the local ENU frame, m.
    pub start: [f64; 3],
    /// Horizontal speed, m/s.
    pub speed: f64,
    /// Course clockwise from north, degrees.
    pub heading: f64,
    /// Vertical speed, m/s.
    pub climb: f64,
    /// Fix interval, s.
    pub dt: f64,
    /// Standard deviation of pitch and roll, degrees.
    pub wobble: f64,
}

impl Default for LineTrajectory {
    fn default() -> Self {
        Self {
            start: [30.0, 0.0, 20.0],
            speed: 3.0,
            heading: 0.0,
            climb: 0.0,
            dt: 0.1,
            wobble: 0.0,
        }
    }
}

impl LineTrajectory {
    /// 3D speed, m/s.
    pub fn speed_3d(&self) -> f64 {
        self.speed.hypot(self.climb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::range("traj_dt", self.dt));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::range("speed_mps", self.speed));
        }
        if !(self.wobble >= 0.0 && self.wobble.is_finite()) {
            return Err(Error::range("wobble_deg", self.wobble));
        }
        if !self.climb.is_finite() || !self.heading.is_finite() {
            return Err(Error::Spec("climb and heading must be finite".into()));
        }
        if self.start.iter().any(|x| !x.is_finite()) {
            return Err(Error::Spec("start position must be finite".into()));
        }
        Ok(())
    }
}

/// Samples the line every `dt` seconds over `[0, duration]`.
pub fn line_trajectory(
    line: &LineTrajectory,
    site: &SiteConfig,
    duration: f64,
    seed: u64,
) -> Result<TrajectoryLog> {
    line.validate()?;
    site.validate()?;
    let frame = LocalFrame::new(site);
    let (s, c) = line.heading.to_radians().sin_cos();
    let n = (duration / line.dt).round() as usize + 1;
    let mut rng = stream_rng(seed, u64::MAX);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
        if line.wobble > 0.0 {
            (line.wobble * rng.sample::<f64, _>(StandardNormal)).clamp(-89.0, 89.0)
        } else {
            0.0
        }
    };
    let yaw = line.heading.rem_euclid(360.0);
    let yaw = if yaw > 180.0 { yaw - 360.0 } else { yaw };
    let records = (0..n)
        .map(|i| {
            let t = i as f64 * line.dt;
            let (lat, lon, alt_asl) = frame.from_enu(
                line.start[0] + line.speed * s * t,
                line.start[1] + line.speed * c * t,
                line.start[2] + line.climb * t,
            );
            TrajectoryRecord {
                t,
                lat,
                lon,
                alt_asl,
                pitch: draw(&mut rng),
                roll: draw(&mut rng),
                yaw,
            }
        })
        .collect();
    TrajectoryLog::new(records)
}

/// A parsed synthesis spec.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub kind: SynthKind,
    pub dims: Dims,
    pub meta: CsiMeta,
    pub seed: u64,
    pub trajectory: Option<LineTrajectory>,
    pub site: SiteConfig,
}

fn parse_triple(s: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Spec(format!("expected e,n,u, got {s:?}")))?;
    <[f64; 3]>::try_from(v).map_err(|_| Error::Spec(format!("expected e,n,u, got {s:?}")))
}

fn default_grid(n_ant: usize) -> (usize, usize) {
    let r = (n_ant as f64).sqrt().round() as usize;
    if r * r == n_ant {
        (r, r)
    } else {
        (1, n_ant)
    }
}

impl SynthConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KvMap::parse(text)?)
    }

    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        if let Some(key) = kv.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(Error::Spec(format!("unknown synthesis key {key:?}")));
        }
        let defaults = Dims::reference();
        let dims = Dims::new(
            kv.parse_or("n_time", 10_000)?,
            kv.parse_or("n_ant", defaults.n_ant)?,
            kv.parse_or("n_sub", defaults.n_sub)?,
        );
        dims.validate()?;
        let p = CsiMeta::reference();
        let meta = CsiMeta::new(
            kv.parse_or("dt", p.dt)?,
            kv.parse_or("f_c", p.f_c)?,
            kv.parse_or("bw", p.bw)?,
        );
        meta.validate()?;
        let seed = kv.parse_or("seed", 0u64)?;
        let taps = |key: &str, seed: u64| -> Result<TapSpec> {
            let text = kv
                .get(key)
                .ok_or_else(|| Error::Spec(format!("missing {key}")))?;
            let spec = TapSpec::new(TapSpec::parse_taps(text).map_err(Error::Spec)?, seed);
            spec.validate(dims.n_sub, meta.bw)?;
            Ok(spec)
        };
        let kind = match kv.get("kind").unwrap_or("taps") {
            "taps" => SynthKind::Taps(taps("taps", seed)?),
            "switch" => SynthKind::Switch {
                a: taps("taps", seed)?,
                b: taps("taps_b", seed.wrapping_add(1))?,
                switch_at: kv
                    .parse_opt("switch_at")?
                    .ok_or_else(|| Error::Spec("missing switch_at".into()))?,
            },
            "spatial" => {
                let (r, c) = default_grid(dims.n_ant);
                let spacing = kv.parse_or("spacing_m", wavelength(meta.f_c) / 2.0)?;
                let mode: SpatialMode = kv.parse_or("spatial", SpatialMode::Jakes)?;
                SynthKind::Spatial(SpatialSpec {
                    mode,
                    layout: UraLayout::new(
                        kv.parse_or("ura_rows", r)?,
                        kv.parse_or("ura_cols", c)?,
                        spacing,
                    )?,
                    seed,
                })
            }
            other => return Err(Error::Spec(format!("unknown kind {other:?} (taps|switch|spatial)"))),
        };
        let reference = SiteConfig::reference();
        let site = SiteConfig {
            bs_lat: kv.parse_or("bs_lat", reference.bs_lat)?,
            bs_lon: kv.parse_or("bs_lon", reference.bs_lon)?,
            bs_height_agl: kv.parse_or("bs_height_agl", reference.bs_height_agl)?,
            ground_asl: kv.parse_or("ground_asl", reference.ground_asl)?,
        };
        site.validate()?;
        let trajectory = match kv.get("trajectory").unwrap_or("none") {
            "none" => None,
            "line" => {
                let d = LineTrajectory::default();
                let line = LineTrajectory {
                    start: kv.get("start_enu").map_or(Ok(d.start), parse_triple)?,
                    speed: kv.parse_or("speed_mps", d.speed)?,
                    heading: kv.parse_or("heading_deg", d.heading)?,
                    climb: kv.parse_or("climb_mps", d.climb)?,
                    dt: kv.parse_or("traj_dt", d.dt)?,
                    wobble: kv.parse_or("wobble_deg", d.wobble)?,
                };
                line.validate()?;
                Some(line)
            }
            other => return Err(Error::Spec(format!("unknown trajectory {other:?} (none|line)"))),
        };
        let cfg = Self {
            kind,
            dims,
            meta,
            seed,
            trajectory,
            site,
        };
        cfg.source()?;
        Ok(cfg)
    }

    /// Canonical form: every effective setting, defaults included.
    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::new();
        kv.insert("n_time", self.dims.n_time);
        kv.insert("n_ant", self.dims.n_ant);
        kv.insert("n_sub", self.dims.n_sub);
        kv.insert("dt", self.meta.dt);
        kv.insert("f_c", self.meta.f_c);
        kv.insert("bw", self.meta.bw);
        kv.insert("seed", self.seed);
        match &self.kind {
            SynthKind::Taps(spec) => {
                kv.insert("kind", "taps");
                kv.insert("taps", TapSpec::format_taps(&spec.taps));
            }
            SynthKind::Switch { a, b, switch_at } => {
                kv.insert("kind", "switch");
                kv.insert("taps", TapSpec::format_taps(&a.taps));
                kv.insert("taps_b", TapSpec::format_taps(&b.taps));
                kv.insert("switch_at", switch_at);
            }
            SynthKind::Spatial(spec) => {
                kv.insert("kind", "spatial");
                kv.insert("spatial", spec.mode);
                kv.insert("ura_rows", spec.layout.rows);
                kv.insert("ura_cols", spec.layout.cols);
                kv.insert("spacing_m", spec.layout.spacing);
            }
        }
        kv.insert("bs_lat", self.site.bs_lat);
        kv.insert("bs_lon", self.site.bs_lon);
        kv.insert("bs_height_agl", self.site.bs_height_agl);
        kv.insert("ground_asl", self.site.ground_asl);
        match &self.trajectory {
            None => kv.insert("trajectory", "none"),
            Some(line) => {
                kv.insert("trajectory", "line");
                kv.insert(
                    "start_enu",
                    format!("{},{},{}", line.start[0], line.start[1], line.start[2]),
                );
                kv.insert("speed_mps", line.speed);
                kv.insert("heading_deg", line.heading);
                kv.insert("climb_mps", line.climb);
                kv.insert("traj_dt", line.dt);
                kv.insert("wobble_deg", line.wobble);
            }
        }
        kv
    }

    pub fn source(&self) -> Result<Box<dyn SnapshotSource>> {
        Ok(match &self.kind {
            SynthKind::Taps(spec) => Box::new(TappedDelay::new(spec, self.dims, self.meta)?),
            SynthKind::Switch { a, b, switch_at } => Box::new(SwitchSource::new(
                a, b, *switch_at, self.dims, self.meta,
            )?),
            SynthKind::Spatial(spec) => Box::new(SpatialSource::new(spec, self.dims, self.meta)?),
        })
    }

    pub fn flight(&self) -> Result<Option<TrajectoryLog>> {
        self.trajectory
            .as_ref()
            .map(|line| {
                let duration = (self.dims.n_time as f64 - 1.0) * self.meta.dt;
                line_trajectory(line, &self.site, duration, self.seed)
            })
            .transpose()
    }

    /// Writes `<csit>`, its `.meta` sidecar and, when a flight is
    /// configured, `<stem>_traj.csv`. Returns the paths written.
    pub fn write(&self, csit: &Path) -> Result<Vec<PathBuf>> {
        let source = self.source()?;
        write_streaming(source.as_ref(), csit)?;
        let meta = meta_path(csit);
        let mut sidecar = String::from(concat!(
            "# generator=csi-prism ",
            env!("CARGO_PKG_VERSION"),
            "\n"
        ));
        sidecar.push_str(&self.to_kv().to_text());
        std::fs::write(&meta, sidecar).map_err(|e| Error::io(&meta, e))?;
        let mut written = vec![csit.to_path_buf(), meta];
        if let Some(log) = self.flight()? {
            let stem = csit
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let path = csit.with_file_name(format!("{stem}_traj.csv"));
            write_trajectory(&path, &log)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::to_relative_track;

    #[test]
    fn canonical_round_trip() {
        let cfg = SynthConfig::parse(
            "kind=switch\nn_time=200\nn_ant=4\nn_sub=16\nbw=20e6\nseed=9\n\
             taps=0:1\ntaps_b=100:1:shift:3\nswitch_at=120\ntrajectory=line\nspeed_mps=2\n",
        )
        .unwrap();
        let again = SynthConfig::from_kv(&cfg.to_kv()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_kv().to_text(), again.to_kv().to_text());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(SynthConfig::parse("taps=0:1\ncolour=red"), Err(Error::Spec(_))));
        assert!(SynthConfig::parse("kind=taps").is_err());
        assert!(SynthConfig::parse("taps=0:1\nkind=wave").is_err());
        assert!(matches!(
            SynthConfig::parse("taps=9000:1"),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            SynthConfig::parse("kind=switch\nn_time=10\ntaps=0:1\ntaps_b=0:1\nswitch_at=11"),
            Err(Error::Index(_))
        ));
        assert!(SynthConfig::parse("kind=spatial\nn_ant=64\nura_rows=4\nura_cols=4").is_err());
    }

    #[test]
    fn line_flight_speed() {
        let line = LineTrajectory {
            speed: 3.0,
            climb: 0.5,
            heading: 60.0,
            ..LineTrajectory::default()
        };
        let site = SiteConfig::reference();
        let log = line_trajectory(&line, &site, 10.0, 1).unwrap();
        assert_eq!(log.len(), 101);
        let track = to_relative_track(&log, &site).unwrap();
        let expect = line.speed_3d() * 10.0;
        assert!((track.total_distance() - expect).abs() < 1e-6, "{}", track.total_distance());
        let p = track.points()[0];
        assert!((p.east - 30.0).abs() < 1e-6 && (p.up - 20.0).abs() < 1e-6);
    }
}
