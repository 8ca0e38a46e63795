//! Tapped-delay-line channels and the non-stationary switch.

use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rand::Rng;

use super::{generate, stream_rng, ClarkeProcess, SnapshotSource};
use crate::error::{Error, Result};
use crate::tensor::{CsiMeta, CsiTensor, Dims};
use crate::transforms::{max_doppler, subcarrier_offsets};

/// Time variation of one tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DopplerMode {
    /// Constant gain with a random phase per antenna.
    Static,
    /// Pure frequency shift, Hz.
    Shift(f64),
    /// Independent Clarke fading per antenna at speed `v` m/s.
    Clarke { v: f64 },
}

impl std::str::FromStr for DopplerMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("unknown Doppler mode {s:?} (static|shift:<Hz>|clarke:<m/s>)");
        match s.split_once(':') {
            None if s == "static" => Ok(Self::Static),
            Some(("shift", hz)) => hz.parse().map(Self::Shift).map_err(|_| bad()),
            Some(("clarke", v)) => v.parse().map(|v| Self::Clarke { v }).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for DopplerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DopplerMode::Static => f.write_str("static"),
            DopplerMode::Shift(hz) => write!(f, "shift:{hz}"),
            DopplerMode::Clarke { v } => write!(f, "clarke:{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Delay, s.
    pub delay: f64,
    /// Linear power.
    pub power: f64,
    pub doppler: DopplerMode,
}

impl Tap {
    pub fn new(delay: f64, power: f64, doppler: DopplerMode) -> Self {
        Self {
            delay,
            power,
            doppler,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TapSpec {
    pub taps: Vec<Tap>,
    pub seed: u64,
}

impl TapSpec {
    pub fn new(taps: Vec<Tap>, seed: u64) -> Self {
        Self { taps, seed }
    }

    pub fn validate(&self, n_sub: usize, bw: f64) -> Result<()> {
        if self.taps.is_empty() {
            return Err(Error::Spec("tap list is empty".into()));
        }
        let span = n_sub as f64 / bw;
        for tap in &self.taps {
            if !(tap.delay >= 0.0 && tap.delay < span) {
                return Err(Error::range("tap delay", tap.delay));
            }
            if !(tap.power > 0.0 && tap.power.is_finite()) {
                return Err(Error::range("tap power", tap.power));
            }
            match tap.doppler {
                DopplerMode::Shift(hz) if !hz.is_finite() => {
                    return Err(Error::range("Doppler shift", hz))
                }
                DopplerMode::Clarke { v } if !(v >= 0.0 && v.is_finite()) => {
                    return Err(Error::range("Clarke speed", v))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.power).sum()
    }

    /// `delay_ns:power:doppler` entries separated by `;`.
    pub fn parse_taps(text: &str) -> std::result::Result<Vec<Tap>, String> {
        text.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|entry| {
                let mut parts = entry.splitn(3, ':');
                let delay = parts
                    .next()
                    .and_then(|d| parse_delay(d.trim()))
                    .ok_or_else(|| format!("bad tap delay in {entry:?}"))?;
                let power: f64 = parts
                    .next()
                    .and_then(|p| p.trim().parse().ok())
                    .ok_or_else(|| format!("bad tap power in {entry:?}"))?;
                let doppler = parts.next().map_or(Ok(DopplerMode::Static), |d| d.trim().parse())?;
                Ok(Tap::new(delay, power, doppler))
            })
            .collect()
    }

    pub fn format_taps(taps: &[Tap]) -> String {
        taps.iter()
            .map(|t| format!("{}:{}:{}", format_delay(t.delay), t.power, t.doppler))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Nanoseconds, or seconds with an `s` suffix.
fn parse_delay(s: &str) -> Option<f64> {
    match s.strip_suffix('s') {
        Some(secs) => secs.parse().ok(),
        None => s.parse::<f64>().ok().map(|ns| ns / 1e9),
    }
}

fn format_delay(delay: f64) -> String {
    let ns = delay * 1e9;
    if ns / 1e9 == delay {
        ns.to_string()
    } else {
        format!("{delay:e}s")
    }
}

#[derive(Debug, Clone)]
enum Modulation {
    Phase(Complex64),
    Shift { omega: f64, phase: f64 },
    Clarke(ClarkeProcess),
}

impl Modulation {
    fn at(&self, t: f64) -> Complex64 {
        match self {
            Modulation::Phase(c) => *c,
            Modulation::Shift { omega, phase } => Complex64::cis(omega * t + phase),
            Modulation::Clarke(p) => p.at(t),
        }
    }
}

/// `H(t, n, f) = sum_k sqrt(p_k) a_k(t, n) exp(-j 2 pi f tau_k)`.
#[derive(Debug, Clone)]
pub struct TappedDelay {
    dims: Dims,
    meta: CsiMeta,
    /// `sqrt(p_k) exp(-j 2 pi f tau_k)`, tap-major.
    steering: Vec<Complex64>,
    /// Tap-major, antenna-minor.
    modulation: Vec<Modulation>,
}

impl TappedDelay {
    pub fn new(spec: &TapSpec, dims: Dims, meta: CsiMeta) -> Result<Self> {
        dims.validate()?;
        meta.validate()?;
        spec.validate(dims.n_sub, meta.bw)?;
        let offsets = subcarrier_offsets(dims.n_sub, meta.bw);
        let mut steering = Vec::with_capacity(spec.taps.len() * dims.n_sub);
        let mut modulation = Vec::with_capacity(spec.taps.len() * dims.n_ant);
        for (k, tap) in spec.taps.iter().enumerate() {
            let amp = tap.power.sqrt();
            steering.extend(
                offsets
                    .iter()
                    .map(|f| Complex64::from_polar(amp, -2.0 * PI * f * tap.delay)),
            );
            let f_d = match tap.doppler {
                DopplerMode::Clarke { v } => max_doppler(v, meta.f_c)?,
                _ => 0.0,
            };
            for n in 0..dims.n_ant {
                let mut rng = stream_rng(spec.seed, (k * dims.n_ant + n) as u64);
                let phase = rng.random::<f64>() * 2.0 * PI;
                modulation.push(match tap.doppler {
                    DopplerMode::Static => Modulation::Phase(Complex64::cis(phase)),
                    DopplerMode::Shift(hz) => Modulation::Shift {
                        omega: 2.0 * PI * hz,
                        phase,
                    },
                    DopplerMode::Clarke { .. } => {
                        Modulation::Clarke(ClarkeProcess::new(f_d, &mut rng))
                    }
                });
            }
        }
        Ok(Self {
            dims,
            meta,
            steering,
            modulation,
        })
    }
}

impl SnapshotSource for TappedDelay {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn meta(&self) -> CsiMeta {
        self.meta
    }

    fn fill(&self, t: usize, out: &mut [Complex32]) {
        let (n_ant, n_sub) = (self.dims.n_ant, self.dims.n_sub);
        let time = t as f64 * self.meta.dt;
        let mut acc = vec![Complex64::default(); n_sub];
        for (n, row) in out.chunks_exact_mut(n_sub).enumerate() {
            acc.iter_mut().for_each(|a| *a = Complex64::default());
            for (k, steer) in self.steering.chunks_exact(n_sub).enumerate() {
                let a = self.modulation[k * n_ant + n].at(time);
                for (x, s) in acc.iter_mut().zip(steer) {
                    *x += a * s;
                }
            }
            for (o, x) in row.iter_mut().zip(&acc) {
                *o = Complex32::new(x.re as f32, x.im as f32);
            }
        }
    }
}

pub fn gen_tapped_delay(spec: &TapSpec, dims: Dims, meta: CsiMeta) -> Result<CsiTensor> {
    generate(&TappedDelay::new(spec, dims, meta)?)
}

/// Channel `a` before sample `switch_at`, channel `b` from it on.
#[derive(Debug, Clone)]
pub struct SwitchSource {
    a: TappedDelay,
    b: TappedDelay,
    switch_at: usize,
}

impl SwitchSource {
    pub fn new(a: &TapSpec, b: &TapSpec, switch_at: usize, dims: Dims, meta: CsiMeta) -> Result<Self> {
        if switch_at > dims.n_time {
            return Err(Error::Index(format!(
                "switch at {switch_at} outside {} samples",
                dims.n_time
            )));
        }
        Ok(Self {
            a: TappedDelay::new(a, dims, meta)?,
            b: TappedDelay::new(b, dims, meta)?,
            switch_at,
        })
    }
}

impl SnapshotSource for SwitchSource {
    fn dims(&self) -> Dims {
        self.a.dims
    }

    fn meta(&self) -> CsiMeta {
        self.a.meta
    }

    fn fill(&self, t: usize, out: &mut [Complex32]) {
        if t < self.switch_at {
            self.a.fill(t, out)
        } else {
            self.b.fill(t, out)
        }
    }
}

pub fn gen_nonstationary_switch(
    a: &TapSpec,
    b: &TapSpec,
    switch_at: usize,
    dims: Dims,
    meta: CsiMeta,
) -> Result<CsiTensor> {
    generate(&SwitchSource::new(a, b, switch_at, dims, meta)?)
}
