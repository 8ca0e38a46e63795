//! Channel system functions derived from the raw CTF `H(t, n, f)`.
//!
//! All DFTs are unitary (scaled by `1/sqrt(N)`), so energy is preserved by
//! every transform. The delay axis has `n_sub` bins of width `1/bw`; Doppler
//! axes are fft-shifted with `nu = 0` at index `w / 2`.

use std::sync::Arc;

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{CsiMeta, CsiView, Dims};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Forward/inverse DFT pair of one length with `1/sqrt(N)` scaling.
#[derive(Clone)]
pub struct UnitaryDft {
    len: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl UnitaryDft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            scale: 1.0 / (len as f64).sqrt(),
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        let n = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::default(); n]
    }

    /// `X[k] = N^-1/2 sum_t x[t] exp(-j 2 pi k t / N)`, in place.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        buf.iter_mut().for_each(|x| *x *= self.scale);
    }

    /// `x[t] = N^-1/2 sum_k X[k] exp(+j 2 pi k t / N)`, in place.
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
        buf.iter_mut().for_each(|x| *x *= self.scale);
    }
}

/// Taper applied across subcarriers before the delay transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayWindow {
    #[default]
    Rectangular,
    /// Periodic Hann taper; trades Parseval exactness for lower leakage.
    Hann,
}

impl DelayWindow {
    pub fn weights(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            DelayWindow::Rectangular => None,
            DelayWindow::Hann => Some(
                (0..n)
                    .map(|k| {
                        0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                    })
                    .collect(),
            ),
        }
    }
}

impl std::str::FromStr for DelayWindow {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rect" | "rectangular" => Ok(Self::Rectangular),
            "hann" => Ok(Self::Hann),
            other => Err(format!("unknown delay window {other:?} (rect|hann)")),
        }
    }
}

impl std::fmt::Display for DelayWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DelayWindow::Rectangular => "rect",
            DelayWindow::Hann => "hann",
        })
    }
}

/// Delay-domain channel `h(t, n, tau)`.
#[derive(Debug, Clone)]
pub struct Cir {
    dims: Dims,
    meta: CsiMeta,
    first_sample: usize,
    data: Vec<Complex64>,
}

impl Cir {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn meta(&self) -> CsiMeta {
        self.meta
    }

    pub fn first_sample(&self) -> usize {
        self.first_sample
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn delay_resolution(&self) -> f64 {
        self.meta.delay_resolution()
    }

    /// Delay of each bin, `k / bw`, seconds.
    pub fn delays(&self) -> Vec<f64> {
        delay_axis(self.dims.n_sub, self.meta.bw)
    }

    pub fn profile(&self, t: usize, n: usize) -> &[Complex64] {
        let start = (t * self.dims.n_ant + n) * self.dims.n_sub;
        &self.data[start..start + self.dims.n_sub]
    }
}

pub fn delay_axis(n_sub: usize, bw: f64) -> Vec<f64> {
    (0..n_sub).map(|k| k as f64 / bw).collect()
}

/// Baseband offset of each subcarrier from the first, `k * bw / n_sub`.
pub fn subcarrier_offsets(n_sub: usize, bw: f64) -> Vec<f64> {
    (0..n_sub).map(|k| k as f64 * bw / n_sub as f64).collect()
}

fn load_row(src: &[Complex32], weights: Option<&[f64]>, out: &mut [Complex64]) {
    match weights {
        None => out
            .iter_mut()
            .zip(src)
            .for_each(|(o, s)| *o = Complex64::new(s.re as f64, s.im as f64)),
        Some(w) => out
            .iter_mut()
            .zip(src)
            .zip(w)
            .for_each(|((o, s), &g)| *o = Complex64::new(s.re as f64 * g, s.im as f64 * g)),
    }
}

pub fn ctf_to_cir(view: &CsiView<'_>) -> Cir {
    ctf_to_cir_windowed(view, DelayWindow::Rectangular)
}

/// Inverse DFT over subcarriers for every `(t, n)`.
pub fn ctf_to_cir_windowed(view: &CsiView<'_>, window: DelayWindow) -> Cir {
    let dims = view.dims();
    let dft = UnitaryDft::new(dims.n_sub);
    let weights = window.weights(dims.n_sub);
    let mut data = vec![Complex64::default(); dims.len()];
    let src = view.data();
    data.par_chunks_mut(dims.n_sub)
        .zip(src.par_chunks(dims.n_sub))
        .for_each_init(
            || dft.scratch(),
            |scratch, (out, row)| {
                load_row(row, weights.as_deref(), out);
                dft.inverse(out, scratch);
            },
        );
    Cir {
        dims,
        meta: view.meta(),
        first_sample: view.first_sample(),
        data,
    }
}

/// Forward DFT over delay, recovering `H(t, n, f)` in the same layout.
pub fn cir_to_ctf(cir: &Cir) -> Vec<Complex64> {
    let dft = UnitaryDft::new(cir.dims.n_sub);
    let mut out = cir.data.clone();
    out.par_chunks_mut(cir.dims.n_sub)
        .for_each_init(|| dft.scratch(), |scratch, row| dft.forward(row, scratch));
    out
}

/// `P(t, tau) = |h(t, tau)|^2` for antenna `n`.
pub fn instantaneous_pdp(cir: &Cir, t: usize, n: usize) -> Result<Vec<f64>> {
    let d = cir.dims;
    if t >= d.n_time || n >= d.n_ant {
        return Err(Error::Index(format!(
            "(t={t}, n={n}) outside {}x{}",
            d.n_time, d.n_ant
        )));
    }
    Ok(cir.profile(t, n).iter().map(|h| h.norm_sqr()).collect())
}

pub fn power_db(p: f64) -> f64 {
    10.0 * p.log10()
}

pub fn amplitude_db(h: Complex64) -> f64 {
    20.0 * h.norm().log10()
}

/// PDP averaged over a block of snapshots and all antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedPdp {
    /// Absolute index of the first snapshot in the window.
    pub first_sample: usize,
    pub window: usize,
    pub n_ant: usize,
    /// Bin width, s.
    pub delay_resolution: f64,
    /// Linear power per delay bin.
    pub power: Vec<f64>,
}

impl AveragedPdp {
    pub fn delays(&self) -> Vec<f64> {
        (0..self.power.len())
            .map(|k| k as f64 * self.delay_resolution)
            .collect()
    }
}

/// `P_h(t0, tau) = 1/(M w) sum_{k=t0}^{t0+w-1} sum_n |h(t_k, n, tau)|^2`.
pub fn averaged_pdp(cir: &Cir, t0: usize, w: usize) -> Result<AveragedPdp> {
    let d = cir.dims;
    if w == 0 || t0.checked_add(w).is_none_or(|e| e > d.n_time) {
        return Err(Error::Index(format!(
            "window [{t0}, {t0}+{w}) outside {} samples",
            d.n_time
        )));
    }
    let mut acc = vec![0.0; d.n_sub];
    for t in t0..t0 + w {
        for n in 0..d.n_ant {
            for (a, h) in acc.iter_mut().zip(cir.profile(t, n)) {
                *a += h.norm_sqr();
            }
        }
    }
    let norm = 1.0 / (d.n_ant * w) as f64;
    acc.iter_mut().for_each(|a| *a *= norm);
    Ok(AveragedPdp {
        first_sample: cir.first_sample + t0,
        window: w,
        n_ant: d.n_ant,
        delay_resolution: cir.delay_resolution(),
        power: acc,
    })
}

/// Averaged PDP of an entire view, transforming one response at a time
/// instead of materializing the full CIR.
pub fn window_pdp(view: &CsiView<'_>, window: DelayWindow) -> AveragedPdp {
    let d = view.dims();
    let dft = UnitaryDft::new(d.n_sub);
    window_pdp_with(view, window, &dft)
}

pub(crate) fn window_pdp_with(
    view: &CsiView<'_>,
    window: DelayWindow,
    dft: &UnitaryDft,
) -> AveragedPdp {
    let d = view.dims();
    let weights = window.weights(d.n_sub);
    let mut scratch = dft.scratch();
    let mut buf = vec![Complex64::default(); d.n_sub];
    let mut acc = vec![0.0; d.n_sub];
    for t in 0..d.n_time {
        for n in 0..d.n_ant {
            load_row(view.response(t, n), weights.as_deref(), &mut buf);
            dft.inverse(&mut buf, &mut scratch);
            for (a, h) in acc.iter_mut().zip(&buf) {
                *a += h.norm_sqr();
            }
        }
    }
    let norm = 1.0 / (d.n_ant * d.n_time) as f64;
    acc.iter_mut().for_each(|a| *a *= norm);
    AveragedPdp {
        first_sample: view.first_sample(),
        window: d.n_time,
        n_ant: d.n_ant,
        delay_resolution: view.meta().delay_resolution(),
        power: acc,
    }
}

/// Start indices of every complete window of length `w` advanced by `stride`.
pub fn window_starts(n_time: usize, w: usize, stride: usize) -> Vec<usize> {
    if w == 0 || stride == 0 || w > n_time {
        return Vec::new();
    }
    (0..=(n_time - w) / stride).map(|i| i * stride).collect()
}

/// Averaged PDPs over consecutive windows, computed in parallel and returned
/// in window order.
pub fn averaged_pdps(
    view: &CsiView<'_>,
    w: usize,
    stride: usize,
    window: DelayWindow,
) -> Result<Vec<AveragedPdp>> {
    if w == 0 || stride == 0 {
        return Err(Error::Index("window and stride must be positive".into()));
    }
    let starts = window_starts(view.n_time(), w, stride);
    if starts.is_empty() {
        return Err(Error::Index(format!(
            "window {w} longer than {} samples",
            view.n_time()
        )));
    }
    let dft = UnitaryDft::new(view.n_sub());
    starts
        .par_iter()
        .map(|&s| Ok(window_pdp_with(&view.slice_window(s, w)?, window, &dft)))
        .collect()
}

/// Antenna-averaged transfer function over a window, in both conventions:
/// `coherent[f] = mean_t |mean_n H|^2`, `power[f] = mean_{t,n} |H|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtfMean {
    pub coherent: Vec<f64>,
    pub power: Vec<f64>,
}

pub fn antenna_mean_ctf(view: &CsiView<'_>) -> CtfMean {
    let d = view.dims();
    let mut coherent = vec![0.0; d.n_sub];
    let mut power = vec![0.0; d.n_sub];
    let mut sum = vec![Complex64::default(); d.n_sub];
    for t in 0..d.n_time {
        sum.iter_mut().for_each(|s| *s = Complex64::default());
        for n in 0..d.n_ant {
            for ((s, p), h) in sum.iter_mut().zip(power.iter_mut()).zip(view.response(t, n)) {
                let h = Complex64::new(h.re as f64, h.im as f64);
                *s += h;
                *p += h.norm_sqr();
            }
        }
        for (c, s) in coherent.iter_mut().zip(&sum) {
            *c += (s / d.n_ant as f64).norm_sqr();
        }
    }
    let nt = d.n_time as f64;
    coherent.iter_mut().for_each(|c| *c /= nt);
    power.iter_mut().for_each(|p| *p /= nt * d.n_ant as f64);
    CtfMean { coherent, power }
}

/// Coherent antenna mean `H(t, f)`, laid out `t -> f`.
pub fn coherent_ctf(view: &CsiView<'_>) -> Vec<Complex64> {
    let d = view.dims();
    let mut out = vec![Complex64::default(); d.n_time * d.n_sub];
    for t in 0..d.n_time {
        let row = &mut out[t * d.n_sub..(t + 1) * d.n_sub];
        for n in 0..d.n_ant {
            for (o, h) in row.iter_mut().zip(view.response(t, n)) {
                *o += Complex64::new(h.re as f64, h.im as f64);
            }
        }
        row.iter_mut().for_each(|o| *o /= d.n_ant as f64);
    }
    out
}

/// Doppler frequency of each shifted bin, `(i - w/2) / (w dt)`, Hz.
pub fn doppler_axis(w: usize, dt: f64) -> Vec<f64> {
    let half = (w / 2) as isize;
    (0..w)
        .map(|i| (i as isize - half) as f64 / (w as f64 * dt))
        .collect()
}

fn fftshift_into(src: &[Complex64], dst: &mut [Complex64]) {
    let n = src.len();
    let half = n / 2;
    for (i, d) in dst.iter_mut().enumerate() {
        *d = src[(i + n - half) % n];
    }
}

/// Doppler-variant transfer function `B(nu, n, f)` and impulse response
/// `s(nu, n, tau)` over one window.
#[derive(Debug, Clone)]
pub struct DopplerFunctions {
    pub n_doppler: usize,
    pub n_ant: usize,
    pub n_sub: usize,
    pub dt: f64,
    pub bw: f64,
    /// Laid out `nu -> n -> f`.
    pub b: Vec<Complex64>,
    /// Laid out `nu -> n -> tau`.
    pub s: Vec<Complex64>,
}

impl DopplerFunctions {
    pub fn doppler_axis(&self) -> Vec<f64> {
        doppler_axis(self.n_doppler, self.dt)
    }

    fn at(&self, buf: &[Complex64], nu: usize, n: usize, k: usize) -> Complex64 {
        buf[(nu * self.n_ant + n) * self.n_sub + k]
    }

    pub fn b_at(&self, nu: usize, n: usize, f: usize) -> Complex64 {
        self.at(&self.b, nu, n, f)
    }

    pub fn s_at(&self, nu: usize, n: usize, tau: usize) -> Complex64 {
        self.at(&self.s, nu, n, tau)
    }

    /// Antenna-averaged power spectra.
    pub fn power(&self) -> DopplerPower {
        let mut out = DopplerPower::empty(self.n_doppler, self.n_sub, self.dt, self.bw);
        let norm = 1.0 / self.n_ant as f64;
        for nu in 0..self.n_doppler {
            for n in 0..self.n_ant {
                for k in 0..self.n_sub {
                    out.b_power[nu * self.n_sub + k] += self.b_at(nu, n, k).norm_sqr() * norm;
                    out.s_power[nu * self.n_sub + k] += self.s_at(nu, n, k).norm_sqr() * norm;
                }
            }
        }
        out
    }
}

/// `|B(nu, f)|^2` and `|s(nu, tau)|^2` averaged over antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerPower {
    pub nu: Vec<f64>,
    pub delays: Vec<f64>,
    pub subcarriers: Vec<f64>,
    /// Laid out `nu -> f`.
    pub b_power: Vec<f64>,
    /// Laid out `nu -> tau`.
    pub s_power: Vec<f64>,
}

impl DopplerPower {
    fn empty(w: usize, n_sub: usize, dt: f64, bw: f64) -> Self {
        Self {
            nu: doppler_axis(w, dt),
            delays: delay_axis(n_sub, bw),
            subcarriers: subcarrier_offsets(n_sub, bw),
            b_power: vec![0.0; w * n_sub],
            s_power: vec![0.0; w * n_sub],
        }
    }

    /// Total power in each Doppler bin, summed over subcarriers.
    pub fn doppler_spectrum(&self) -> Vec<f64> {
        let n_sub = self.subcarriers.len();
        self.b_power.chunks(n_sub).map(|r| r.iter().sum()).collect()
    }
}

fn check_window(view: &CsiView<'_>, t0: usize, w: usize) -> Result<()> {
    if w == 0 || t0.checked_add(w).is_none_or(|e| e > view.n_time()) {
        return Err(Error::Index(format!(
            "window [{t0}, {t0}+{w}) outside {} samples",
            view.n_time()
        )));
    }
    Ok(())
}

/// Time-axis spectra of one antenna over the window: returns `B` laid out
/// `nu -> f`.
fn antenna_doppler(view: &CsiView<'_>, n: usize, time_dft: &UnitaryDft) -> Vec<Complex64> {
    let (w, n_sub) = (view.n_time(), view.n_sub());
    let mut b = vec![Complex64::default(); w * n_sub];
    let columns: Vec<Vec<Complex64>> = (0..n_sub)
        .into_par_iter()
        .map_init(
            || (time_dft.scratch(), vec![Complex64::default(); w]),
            |(scratch, series), f| {
                for (t, x) in series.iter_mut().enumerate() {
                    let h = view.get(t, n, f);
                    *x = Complex64::new(h.re as f64, h.im as f64);
                }
                time_dft.forward(series, scratch);
                let mut shifted = vec![Complex64::default(); w];
                fftshift_into(series, &mut shifted);
                shifted
            },
        )
        .collect();
    for (f, col) in columns.iter().enumerate() {
        for (nu, x) in col.iter().enumerate() {
            b[nu * n_sub + f] = *x;
        }
    }
    b
}

pub fn doppler_functions(view: &CsiView<'_>, t0: usize, w: usize) -> Result<DopplerFunctions> {
    check_window(view, t0, w)?;
    let win = view.slice_window(t0, w)?;
    let (n_ant, n_sub) = (view.n_ant(), view.n_sub());
    let time_dft = UnitaryDft::new(w);
    let delay_dft = UnitaryDft::new(n_sub);
    let mut b = vec![Complex64::default(); w * n_ant * n_sub];
    for n in 0..n_ant {
        let bn = antenna_doppler(&win, n, &time_dft);
        for nu in 0..w {
            let dst = (nu * n_ant + n) * n_sub;
            b[dst..dst + n_sub].copy_from_slice(&bn[nu * n_sub..(nu + 1) * n_sub]);
        }
    }
    let mut s = b.clone();
    s.par_chunks_mut(n_sub)
        .for_each_init(|| delay_dft.scratch(), |scratch, row| delay_dft.inverse(row, scratch));
    Ok(DopplerFunctions {
        n_doppler: w,
        n_ant,
        n_sub,
        dt: view.meta().dt,
        bw: view.meta().bw,
        b,
        s,
    })
}

/// Antenna-averaged Doppler power spectra without keeping the complex
/// functions of every antenna in memory.
pub fn doppler_power(view: &CsiView<'_>, t0: usize, w: usize) -> Result<DopplerPower> {
    check_window(view, t0, w)?;
    let win = view.slice_window(t0, w)?;
    let (n_ant, n_sub) = (view.n_ant(), view.n_sub());
    let meta = view.meta();
    let time_dft = UnitaryDft::new(w);
    let delay_dft = UnitaryDft::new(n_sub);
    let mut out = DopplerPower::empty(w, n_sub, meta.dt, meta.bw);
    let norm = 1.0 / n_ant as f64;
    for n in 0..n_ant {
        let mut bn = antenna_doppler(&win, n, &time_dft);
        for (acc, x) in out.b_power.iter_mut().zip(&bn) {
            *acc += x.norm_sqr() * norm;
        }
        bn.par_chunks_mut(n_sub)
            .for_each_init(|| delay_dft.scratch(), |scratch, row| delay_dft.inverse(row, scratch));
        for (acc, x) in out.s_power.iter_mut().zip(&bn) {
            *acc += x.norm_sqr() * norm;
        }
    }
    Ok(out)
}

pub fn wavelength(f_c: f64) -> f64 {
    SPEED_OF_LIGHT / f_c
}

/// Largest Doppler shift `v / lambda` at carrier `f_c`.
pub fn max_doppler(v_max: f64, f_c: f64) -> Result<f64> {
    if !(v_max >= 0.0) {
        return Err(Error::range("v_max", v_max));
    }
    if !(f_c > 0.0) {
        return Err(Error::range("f_c", f_c));
    }
    Ok(v_max * f_c / SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{CsiMeta, CsiTensor, Dims};
    use std::f64::consts::PI;

    fn tensor(dims: Dims, g: impl Fn(usize, usize, usize) -> Complex64) -> CsiTensor {
        CsiTensor::from_fn(dims, CsiMeta::reference(), |t, n, f| {
            let c = g(t, n, f);
            Complex32::new(c.re as f32, c.im as f32)
        })
        .unwrap()
    }

    #[test]
    fn flat_ctf_is_single_tap() {
        let f = 100;
        let t = tensor(Dims::new(1, 1, f), |_, _, _| Complex64::new(1.0, 0.0));
        let cir = ctf_to_cir(&t.view());
        let p = cir.profile(0, 0);
        assert!((p[0].re - (f as f64).sqrt()).abs() < 1e-12);
        assert!(p[1..].iter().all(|h| h.norm() < 1e-12));
    }

    #[test]
    fn shift_theorem_places_tap() {
        let f = 100;
        let t = tensor(Dims::new(1, 1, f), |_, _, k| {
            Complex64::from_polar(1.0, -2.0 * PI * (k * 3) as f64 / f as f64)
        });
        let pdp = instantaneous_pdp(&ctf_to_cir(&t.view()), 0, 0).unwrap();
        let peak = (0..f).max_by(|&a, &b| pdp[a].total_cmp(&pdp[b])).unwrap();
        assert_eq!(peak, 3);
    }

    #[test]
    fn pdp_values_and_db() {
        let t = tensor(Dims::new(1, 1, 2), |_, _, _| Complex64::new(0.0, 0.0));
        let mut cir = ctf_to_cir(&t.view());
        cir.data[0] = Complex64::new(1.0, 0.0);
        cir.data[1] = Complex64::new(3.0, 4.0);
        let p = instantaneous_pdp(&cir, 0, 0).unwrap();
        assert_eq!(p, vec![1.0, 25.0]);
        let h = cir.data[1];
        assert!((amplitude_db(h) - power_db(p[1])).abs() < 1e-12);
        assert!(matches!(instantaneous_pdp(&cir, 1, 0), Err(Error::Index(_))));
    }

    #[test]
    fn averaged_pdp_degenerate_and_mean() {
        let t = tensor(Dims::new(2, 1, 4), |t, _, k| {
            Complex64::new(if t == 0 { 1.0 } else { 3f64.sqrt() }, 0.0) * (k as f64 + 1.0)
        });
        let cir = ctf_to_cir(&t.view());
        let single = averaged_pdp(&cir, 0, 1).unwrap();
        assert_eq!(single.power, instantaneous_pdp(&cir, 0, 0).unwrap());
        let both = averaged_pdp(&cir, 0, 2).unwrap();
        for (b, p) in both.power.iter().zip(&single.power) {
            assert!((b - 2.0 * p).abs() < 1e-5 * p.max(1.0));
        }
        assert!(averaged_pdp(&cir, 1, 2).is_err());
    }

    #[test]
    fn window_pdp_matches_cir_path() {
        let t = tensor(Dims::new(6, 3, 8), |t, n, k| {
            Complex64::new((t * 7 + n * 3 + k) as f64 % 5.0, (t + 2 * k) as f64 % 3.0 - 1.0)
        });
        let cir = ctf_to_cir(&t.view());
        let a = averaged_pdp(&cir, 2, 3).unwrap();
        let b = window_pdp(&t.slice_window(2, 3).unwrap(), DelayWindow::Rectangular);
        assert_eq!(a, b);
    }

    #[test]
    fn reference_window_count() {
        assert_eq!(window_starts(50_000, 100, 100).len(), 500);
        assert_eq!(window_starts(250, 100, 100), vec![0, 100]);
        assert_eq!(window_starts(250, 100, 50), vec![0, 50, 100, 150]);
        assert!(window_starts(50, 100, 100).is_empty());
    }

    #[test]
    fn static_channel_doppler_at_zero() {
        let w = 16;
        let t = tensor(Dims::new(w, 2, 4), |_, n, k| {
            Complex64::new(1.0 + n as f64, k as f64)
        });
        let dp = doppler_power(&t.view(), 0, w).unwrap();
        let spec = dp.doppler_spectrum();
        assert_eq!(dp.nu[w / 2], 0.0);
        let total: f64 = spec.iter().sum();
        assert!((spec[w / 2] - total).abs() < 1e-9 * total);
    }

    #[test]
    fn complex_exponential_doppler_line() {
        let (w, dt) = (200, 1e-3);
        let t = tensor(Dims::new(w, 1, 2), |t, _, _| {
            Complex64::from_polar(1.0, 2.0 * PI * 10.0 * t as f64 * dt)
        });
        let dp = doppler_power(&t.view(), 0, w).unwrap();
        let spec = dp.doppler_spectrum();
        let peak = (0..w).max_by(|&a, &b| spec[a].total_cmp(&spec[b])).unwrap();
        assert!((dp.nu[peak] - 10.0).abs() < 1e-9);
        let total: f64 = spec.iter().sum();
        assert!(spec[peak] / total > 1.0 - 1e-9);
    }

    #[test]
    fn doppler_functions_power_matches_streaming() {
        let t = tensor(Dims::new(12, 3, 4), |t, n, k| {
            Complex64::new(((t * 5 + n + k * 3) % 7) as f64, ((t + n * 2) % 3) as f64)
        });
        let full = doppler_functions(&t.view(), 2, 9).unwrap();
        let a = full.power();
        let b = doppler_power(&t.view(), 2, 9).unwrap();
        for (x, y) in a.b_power.iter().zip(&b.b_power) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in a.s_power.iter().zip(&b.s_power) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(doppler_functions(&t.view(), 5, 9).is_err());
    }

    #[test]
    fn max_doppler_values() {
        assert_eq!(max_doppler(0.0, 2.61e9).unwrap(), 0.0);
        assert!((max_doppler(3.07, 2.61e9).unwrap() - 26.7273).abs() < 1e-3);
        assert!((max_doppler(114.9, 2.61e9).unwrap() - 1000.3).abs() < 0.1);
        assert!(max_doppler(-1.0, 2.61e9).is_err());
    }

    #[test]
    fn odd_doppler_axis_symmetric() {
        let ax = doppler_axis(5, 0.1);
        assert_eq!(ax, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
    }
}
