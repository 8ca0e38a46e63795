//! In-memory CSI tensor `H(t, n, f)` and borrowed time-window views.
//!
//! Gains are stored row-major with time outermost, then antenna, then
//! subcarrier, which is also the on-disk order of CSIT files. A time window
//! is therefore one contiguous slice and [`CsiView`] never copies.

use num_complex::Complex32;

use crate::error::{Error, Result};

/// Sampling interval of the reference campaign, seconds.
pub const PAPER_DT: f64 = 1e-3;
/// Carrier frequency of the reference campaign, Hz.
pub const PAPER_CARRIER: f64 = 2.61e9;
/// Sounding bandwidth of the reference campaign, Hz.
pub const PAPER_BANDWIDTH: f64 = 18e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n_time: usize,
    pub n_ant: usize,
    pub n_sub: usize,
}

impl Dims {
    pub fn new(n_time: usize, n_ant: usize, n_sub: usize) -> Self {
        Self {
            n_time,
            n_ant,
            n_sub,
        }
    }

    /// Dimensions of one trajectory of the reference dataset.
    pub fn reference() -> Self {
        Self::new(50_000, 64, 100)
    }

    pub fn len(&self) -> usize {
        self.n_time * self.n_ant * self.n_sub
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot_len(&self) -> usize {
        self.n_ant * self.n_sub
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_time < 1 || self.n_ant < 1 || self.n_sub < 2 {
            return Err(Error::Format(format!(
                "dimensions must satisfy n_time >= 1, n_ant >= 1, n_sub >= 2 (got {}x{}x{})",
                self.n_time, self.n_ant, self.n_sub
            )));
        }
        Ok(())
    }
}

/// Physical metadata shared by a tensor and every view of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiMeta {
    /// Sampling interval, s.
    pub dt: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Bandwidth, Hz.
    pub bw: f64,
}

impl CsiMeta {
    pub fn new(dt: f64, f_c: f64, bw: f64) -> Self {
        Self { dt, f_c, bw }
    }

    pub fn reference() -> Self {
        Self::new(PAPER_DT, PAPER_CARRIER, PAPER_BANDWIDTH)
    }

    /// Width of one delay bin, `1 / bw`.
    pub fn delay_resolution(&self) -> f64 {
        1.0 / self.bw
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt.is_finite()
            && self.f_c.is_finite()
            && self.bw.is_finite()
            && self.dt > 0.0
            && self.bw > 0.0
            && self.f_c > self.bw / 2.0;
        if !ok {
            return Err(Error::Format(format!(
                "metadata must satisfy dt > 0, bw > 0, f_c > bw/2 (got dt={}, f_c={}, bw={})",
                self.dt, self.f_c, self.bw
            )));
        }
        Ok(())
    }
}

/// Owned block of channel gains.
///
/// `first_sample` is the absolute sample index of row 0, so blocks read from
/// the middle of a file keep their place on the trajectory time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTensor {
    dims: Dims,
    meta: CsiMeta,
    first_sample: usize,
    data: Vec<Complex32>,
}

impl CsiTensor {
    pub fn new(dims: Dims, meta: CsiMeta, data: Vec<Complex32>) -> Result<Self> {
        Self::with_offset(dims, meta, 0, data)
    }

    pub fn with_offset(
        dims: Dims,
        meta: CsiMeta,
        first_sample: usize,
        data: Vec<Complex32>,
    ) -> Result<Self> {
        dims.validate()?;
        meta.validate()?;
        if data.len() != dims.len() {
            return Err(Error::Format(format!(
                "payload holds {} gains, dimensions require {}",
                data.len(),
                dims.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            let (t, n, f) = unflatten(dims, pos);
            return Err(Error::Data {
                t: first_sample + t,
                n,
                f,
            });
        }
        Ok(Self {
            dims,
            meta,
            first_sample,
            data,
        })
    }

    /// Builds a tensor by evaluating `gain(t, n, f)` at every index.
    pub fn from_fn(
        dims: Dims,
        meta: CsiMeta,
        mut gain: impl FnMut(usize, usize, usize) -> Complex32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for t in 0..dims.n_time {
            for n in 0..dims.n_ant {
                for f in 0..dims.n_sub {
                    data.push(gain(t, n, f));
                }
            }
        }
        Self::new(dims, meta, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn meta(&self) -> CsiMeta {
        self.meta
    }

    pub fn first_sample(&self) -> usize {
        self.first_sample
    }

    pub fn data(&self) -> &[Complex32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex32> {
        self.data
    }

    pub fn view(&self) -> CsiView<'_> {
        CsiView {
            dims: self.dims,
            meta: self.meta,
            first_sample: self.first_sample,
            data: &self.data,
        }
    }

    /// View over samples `[t0, t0 + w)`.
    pub fn slice_window(&self, t0: usize, w: usize) -> Result<CsiView<'_>> {
        self.view().slice_window(t0, w)
    }

    pub fn get(&self, t: usize, n: usize, f: usize) -> Complex32 {
        self.view().get(t, n, f)
    }
}

/// Borrowed time window of a [`CsiTensor`].
#[derive(Debug, Clone, Copy)]
pub struct CsiView<'a> {
    dims: Dims,
    meta: CsiMeta,
    first_sample: usize,
    data: &'a [Complex32],
}

impl<'a> CsiView<'a> {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn meta(&self) -> CsiMeta {
        self.meta
    }

    pub fn n_time(&self) -> usize {
        self.dims.n_time
    }

    pub fn n_ant(&self) -> usize {
        self.dims.n_ant
    }

    pub fn n_sub(&self) -> usize {
        self.dims.n_sub
    }

    /// Absolute sample index of the first row.
    pub fn first_sample(&self) -> usize {
        self.first_sample
    }

    pub fn data(&self) -> &'a [Complex32] {
        self.data
    }

    /// Absolute time of local row `t`, seconds.
    pub fn time_of(&self, t: usize) -> f64 {
        (self.first_sample + t) as f64 * self.meta.dt
    }

    pub fn get(&self, t: usize, n: usize, f: usize) -> Complex32 {
        self.data[(t * self.dims.n_ant + n) * self.dims.n_sub + f]
    }

    /// All antennas and subcarriers of row `t`.
    pub fn snapshot(&self, t: usize) -> &'a [Complex32] {
        let len = self.dims.snapshot_len();
        &self.data[t * len..(t + 1) * len]
    }

    /// Frequency response of antenna `n` at row `t`.
    pub fn response(&self, t: usize, n: usize) -> &'a [Complex32] {
        let start = (t * self.dims.n_ant + n) * self.dims.n_sub;
        &self.data[start..start + self.dims.n_sub]
    }

    pub fn slice_window(&self, t0: usize, w: usize) -> Result<CsiView<'a>> {
        if w == 0 || t0.checked_add(w).is_none_or(|end| end > self.dims.n_time) {
            return Err(Error::Index(format!(
                "window [{t0}, {t0}+{w}) outside {} samples",
                self.dims.n_time
            )));
        }
        let len = self.dims.snapshot_len();
        Ok(CsiView {
            dims: Dims {
                n_time: w,
                ..self.dims
            },
            meta: self.meta,
            first_sample: self.first_sample + t0,
            data: &self.data[t0 * len..(t0 + w) * len],
        })
    }

    pub fn to_tensor(&self) -> CsiTensor {
        CsiTensor {
            dims: self.dims,
            meta: self.meta,
            first_sample: self.first_sample,
            data: self.data.to_vec(),
        }
    }
}

fn unflatten(dims: Dims, pos: usize) -> (usize, usize, usize) {
    let f = pos % dims.n_sub;
    let n = (pos / dims.n_sub) % dims.n_ant;
    let t = pos / dims.snapshot_len();
    (t, n, f)
}
