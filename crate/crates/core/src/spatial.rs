//! Antenna cross-correlation over the base-station array and the
//! isotropic-scattering `J0^2` reference.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::CsiView;

/// Uniform rectangular array with row-major element numbering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UraLayout {
    pub rows: usize,
    pub cols: usize,
    /// Element pitch, m.
    pub spacing: f64,
}

impl UraLayout {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Index(format!("empty {rows}x{cols} array")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::range("element spacing", spacing));
        }
        Ok(Self {
            rows,
            cols,
            spacing,
        })
    }

    /// 8x8 array at half-wavelength pitch for carrier `f_c`.
    pub fn half_wavelength(f_c: f64) -> Self {
        Self {
            rows: 8,
            cols: 8,
            spacing: crate::transforms::wavelength(f_c) / 2.0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::Index(format!(
                "element ({row}, {col}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(row * self.cols + col)
    }

    pub fn position(&self, element: usize) -> (usize, usize) {
        (element / self.cols, element % self.cols)
    }

    /// Euclidean distance between two elements, m.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = self.position(a);
        let (rb, cb) = self.position(b);
        let dr = ra as f64 - rb as f64;
        let dc = ca as f64 - cb as f64;
        dr.hypot(dc) * self.spacing
    }
}

/// Which samples enter the expectation of the correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationMode {
    /// Every time sample and subcarrier in the window.
    #[default]
    Pooled,
    /// Time samples of a single subcarrier.
    Subcarrier(usize),
}

impl std::str::FromStr for CorrelationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "pooled" {
            return Ok(Self::Pooled);
        }
        s.strip_prefix("subcarrier:")
            .and_then(|k| k.parse().ok())
            .map(Self::Subcarrier)
            .ok_or_else(|| format!("unknown correlation mode {s:?} (pooled|subcarrier:<k>)"))
    }
}

impl std::fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrelationMode::Pooled => f.write_str("pooled"),
            CorrelationMode::Subcarrier(k) => write!(f, "subcarrier:{k}"),
        }
    }
}

/// Hermitian matrix of Pearson correlation coefficients between elements.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    values: Vec<Complex64>,
    /// Absolute first sample of the estimation window.
    pub t0: usize,
    pub w: usize,
    pub mode: CorrelationMode,
}

impl CorrelationMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m * self.n + n]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }
}

/// Minimum window length for a usable variance estimate.
pub const MIN_CORRELATION_WINDOW: usize = 8;

/// `R(m, n) = E[(h_m - mu_m)(h_n - mu_n)^*] / sqrt(V[h_m] V[h_n])` over
/// samples `[t0, t0 + w)` of `view`.
pub fn correlation_matrix(view: &CsiView<'_>, t0: usize, w: usize) -> Result<CorrelationMatrix> {
    correlation_matrix_with(view, t0, w, CorrelationMode::Pooled)
}

pub fn correlation_matrix_with(
    view: &CsiView<'_>,
    t0: usize,
    w: usize,
    mode: CorrelationMode,
) -> Result<CorrelationMatrix> {
    if w < MIN_CORRELATION_WINDOW {
        return Err(Error::DegenerateInput(format!(
            "correlation window {w} shorter than {MIN_CORRELATION_WINDOW}"
        )));
    }
    let win = view.slice_window(t0, w)?;
    let (n_ant, n_sub) = (win.n_ant(), win.n_sub());
    let subcarriers = match mode {
        CorrelationMode::Pooled => 0..n_sub,
        CorrelationMode::Subcarrier(k) if k < n_sub => k..k + 1,
        CorrelationMode::Subcarrier(k) => {
            return Err(Error::Index(format!("subcarrier {k} outside {n_sub}")))
        }
    };

    // Centred samples per element, unit-normalized so the Gram matrix is R.
    let columns: Vec<Vec<Complex64>> = (0..n_ant)
        .into_par_iter()
        .map(|n| {
            let mut xs = Vec::with_capacity(w * subcarriers.len());
            for t in 0..w {
                let row = win.response(t, n);
                xs.extend(
                    row[subcarriers.clone()]
                        .iter()
                        .map(|h| Complex64::new(h.re as f64, h.im as f64)),
                );
            }
            let mu = xs.iter().sum::<Complex64>() / xs.len() as f64;
            xs.iter_mut().for_each(|x| *x -= mu);
            let norm = xs.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                xs.iter_mut().for_each(|x| *x /= norm);
                Ok(xs)
            } else {
                Err(Error::DegenerateElement { element: n })
            }
        })
        .collect::<Result<_>>()?;

    let upper: Vec<Vec<Complex64>> = (0..n_ant)
        .into_par_iter()
        .map(|m| {
            (m + 1..n_ant)
                .map(|n| {
                    columns[m]
                        .iter()
                        .zip(&columns[n])
                        .map(|(a, b)| a * b.conj())
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut values = vec![Complex64::default(); n_ant * n_ant];
    for m in 0..n_ant {
        values[m * n_ant + m] = Complex64::new(1.0, 0.0);
        for (k, r) in upper[m].iter().enumerate() {
            let n = m + 1 + k;
            values[m * n_ant + n] = *r;
            values[n * n_ant + m] = r.conj();
        }
    }
    Ok(CorrelationMatrix {
        n: n_ant,
        values,
        t0: win.first_sample(),
        w,
        mode,
    })
}

/// `|R(ref, .)|` arranged on the array grid, `rows x cols`.
pub fn element_map(
    corr: &CorrelationMatrix,
    layout: &UraLayout,
    reference: (usize, usize),
) -> Result<Vec<Vec<f64>>> {
    if layout.len() != corr.len() {
        return Err(Error::Index(format!(
            "{}x{} layout does not describe {} elements",
            layout.rows,
            layout.cols,
            corr.len()
        )));
    }
    let r = layout.index(reference.0, reference.1)?;
    Ok((0..layout.rows)
        .map(|row| {
            (0..layout.cols)
                .map(|col| corr.get(r, row * layout.cols + col).norm())
                .collect()
        })
        .collect())
}

const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order zero.
///
/// Power series up to `|x| = 12`, Hankel asymptotic expansion beyond;
/// absolute error stays below 1e-10 on the real line.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 4 {
                break;
            }
        }
        sum
    } else {
        // P ~ sum (-1)^k a_2k, Q ~ sum (-1)^k a_2k+1, with
        // a_k = prod_{i<=k} (2i-1)^2 / (i * 8x); stop at the smallest term.
        let mut p = 1.0;
        let mut q = 0.0;
        let mut a = 1.0f64;
        for k in 1..60 {
            let next = a * ((2 * k - 1) as f64).powi(2) / (k as f64 * 8.0 * x);
            if next >= a {
                break;
            }
            a = next;
            match k % 4 {
                1 => q -= a,
                2 => p -= a,
                3 => q += a,
                _ => p += a,
            }
            if a < 1e-17 {
                break;
            }
        }
        let chi = x - std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Spatial correlation `J0(2 pi d / lambda)^2` of isotropic scattering.
pub fn jakes_reference(d_s: f64, lambda: f64) -> Result<f64> {
    if !(d_s >= 0.0) {
        return Err(Error::range("element spacing", d_s));
    }
    if !(lambda > 0.0) {
        return Err(Error::range("wavelength", lambda));
    }
    Ok(bessel_j0(2.0 * std::f64::consts::PI * d_s / lambda).powi(2))
}

/// Reference curve sampled at spacings `0, step, ..., max` in wavelengths.
pub fn jakes_curve(max_lambdas: f64, step: f64) -> Vec<(f64, f64)> {
    let n = (max_lambdas / step).round() as usize;
    (0..=n)
        .map(|i| {
            let d = i as f64 * step;
            (d, bessel_j0(2.0 * std::f64::consts::PI * d).powi(2))
        })
        .collect()
}
