//! Sum-of-sinusoids Rayleigh fading with a Clarke (U-shaped) spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::stream_rng;
use crate::error::Result;
use crate::transforms::max_doppler;

/// Equal-power rays per process.
pub const CLARKE_RAYS: usize = 64;

/// `h(t) = N^-1/2 sum_n exp(j (2 pi f_D cos(a_n) t + phi_n))`.
///
/// Arrival angles `a_n = pi (n + theta) / N` stratify the half circle with
/// one random offset `theta`, so the Doppler frequencies cover
/// `[-f_D, f_D]` evenly and the autocorrelation approaches `J0(2 pi f_D tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarkeProcess {
    /// Angular Doppler frequency of each ray, rad/s.
    omega: Vec<f64>,
    phase: Vec<f64>,
}

impl ClarkeProcess {
    pub fn new(f_d: f64, rng: &mut impl Rng) -> Self {
        let theta: f64 = rng.random();
        let omega = (0..CLARKE_RAYS)
            .map(|n| {
                let alpha = PI * (n as f64 + theta) / CLARKE_RAYS as f64;
                2.0 * PI * f_d * alpha.cos()
            })
            .collect();
        let phase = (0..CLARKE_RAYS)
            .map(|_| rng.random::<f64>() * 2.0 * PI)
            .collect();
        Self { omega, phase }
    }

    pub fn at(&self, t: f64) -> Complex64 {
        let sum: Complex64 = self
            .omega
            .iter()
            .zip(&self.phase)
            .map(|(w, p)| Complex64::cis(w * t + p))
            .sum();
        sum / (CLARKE_RAYS as f64).sqrt()
    }
}

/// `n_time` samples at spacing `dt` of a Clarke process for speed `v`.
pub fn gen_clarke_fading(v: f64, f_c: f64, n_time: usize, dt: f64, seed: u64) -> Result<Vec<Complex64>> {
    let f_d = max_doppler(v, f_c)?;
    let process = ClarkeProcess::new(f_d, &mut stream_rng(seed, 0));
    Ok((0..n_time).map(|t| process.at(t as f64 * dt)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_receiver_is_constant() {
        let h = gen_clarke_fading(0.0, 2.61e9, 50, 1e-3, 7).unwrap();
        assert!(h.iter().all(|x| *x == h[0]));
    }

    #[test]
    fn seeded() {
        let a = gen_clarke_fading(3.0, 2.61e9, 100, 1e-3, 11).unwrap();
        let b = gen_clarke_fading(3.0, 2.61e9, 100, 1e-3, 11).unwrap();
        let c = gen_clarke_fading(3.0, 2.61e9, 100, 1e-3, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(gen_clarke_fading(-1.0, 2.61e9, 10, 1e-3, 0).is_err());
    }

    #[test]
    fn unit_mean_power() {
        let h = gen_clarke_fading(3.0, 2.61e9, 100_000, 1e-3, 3).unwrap();
        let p = h.iter().map(|x| x.norm_sqr()).sum::<f64>() / h.len() as f64;
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }
}
