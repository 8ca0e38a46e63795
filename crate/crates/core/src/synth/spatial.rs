//! Array channels with a prescribed element covariance.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{generate, stream_rng, SnapshotSource};
use crate::error::{Error, Result};
use crate::spatial::{jakes_reference, UraLayout};
use crate::tensor::{CsiMeta, CsiTensor, Dims};
use crate::transforms::wavelength;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialMode {
    /// Independent elements.
    Iid,
    /// One plane wave arriving at `azimuth_deg` in the array plane.
    PlaneWave { azimuth_deg: f64 },
    /// Covariance `J0^2(2 pi d / lambda)` over element distances.
    Jakes,
}

impl std::str::FromStr for SpatialMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "iid" => Ok(Self::Iid),
            None if s == "jakes" => Ok(Self::Jakes),
            None if s == "plane" => Ok(Self::PlaneWave { azimuth_deg: 0.0 }),
            Some(("plane", deg)) => deg
                .parse()
                .map(|azimuth_deg| Self::PlaneWave { azimuth_deg })
                .map_err(|_| format!("bad plane-wave azimuth {deg:?}")),
            _ => Err(format!("unknown spatial mode {s:?} (iid|jakes|plane[:<deg>])")),
        }
    }
}

impl std::fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpatialMode::Iid => f.write_str("iid"),
            SpatialMode::Jakes => f.write_str("jakes"),
            SpatialMode::PlaneWave { azimuth_deg } => write!(f, "plane:{azimuth_deg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialSpec {
    pub mode: SpatialMode,
    pub layout: UraLayout,
    pub seed: u64,
}

/// `J0^2(2 pi d_mn / lambda)` for every element pair.
pub fn jakes_covariance(layout: &UraLayout, lambda: f64) -> Result<DMatrix<f64>> {
    let n = layout.len();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = jakes_reference(layout.distance(i, j), lambda)?;
        }
    }
    Ok(c)
}

/// Symmetric square root `L` with `L L^T = cov`; fails unless `cov` is
/// symmetric positive semi-definite.
pub fn color_matrix(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !cov.is_square() || cov.nrows() == 0 {
        return Err(Error::Spec("covariance must be a non-empty square matrix".into()));
    }
    let scale = cov.amax().max(f64::MIN_POSITIVE);
    if (cov - cov.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Spec("covariance is not symmetric".into()));
    }
    let eig = SymmetricEigen::new(cov.clone());
    let min = eig.eigenvalues.min();
    if min < -1e-9 * scale {
        return Err(Error::Spec(format!(
            "covariance is not positive semi-definite (eigenvalue {min:.3e})"
        )));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Every `(t, f)` sample draws an independent element vector `L z` with
/// `z` unit circular Gaussian.
#[derive(Debug, Clone)]
pub struct SpatialSource {
    dims: Dims,
    meta: CsiMeta,
    seed: u64,
    coloring: Coloring,
}

#[derive(Debug, Clone)]
enum Coloring {
    Identity,
    Real(DMatrix<f64>),
    /// Rank one: a common draw times a fixed steering vector.
    Steering(Vec<Complex64>),
}

impl SpatialSource {
    pub fn new(spec: &SpatialSpec, dims: Dims, meta: CsiMeta) -> Result<Self> {
        dims.validate()?;
        meta.validate()?;
        let layout = spec.layout;
        if layout.len() != dims.n_ant {
            return Err(Error::Spec(format!(
                "{}x{} layout does not match {} antennas",
                layout.rows, layout.cols, dims.n_ant
            )));
        }
        let lambda = wavelength(meta.f_c);
        let coloring = match spec.mode {
            SpatialMode::Iid => Coloring::Identity,
            SpatialMode::Jakes => Coloring::Real(color_matrix(&jakes_covariance(&layout, lambda)?)?),
            SpatialMode::PlaneWave { azimuth_deg } => {
                let azimuth = azimuth_deg.to_radians();
                let k = 2.0 * std::f64::consts::PI / lambda;
                Coloring::Steering(
                    (0..layout.len())
                        .map(|e| {
                            let (r, c) = layout.position(e);
                            let x = c as f64 * layout.spacing;
                            let y = r as f64 * layout.spacing;
                            Complex64::cis(k * (x * azimuth.cos() + y * azimuth.sin()))
                        })
                        .collect(),
                )
            }
        };
        Ok(Self {
            dims,
            meta,
            seed: spec.seed,
            coloring,
        })
    }
}

fn circular_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl SnapshotSource for SpatialSource {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn meta(&self) -> CsiMeta {
        self.meta
    }

    fn fill(&self, t: usize, out: &mut [Complex32]) {
        let (n_ant, n_sub) = (self.dims.n_ant, self.dims.n_sub);
        let mut rng = stream_rng(self.seed, t as u64);
        let to32 = |c: Complex64| Complex32::new(c.re as f32, c.im as f32);
        match &self.coloring {
            Coloring::Identity => {
                for o in out.iter_mut() {
                    *o = to32(circular_gaussian(&mut rng));
                }
            }
            Coloring::Steering(a) => {
                for f in 0..n_sub {
                    let g = circular_gaussian(&mut rng);
                    for (n, an) in a.iter().enumerate() {
                        out[n * n_sub + f] = to32(an * g);
                    }
                }
            }
            Coloring::Real(l) => {
                let z: Vec<Complex64> = (0..n_ant * n_sub)
                    .map(|_| circular_gaussian(&mut rng))
                    .collect();
                for n in 0..n_ant {
                    for f in 0..n_sub {
                        let mut acc = Complex64::default();
                        for m in 0..n_ant {
                            acc += z[m * n_sub + f] * l[(n, m)];
                        }
                        out[n * n_sub + f] = to32(acc);
                    }
                }
            }
        }
    }
}

pub fn gen_spatially_correlated(spec: &SpatialSpec, dims: Dims, meta: CsiMeta) -> Result<CsiTensor> {
    generate(&SpatialSource::new(spec, dims, meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coloring_reproduces_covariance() {
        let layout = UraLayout::half_wavelength(2.61e9);
        let c = jakes_covariance(&layout, wavelength(2.61e9)).unwrap();
        let l = color_matrix(&c).unwrap();
        assert!((&l * l.transpose() - &c).amax() < 1e-10);
    }

    #[test]
    fn indefinite_covariance_rejected() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(color_matrix(&c), Err(Error::Spec(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(color_matrix(&asym), Err(Error::Spec(_))));
    }

    #[test]
    fn layout_must_match_antennas() {
        let spec = SpatialSpec {
            mode: SpatialMode::Iid,
            layout: UraLayout::new(2, 2, 0.05).unwrap(),
            seed: 0,
        };
        assert!(SpatialSource::new(&spec, Dims::new(4, 5, 3), CsiMeta::reference()).is_err());
        assert!(SpatialSource::new(&spec, Dims::new(4, 4, 3), CsiMeta::reference()).is_ok());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("iid".parse::<SpatialMode>().unwrap(), SpatialMode::Iid);
        assert_eq!("jakes".parse::<SpatialMode>().unwrap(), SpatialMode::Jakes);
        assert_eq!(
            "plane:90".parse::<SpatialMode>().unwrap(),
            SpatialMode::PlaneWave { azimuth_deg: 90.0 }
        );
        assert!("cone".parse::<SpatialMode>().is_err());
    }
}
