//! Channel characterization for massive-MIMO base-station to drone links.
//!
//! The crate ingests CSI tensors `H(t, n, f)` (time snapshot, antenna,
//! subcarrier) and drone flight logs, and derives delay dispersion, temporal
//! stationarity, antenna correlation, Doppler spectra, MRC spectral
//! efficiency and attitude statistics. [`synth`] generates channels with
//! known properties for verification.

// `!(x > 0.0)` is the idiom for rejecting NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csit;
pub mod dispersion;
pub mod error;
pub mod geo;
pub mod kv;
pub mod link;
pub mod pipeline;
pub mod report;
pub mod spatial;
pub mod stationarity;
pub mod stats;
pub mod synth;
pub mod tensor;
pub mod trajectory;
pub mod transforms;

pub use error::{Error, Result};
pub use tensor::{CsiMeta, CsiTensor, CsiView, Dims};
