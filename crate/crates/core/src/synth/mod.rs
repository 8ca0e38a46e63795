//! Synthetic CSI with analytically known properties.
//!
//! Every generator implements [`SnapshotSource`]: snapshot `t` is a pure
//! function of the seed and `t`, so tensors are identical whatever the
//! thread count and whether they are built in memory or streamed to disk.

mod clarke;
mod config;
mod spatial;
mod taps;

use std::path::Path;

use num_complex::Complex32;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::csit::CsiWriter;
use crate::error::Result;
use crate::tensor::{CsiMeta, CsiTensor, Dims};

pub use clarke::{gen_clarke_fading, ClarkeProcess, CLARKE_RAYS};
pub use config::{meta_path, line_trajectory, LineTrajectory, SynthConfig, SynthKind};
pub use spatial::{
    color_matrix, gen_spatially_correlated, jakes_covariance, SpatialMode, SpatialSource,
    SpatialSpec,
};
pub use taps::{
    gen_nonstationary_switch, gen_tapped_delay, DopplerMode, SwitchSource, Tap, TapSpec,
    TappedDelay,
};

/// Deterministic generator of whole snapshots (`n_ant * n_sub` gains).
pub trait SnapshotSource: Sync {
    fn dims(&self) -> Dims;
    fn meta(&self) -> CsiMeta;
    fn fill(&self, t: usize, out: &mut [Complex32]);
}

/// Independent ChaCha stream `stream` of generator `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Materializes the full tensor in memory.
pub fn generate(source: &(impl SnapshotSource + ?Sized)) -> Result<CsiTensor> {
    let dims = source.dims();
    dims.validate()?;
    let mut data = vec![Complex32::default(); dims.len()];
    data.par_chunks_mut(dims.snapshot_len())
        .enumerate()
        .for_each(|(t, out)| source.fill(t, out));
    CsiTensor::new(dims, source.meta(), data)
}

/// Snapshots generated per parallel block when streaming.
pub const STREAM_BLOCK: usize = 1000;

/// Writes the tensor to a CSIT file block by block.
pub fn write_streaming(source: &(impl SnapshotSource + ?Sized), path: impl AsRef<Path>) -> Result<()> {
    let dims = source.dims();
    let mut writer = CsiWriter::create(path, dims, source.meta())?;
    let snap = dims.snapshot_len();
    let mut block = vec![Complex32::default(); STREAM_BLOCK.min(dims.n_time) * snap];
    let mut t0 = 0;
    while t0 < dims.n_time {
        let n = STREAM_BLOCK.min(dims.n_time - t0);
        let buf = &mut block[..n * snap];
        buf.par_chunks_mut(snap)
            .enumerate()
            .for_each(|(i, out)| source.fill(t0 + i, out));
        writer.write_snapshots(buf)?;
        t0 += n;
    }
    writer.finish()
}
