//! CSIT binary tensor files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "CSIT\x01" | u32 n_time | u32 n_ant | u32 n_sub | f64 dt | f64 f_c | f64 bw | payload
//! ```
//!
//! The payload is `n_time * n_ant * n_sub` interleaved `(f32 re, f32 im)`
//! pairs in row-major `t -> n -> f` order. Files must be exactly header plus
//! payload long.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::tensor::{CsiMeta, CsiTensor, CsiView, Dims};

pub const MAGIC: [u8; 5] = *b"CSIT\x01";
pub const HEADER_LEN: u64 = 5 + 3 * 4 + 3 * 8;
const GAIN_BYTES: u64 = 8;
const IO_CHUNK: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsitHeader {
    pub dims: Dims,
    pub meta: CsiMeta,
}

impl CsitHeader {
    pub fn payload_bytes(&self) -> u64 {
        self.dims.n_time as u64 * self.dims.n_ant as u64 * self.dims.n_sub as u64 * GAIN_BYTES
    }

    pub fn file_len(&self) -> u64 {
        HEADER_LEN + self.payload_bytes()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN as usize);
        out.extend_from_slice(&MAGIC);
        for d in [self.dims.n_time, self.dims.n_ant, self.dims.n_sub] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for x in [self.meta.dt, self.meta.f_c, self.meta.bw] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN as usize {
            return Err(Error::Format(format!(
                "header needs {HEADER_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        if bytes[..5] != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected \"CSIT\\x01\"",
                &bytes[..5]
            )));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let dims = Dims::new(u32_at(5), u32_at(9), u32_at(13));
        let meta = CsiMeta::new(f64_at(17), f64_at(25), f64_at(33));
        dims.validate()?;
        meta.validate()?;
        Ok(Self { dims, meta })
    }

    fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut buf = [0u8; HEADER_LEN as usize];
        let got = read_full(r, &mut buf).map_err(|e| Error::Format(e.to_string()))?;
        if got < 5 || buf[..5] != MAGIC {
            return Err(Error::Format("missing CSIT magic".into()));
        }
        if got < buf.len() {
            return Err(Error::Format(format!("header truncated at {got} bytes")));
        }
        Self::decode(&buf)
    }
}

/// Reads as many bytes as available up to `buf.len()`.
fn read_full(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

fn decode_gains(bytes: &[u8], out: &mut Vec<Complex32>) {
    out.extend(bytes.chunks_exact(8).map(|c| {
        Complex32::new(
            f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
            f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
        )
    }));
}

fn encode_gains(gains: &[Complex32], out: &mut Vec<u8>) {
    out.clear();
    for g in gains {
        out.extend_from_slice(&g.re.to_le_bytes());
        out.extend_from_slice(&g.im.to_le_bytes());
    }
}

fn read_payload(r: &mut impl Read, count: usize, expected: u64, base: u64) -> Result<Vec<Complex32>> {
    let mut data = Vec::with_capacity(count);
    let mut buf = vec![0u8; IO_CHUNK * GAIN_BYTES as usize];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(IO_CHUNK);
        let bytes = &mut buf[..take * GAIN_BYTES as usize];
        let got = read_full(r, bytes).map_err(|e| Error::Format(e.to_string()))?;
        if got < bytes.len() {
            let found = base + ((count - remaining) as u64) * GAIN_BYTES + got as u64;
            return Err(Error::Truncation { expected, found });
        }
        decode_gains(bytes, &mut data);
        remaining -= take;
    }
    Ok(data)
}

/// Reads a complete CSIT stream.
pub fn read_csi(r: &mut impl Read) -> Result<CsiTensor> {
    let header = CsitHeader::read_from(r)?;
    let data = read_payload(r, header.dims.len(), header.payload_bytes(), 0)?;
    let mut probe = [0u8; 1];
    if read_full(r, &mut probe).map_err(|e| Error::Format(e.to_string()))? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    CsiTensor::new(header.dims, header.meta, data)
}

pub fn load_csi(path: impl AsRef<Path>) -> Result<CsiTensor> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csi(&mut BufReader::new(file))
}

pub fn write_csi_to(w: &mut impl Write, view: &CsiView<'_>) -> std::io::Result<()> {
    let header = CsitHeader {
        dims: view.dims(),
        meta: view.meta(),
    };
    w.write_all(&header.encode())?;
    let mut buf = Vec::with_capacity(IO_CHUNK * GAIN_BYTES as usize);
    for chunk in view.data().chunks(IO_CHUNK) {
        encode_gains(chunk, &mut buf);
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn write_csi(path: impl AsRef<Path>, view: &CsiView<'_>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csi_to(&mut w, view)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Incremental CSIT writer for tensors too large to hold in memory.
pub struct CsiWriter {
    path: PathBuf,
    out: BufWriter<File>,
    header: CsitHeader,
    written: usize,
    buf: Vec<u8>,
}

impl CsiWriter {
    pub fn create(path: impl AsRef<Path>, dims: Dims, meta: CsiMeta) -> Result<Self> {
        dims.validate()?;
        meta.validate()?;
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::with_capacity(1 << 22, file);
        let header = CsitHeader { dims, meta };
        out.write_all(&header.encode())
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            out,
            header,
            written: 0,
            buf: Vec::new(),
        })
    }

    /// Appends whole snapshots (`n_ant * n_sub` gains each).
    pub fn write_snapshots(&mut self, gains: &[Complex32]) -> Result<()> {
        let snap = self.header.dims.snapshot_len();
        if !gains.len().is_multiple_of(snap) || self.written + gains.len() > self.header.dims.len() {
            return Err(Error::Index(format!(
                "{} gains do not fit the remaining snapshots",
                gains.len()
            )));
        }
        if let Some(pos) = gains.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            let abs = self.written + pos;
            return Err(Error::Data {
                t: abs / snap,
                n: (abs % snap) / self.header.dims.n_sub,
                f: abs % self.header.dims.n_sub,
            });
        }
        encode_gains(gains, &mut self.buf);
        self.out
            .write_all(&self.buf)
            .map_err(|e| Error::io(&self.path, e))?;
        self.written += gains.len();
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.header.dims.len() {
            return Err(Error::Truncation {
                expected: self.header.payload_bytes(),
                found: self.written as u64 * GAIN_BYTES,
            });
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Random-access reader that loads time windows on demand.
pub struct CsiReader {
    path: PathBuf,
    file: BufReader<File>,
    header: CsitHeader,
}

impl CsiReader {
    /// Opens a file and checks its header and total length.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        let mut file = BufReader::with_capacity(1 << 22, file);
        let header = CsitHeader::read_from(&mut file)?;
        let expected = header.file_len();
        if len < expected {
            return Err(Error::Truncation {
                expected: header.payload_bytes(),
                found: len.saturating_sub(HEADER_LEN),
            });
        }
        if len > expected {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        Ok(Self { path, file, header })
    }

    pub fn header(&self) -> CsitHeader {
        self.header
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Reads samples `[t0, t0 + w)` into an owned block.
    pub fn read_window(&mut self, t0: usize, w: usize) -> Result<CsiTensor> {
        let dims = self.header.dims;
        if w == 0 || t0.checked_add(w).is_none_or(|end| end > dims.n_time) {
            return Err(Error::Index(format!(
                "window [{t0}, {t0}+{w}) outside {} samples",
                dims.n_time
            )));
        }
        let snap = dims.snapshot_len() as u64 * GAIN_BYTES;
        let offset = HEADER_LEN + t0 as u64 * snap;
        self.file
            .seek(SeekFrom::Start(offset))
            .map_err(|e| Error::io(&self.path, e))?;
        let count = w * dims.snapshot_len();
        let data = read_payload(
            &mut self.file,
            count,
            self.header.payload_bytes(),
            t0 as u64 * snap,
        )?;
        CsiTensor::with_offset(
            Dims { n_time: w, ..dims },
            self.header.meta,
            t0,
            data,
        )
    }
}
