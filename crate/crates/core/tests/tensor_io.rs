//! CSIT container round trips, header fuzzing and window views.

use csi_prism::csit::{load_csi, read_csi, write_csi, write_csi_to, CsiReader, CsiWriter, MAGIC};
use csi_prism::{CsiMeta, CsiTensor, Dims, Error};
use num_complex::Complex32;
use proptest::prelude::*;

/// Header bytes assembled by hand from the documented layout.
fn header_bytes(n_time: u32, n_ant: u32, n_sub: u32, dt: f64, f_c: f64, bw: f64) -> Vec<u8> {
    let mut out = b"CSIT\x01".to_vec();
    for d in [n_time, n_ant, n_sub] {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for x in [dt, f_c, bw] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn file_from_bits(dims: (u32, u32, u32), bits: &[(u32, u32)]) -> Vec<u8> {
    let mut bytes = header_bytes(dims.0, dims.1, dims.2, 1e-3, 2.61e9, 18e6);
    for (re, im) in bits {
        bytes.extend_from_slice(&re.to_le_bytes());
        bytes.extend_from_slice(&im.to_le_bytes());
    }
    bytes
}

fn finite_bits() -> impl Strategy<Value = u32> {
    any::<u32>().prop_filter("finite", |b| f32::from_bits(*b).is_finite())
}

#[test]
fn header_is_forty_one_bytes() {
    assert_eq!(MAGIC, *b"CSIT\x01");
    let bytes = file_from_bits((1, 1, 2), &[(0, 0), (0, 0)]);
    assert_eq!(bytes.len(), 41 + 16);
    let t = read_csi(&mut bytes.as_slice()).unwrap();
    assert_eq!(t.dims(), Dims::new(1, 1, 2));
    assert_eq!(t.meta(), CsiMeta::new(1e-3, 2.61e9, 18e6));
}

#[test]
fn payload_is_row_major_time_antenna_subcarrier() {
    let bits: Vec<(u32, u32)> = (0..12).map(|k| ((k as f32).to_bits(), (-(k as f32)).to_bits())).collect();
    let t = read_csi(&mut file_from_bits((2, 3, 2), &bits).as_slice()).unwrap();
    for ti in 0..2 {
        for n in 0..3 {
            for f in 0..2 {
                let k = ((ti * 3 + n) * 2 + f) as f32;
                assert_eq!(t.get(ti, n, f), Complex32::new(k, -k));
            }
        }
    }
}

#[test]
fn truncated_and_padded_files_are_rejected() {
    let full = file_from_bits((2, 1, 2), &[(0, 0); 4]);
    let short = &full[..full.len() - 3];
    assert!(matches!(
        read_csi(&mut &short[..]),
        Err(Error::Truncation { expected: 32, .. })
    ));
    let mut long = full.clone();
    long.push(0);
    assert!(read_csi(&mut long.as_slice()).is_err());
    assert!(read_csi(&mut &full[..20]).is_err());
}

#[test]
fn non_finite_gains_are_rejected() {
    for bad in [f32::NAN, f32::INFINITY, f32::NEG_INFINITY] {
        let bytes = file_from_bits((1, 1, 2), &[(0, 0), (0, bad.to_bits())]);
        assert!(matches!(
            read_csi(&mut bytes.as_slice()),
            Err(Error::Data { t: 0, n: 0, f: 1 })
        ));
    }
}

#[test]
fn invalid_header_fields_are_rejected() {
    let bad = [
        header_bytes(0, 1, 2, 1e-3, 2.61e9, 18e6),
        header_bytes(1, 0, 2, 1e-3, 2.61e9, 18e6),
        header_bytes(1, 1, 2, 0.0, 2.61e9, 18e6),
        header_bytes(1, 1, 2, 1e-3, -1.0, 18e6),
        header_bytes(1, 1, 2, 1e-3, 2.61e9, f64::NAN),
    ];
    for h in bad {
        let mut bytes = h;
        bytes.extend_from_slice(&[0u8; 16]);
        assert!(read_csi(&mut bytes.as_slice()).is_err());
    }
}

#[test]
fn streaming_writer_and_window_reader_agree_with_whole_file_io() {
    let dir = tempfile::tempdir().unwrap();
    let dims = Dims::new(37, 3, 5);
    let meta = CsiMeta::new(2e-3, 3.5e9, 20e6);
    let t = CsiTensor::from_fn(dims, meta, |a, b, c| Complex32::new(a as f32 * 0.5, (b * 7 + c) as f32)).unwrap();
    let whole = dir.path().join("whole.csit");
    let streamed = dir.path().join("streamed.csit");
    write_csi(&whole, &t.view()).unwrap();
    let mut w = CsiWriter::create(&streamed, dims, meta).unwrap();
    for chunk in t.data().chunks(dims.snapshot_len() * 4) {
        w.write_snapshots(chunk).unwrap();
    }
    w.finish().unwrap();
    assert_eq!(std::fs::read(&whole).unwrap(), std::fs::read(&streamed).unwrap());

    let mut r = CsiReader::open(&whole).unwrap();
    let win = r.read_window(10, 9).unwrap();
    assert_eq!(win.first_sample(), 10);
    assert_eq!(win.view().data(), t.slice_window(10, 9).unwrap().data());
    assert!(r.read_window(30, 8).is_err());
    assert!(r.read_window(0, 0).is_err());
}

#[test]
fn unfinished_streaming_writer_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let dims = Dims::new(4, 1, 2);
    let mut w = CsiWriter::create(dir.path().join("x.csit"), dims, CsiMeta::reference()).unwrap();
    w.write_snapshots(&[Complex32::default(); 2]).unwrap();
    assert!(w.finish().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_of_load_is_byte_identical(
        n_time in 1u32..6, n_ant in 1u32..4, n_sub in 2u32..6,
        seed in prop::collection::vec((finite_bits(), finite_bits()), 120),
    ) {
        let count = (n_time * n_ant * n_sub) as usize;
        let bytes = file_from_bits((n_time, n_ant, n_sub), &seed[..count]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("in.csit");
        std::fs::write(&path, &bytes).unwrap();
        let t = load_csi(&path).unwrap();
        let mut out = Vec::new();
        write_csi_to(&mut out, &t.view()).unwrap();
        prop_assert_eq!(out, bytes);
    }

    #[test]
    fn every_magic_mutation_is_rejected(pos in 0usize..5, value: u8) {
        let mut bytes = file_from_bits((1, 1, 2), &[(0, 0), (0, 0)]);
        prop_assume!(bytes[pos] != value);
        bytes[pos] = value;
        prop_assert!(matches!(read_csi(&mut bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn slice_composition(n_time in 1usize..40, a_frac in 0.0f64..1.0, w_frac in 0.0f64..1.0, v_frac in 0.0f64..1.0) {
        let t = CsiTensor::from_fn(Dims::new(n_time, 2, 3), CsiMeta::reference(), |a, b, c| {
            Complex32::new(a as f32, (b * 3 + c) as f32)
        }).unwrap();
        let a = ((n_time - 1) as f64 * a_frac) as usize;
        let w = 1 + ((n_time - a - 1) as f64 * w_frac) as usize;
        let v = 1 + ((w - 1) as f64 * v_frac) as usize;
        let outer = t.slice_window(a, w).unwrap();
        let nested = outer.slice_window(0, v).unwrap();
        let direct = t.slice_window(a, v).unwrap();
        prop_assert_eq!(nested.data(), direct.data());
        prop_assert_eq!(nested.first_sample(), direct.first_sample());
        prop_assert!(outer.slice_window(0, w + 1).is_err());
    }
}

#[test]
fn exhaustive_single_byte_magic_fuzz() {
    let base = file_from_bits((1, 1, 2), &[(0, 0), (0, 0)]);
    for pos in 0..5 {
        for value in 0..=255u8 {
            if value == base[pos] {
                continue;
            }
            let mut bytes = base.clone();
            bytes[pos] = value;
            assert!(read_csi(&mut bytes.as_slice()).is_err(), "byte {pos} = {value}");
        }
    }
}
