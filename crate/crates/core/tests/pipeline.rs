//! End-to-end analysis: streamed reads, in-memory views and thread counts
//! must all produce the same report bytes.

use std::path::Path;

use csi_prism::csit::{write_csi, CsiReader};
use csi_prism::geo::{LocalFrame, SiteConfig};
use csi_prism::pipeline::{analyze, Analysis, AnalysisConfig, SpanSpeed};
use csi_prism::report::write_reports;
use csi_prism::synth::{gen_nonstationary_switch, DopplerMode, Tap, TapSpec};
use csi_prism::trajectory::{TrajectoryLog, TrajectoryRecord};
use csi_prism::{CsiMeta, CsiTensor, Dims};

fn meta() -> CsiMeta {
    CsiMeta::new(1e-3, 2.61e9, 18e6)
}

fn recording() -> CsiTensor {
    let a = TapSpec::new(
        vec![
            Tap::new(0.0, 1.0, DopplerMode::Clarke { v: 3.07 }),
            Tap::new(250e-9, 0.3, DopplerMode::Static),
        ],
        11,
    );
    let b = TapSpec::new(
        vec![
            Tap::new(0.0, 1.0, DopplerMode::Clarke { v: 3.07 }),
            Tap::new(1.2e-6, 0.8, DopplerMode::Shift(-8.0)),
        ],
        12,
    );
    gen_nonstationary_switch(&a, &b, 1300, Dims::new(3000, 16, 32), meta()).unwrap()
}

/// Straight climb-out at 3 m/s east, 10 fixes per second.
fn flight() -> TrajectoryLog {
    let site = SiteConfig::reference();
    let frame = LocalFrame::new(&site);
    let records = (0..=35)
        .map(|k| {
            let t = k as f64 * 0.1;
            let (lat, lon, alt) = frame.from_enu(5.0 + 3.0 * t, 2.0, 30.0);
            TrajectoryRecord { t, lat, lon, alt_asl: alt, pitch: 1.0, roll: (k % 3) as f64, yaw: 90.0 }
        })
        .collect();
    TrajectoryLog::new(records).unwrap()
}

fn config(block_samples: usize) -> AnalysisConfig {
    AnalysisConfig {
        reference: (1, 1),
        doppler_w: 2000,
        block_samples,
        span_speed: SpanSpeed::Track,
        ..AnalysisConfig::default()
    }
}

fn report_bytes(a: &Analysis) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    let mut files: Vec<(String, Vec<u8>)> = write_reports(a, dir.path(), "# csi-prism test 0")
        .unwrap()
        .into_iter()
        .map(|p| (name(&p), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn name(p: &Path) -> String {
    p.file_name().unwrap().to_string_lossy().into_owned()
}

#[test]
fn streamed_blocks_match_in_memory_view() {
    let t = recording();
    let log = flight();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csit");
    write_csi(&path, &t.view()).unwrap();

    let mut view = t.view();
    let whole = report_bytes(&analyze(&mut view, Some(&log), &config(100_000)).unwrap());
    assert!(whole.iter().any(|(n, _)| n == "spans.csv"));
    for block in [100, 250, 999] {
        let mut reader = CsiReader::open(&path).unwrap();
        let streamed = report_bytes(&analyze(&mut reader, Some(&log), &config(block)).unwrap());
        assert_eq!(whole, streamed, "block_samples {block}");
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let t = recording();
    let log = flight();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut view = t.view();
            report_bytes(&analyze(&mut view, Some(&log), &config(500)).unwrap())
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn switch_bounds_every_span() {
    let t = recording();
    let mut view = t.view();
    let a = analyze(&mut view, None, &AnalysisConfig {
        span_speed: SpanSpeed::Fixed(3.07),
        ..config(5000)
    })
    .unwrap();
    let spans = a.spans.unwrap();
    for sp in &spans.spans {
        // Windows before the switch stop at it; windows after never reach back.
        if sp.t < 1.3 {
            assert!(sp.t_max <= 1.3 + 1e-9, "{sp:?}");
        } else {
            assert!(sp.t_min >= 1.3 - 1e-9, "{sp:?}");
        }
        assert!(sp.d_sd <= 3.07 * 3.0 + 1e-9);
    }
}

#[test]
fn too_short_recording_is_rejected() {
    let t = CsiTensor::from_fn(Dims::new(50, 4, 8), meta(), |_, _, _| num_complex::Complex32::new(1.0, 0.0)).unwrap();
    let mut view = t.view();
    assert!(analyze(&mut view, None, &AnalysisConfig::default()).is_err());
}
