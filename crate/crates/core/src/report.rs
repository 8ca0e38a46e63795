//! CSV exports of an [`Analysis`].
//!
//! Every file starts with a caller-supplied `#` header line. Numbers use
//! the shortest round-trip representation, so identical results give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::Analysis;
use crate::spatial::jakes_curve;
use crate::stats::{mean, sample_std};

/// Largest element spacing on the Jakes reference curve, wavelengths.
pub const JAKES_MAX_LAMBDAS: f64 = 5.0;
pub const JAKES_STEP: f64 = 0.01;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(out: &mut String, first: impl std::fmt::Display, values: &[f64]) {
    let _ = write!(out, "{first}");
    for v in values {
        let _ = write!(out, ",{v}");
    }
    out.push('\n');
}

struct Writer<'a> {
    dir: &'a Path,
    header: &'a str,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn emit(&mut self, name: &str, body: String) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = String::with_capacity(body.len() + self.header.len() + 1);
        text.push_str(self.header);
        text.push('\n');
        text.push_str(&body);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

fn axis_header(label: &str, axis: impl Iterator<Item = f64>) -> String {
    let mut s = String::from(label);
    for a in axis {
        let _ = write!(s, ",{a}");
    }
    s.push('\n');
    s
}

fn cdf_body(label: &str, cdf: &crate::dispersion::CdfSummary, scale: f64) -> String {
    let mut s = format!("{label},cdf\n");
    for (v, c) in cdf.values.iter().zip(&cdf.cdf) {
        let _ = writeln!(s, "{},{c}", v * scale);
    }
    s
}

/// Writes every report of `a` into `dir`, returning the paths in a fixed
/// order. `header` is the version and hash comment, including its leading `#`.
pub fn write_reports(a: &Analysis, dir: &Path, header: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = Writer {
        dir,
        header,
        written: Vec::new(),
    };
    let n_sub = a.dims.n_sub;
    let freq_mhz = (0..n_sub).map(|k| k as f64 * a.meta.bw / n_sub as f64 / 1e6);
    let delay_ns = (0..n_sub).map(|k| k as f64 / a.meta.bw * 1e9);

    for (name, coherent) in [("ctf_power.csv", false), ("ctf_coherent.csv", true)] {
        let mut s = axis_header("t_s\\f_mhz", freq_mhz.clone());
        for (i, c) in a.ctf.iter().enumerate() {
            row(&mut s, a.window_time(i), if coherent { &c.coherent } else { &c.power });
        }
        w.emit(name, s)?;
    }

    let mut s = axis_header("t_s\\delay_ns", delay_ns.clone());
    for (i, p) in a.pdps.iter().enumerate() {
        row(&mut s, a.window_time(i), &p.power);
    }
    w.emit("pdp.csv", s)?;

    let mut s = String::from("t_s,dist3d_m,mean_delay_ns,rms_ds_ns,integrated_power\n");
    for p in &a.dispersion.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            p.t,
            opt(p.dist3d),
            p.mean_delay * 1e9,
            p.rms_spread * 1e9,
            p.power
        );
    }
    w.emit("rms_ds.csv", s)?;
    if let Some(cdf) = &a.rms_cdf {
        w.emit("rms_ds_cdf.csv", cdf_body("rms_ds_ns", cdf, 1e9))?;
    }

    let mut s = axis_header("t_s", (0..a.gamma.len()).map(|i| a.window_time(i)));
    for i in 0..a.gamma.len() {
        row(&mut s, a.window_time(i), a.gamma.row(i));
    }
    w.emit("gamma.csv", s)?;

    if let Some(spans) = &a.spans {
        let mut s = String::from("t_s,dist3d_m,d_sd_m\n");
        for (i, sp) in spans.spans.iter().enumerate() {
            let t = a.window_time(i);
            let d = a.track.as_ref().map(|tr| tr.nearest(t).dist3d);
            let _ = writeln!(s, "{t},{},{}", opt(d), sp.d_sd);
        }
        w.emit("spans.csv", s)?;
        if let Some(cdf) = &spans.cdf {
            w.emit("spans_cdf.csv", cdf_body("d_sd_m", cdf, 1.0))?;
        }
    }

    let corr = &a.correlation;
    let n_ant = corr.matrix.len();
    let mag = corr.matrix.magnitude();
    let mut s = axis_header("element", (0..n_ant).map(|n| n as f64));
    for m in 0..n_ant {
        row(&mut s, m, &mag[m * n_ant..(m + 1) * n_ant]);
    }
    w.emit("corr_mag.csv", s)?;
    if let (Some(map), Some(layout)) = (&corr.map, &corr.layout) {
        let mut s = axis_header("row\\col", (0..layout.cols).map(|c| c as f64));
        for (r, vals) in map.iter().enumerate() {
            row(&mut s, r, vals);
        }
        w.emit("corr_map.csv", s)?;

        let (rr, rc) = a.config.reference;
        let reference = rr * layout.cols + rc;
        let mut s = String::from("element,spacing_lambda,corr_mag,jakes\n");
        for e in 0..n_ant {
            let d = layout.distance(reference, e) / corr.lambda;
            let j = crate::spatial::bessel_j0(2.0 * std::f64::consts::PI * d).powi(2);
            let _ = writeln!(s, "{e},{d},{},{j}", corr.matrix.get(reference, e).norm());
        }
        w.emit("corr_distance.csv", s)?;
    }
    let mut s = String::from("spacing_lambda,j0_sq\n");
    for (d, j) in jakes_curve(JAKES_MAX_LAMBDAS, JAKES_STEP) {
        let _ = writeln!(s, "{d},{j}");
    }
    w.emit("jakes.csv", s)?;

    let dop = &a.doppler;
    let mut s = axis_header("nu_hz\\f_mhz", freq_mhz);
    for (i, nu) in dop.nu.iter().enumerate() {
        row(&mut s, nu, &dop.b_power[i * n_sub..(i + 1) * n_sub]);
    }
    w.emit("doppler_b.csv", s)?;
    let mut s = axis_header("nu_hz\\delay_ns", delay_ns);
    for (i, nu) in dop.nu.iter().enumerate() {
        row(&mut s, nu, &dop.s_power[i * n_sub..(i + 1) * n_sub]);
    }
    w.emit("doppler_s.csv", s)?;

    let mut s = String::from("t_s,dist3d_m,se_bps_hz,max_norm_power_db\n");
    for p in &a.se.points {
        let _ = writeln!(s, "{},{},{},{}", p.t, opt(p.dist3d), p.se, p.max_norm_power_db);
    }
    w.emit("se.csv", s)?;

    if let Some(track) = &a.track {
        let mut s = String::from("t_s,east_m,north_m,up_m,dist3d_m,speed_mps\n");
        for p in track.points() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                p.t, p.east, p.north, p.up, p.dist3d, p.speed
            );
        }
        w.emit("track.csv", s)?;
    }
    if let Some(wob) = &a.wobble {
        let mut s = String::from("t_s,pitch_sigma_deg,roll_sigma_deg\n");
        for ((t, p), r) in wob.t.iter().zip(&wob.pitch_sigma).zip(&wob.roll_sigma) {
            let _ = writeln!(s, "{t},{p},{r}");
        }
        w.emit("wobble.csv", s)?;
    }
    Ok(w.written)
}

/// Mean and sample standard deviation of one reported metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub name: &'static str,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

fn summarize(name: &'static str, xs: &[f64]) -> Option<MetricSummary> {
    let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    (!finite.is_empty()).then(|| MetricSummary {
        name,
        count: finite.len(),
        mean: mean(&finite),
        std: if finite.len() > 1 { sample_std(&finite) } else { 0.0 },
    })
}

/// Per-metric mean and standard deviation, in a fixed order.
pub fn summary(a: &Analysis) -> Vec<MetricSummary> {
    let ds = &a.dispersion.points;
    let mut out = vec![
        summarize("rms_ds_ns", &ds.iter().map(|p| p.rms_spread * 1e9).collect::<Vec<_>>()),
        summarize("mean_delay_ns", &ds.iter().map(|p| p.mean_delay * 1e9).collect::<Vec<_>>()),
        summarize("integrated_power", &ds.iter().map(|p| p.power).collect::<Vec<_>>()),
    ];
    if let Some(spans) = &a.spans {
        out.push(summarize(
            "d_sd_m",
            &spans.spans.iter().map(|s| s.d_sd).collect::<Vec<_>>(),
        ));
    }
    let n = a.correlation.matrix.len();
    let off: Vec<f64> = (0..n)
        .flat_map(|m| (m + 1..n).map(move |k| (m, k)))
        .map(|(m, k)| a.correlation.matrix.get(m, k).norm())
        .collect();
    out.push(summarize("corr_offdiag_mag", &off));
    out.push(summarize("se_bps_hz", &a.se.se_values()));
    out.push(summarize(
        "max_norm_power_db",
        &a.se.points.iter().map(|p| p.max_norm_power_db).collect::<Vec<_>>(),
    ));
    if let Some(track) = &a.track {
        let pts = track.points();
        out.push(summarize("dist3d_m", &pts.iter().map(|p| p.dist3d).collect::<Vec<_>>()));
        out.push(summarize("speed_mps", &pts.iter().map(|p| p.speed).collect::<Vec<_>>()));
    }
    if let Some(w) = &a.wobble {
        out.push(summarize("pitch_sigma_deg", &w.pitch_sigma));
        out.push(summarize("roll_sigma_deg", &w.roll_sigma));
    }
    out.into_iter().flatten().collect()
}
