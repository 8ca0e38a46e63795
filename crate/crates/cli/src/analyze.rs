use std::path::{Path, PathBuf};
use std::time::Instant;

use csi_prism::csit::CsiReader;
use csi_prism::pipeline::{self, Analysis};
use csi_prism::report::{summary, write_reports};
use csi_prism::trajectory::load_trajectory;
use log::info;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::{init_threads, resolve_out, AnalyzeArgs, CliError, VERSION};

pub const MANIFEST: &str = "manifest.json";

/// Leading hex digits of the config hash quoted in CSV headers.
const HEADER_HASH_LEN: usize = 16;

fn file_entry(root: &Path, path: &Path) -> Result<Value, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        context: format!("hashing {}", path.display()),
        source: e,
    })?;
    let rel = path.strip_prefix(root).unwrap_or(path);
    Ok(json!({
        "path": rel.to_string_lossy(),
        "bytes": bytes.len(),
        "sha256": hex(&Sha256::digest(&bytes)),
    }))
}

fn run_entry(
    a: &Analysis,
    csi: &Path,
    trajectory: Option<&Path>,
    root: &Path,
    files: &[PathBuf],
) -> Result<Value, CliError> {
    let mut metrics = Map::new();
    for m in summary(a) {
        metrics.insert(
            m.name.to_string(),
            json!({ "count": m.count, "mean": m.mean, "std": m.std }),
        );
    }
    let files = files
        .iter()
        .map(|f| file_entry(root, f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({
        "csi": csi.to_string_lossy(),
        "trajectory": trajectory.map(|t| t.to_string_lossy().into_owned()),
        "dims": [a.dims.n_time, a.dims.n_ant, a.dims.n_sub],
        "dt_s": a.meta.dt,
        "f_c_hz": a.meta.f_c,
        "bw_hz": a.meta.bw,
        "windows": a.starts.len(),
        "track_alignment": a.track.as_ref().map(|_| "nearest-timestamp"),
        "wobble_window_records": a.wobble.as_ref().map(|w| w.window),
        "noise_model": a.se.noise.to_string(),
        "noise_power": a.se.noise_power,
        "span_speed_mps": a.spans.as_ref().and_then(|s| s.speed),
        "summary": metrics,
        "files": files,
    }))
}

pub fn run(args: AnalyzeArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(&args)?;
    init_threads(args.threads.or(cfg.threads))?;
    for (csi, traj) in &cfg.inputs {
        for p in std::iter::once(csi).chain(traj) {
            if !p.is_file() {
                return Err(CliError::Usage(format!("input not found: {}", p.display())));
            }
        }
    }
    let out = resolve_out(args.out.clone(), cfg.out_dir.clone());
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io {
        context: format!("creating {}", out.display()),
        source: e,
    })?;
    let hash = cfg.hash();
    let header = format!("# csi-prism {VERSION} {}", &hash[..HEADER_HASH_LEN]);

    let multi = cfg.inputs.len() > 1;
    let mut runs = Vec::new();
    for (csi, traj) in &cfg.inputs {
        let started = Instant::now();
        let dir = if multi {
            out.join(csi.file_stem().unwrap_or_default())
        } else {
            out.clone()
        };
        let flight = traj.as_ref().map(load_trajectory).transpose()?;
        let mut reader = CsiReader::open(csi)?;
        let analysis = pipeline::analyze(&mut reader, flight.as_ref(), &cfg.analysis)?;
        let files = write_reports(&analysis, &dir, &header)?;
        info!(
            "{}: {} files in {:.1} s",
            csi.display(),
            files.len(),
            started.elapsed().as_secs_f64()
        );
        runs.push(run_entry(&analysis, csi, traj.as_deref(), &out, &files)?);
    }

    let config: Map<String, Value> = cfg
        .canonical
        .iter()
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    let manifest = json!({
        "tool": "csi-prism",
        "version": VERSION,
        "config_hash": hash,
        "config": config,
        "runs": runs,
    });
    let path = out.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })?;
    println!("wrote {} run(s) to {}", runs.len(), out.display());
    Ok(())
}
