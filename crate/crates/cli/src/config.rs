//! Run configuration: `key=value` file, flag overrides, canonical text and
//! its hash.

use std::path::{Path, PathBuf};

use csi_prism::geo::SiteConfig;
use csi_prism::kv::KvMap;
use csi_prism::pipeline::AnalysisConfig;
use sha2::{Digest, Sha256};

use crate::{AnalyzeArgs, CliError};

const KNOWN_KEYS: &[&str] = &[
    "csi",
    "trajectory",
    "out_dir",
    "threads",
    "window",
    "stride",
    "gate_db",
    "c_th",
    "span_rule",
    "span_speed",
    "noise",
    "decimation",
    "delay_window",
    "doppler_t0",
    "doppler_w",
    "corr_t0",
    "corr_w",
    "corr_mode",
    "ura_rows",
    "ura_cols",
    "spacing_m",
    "ref_row",
    "ref_col",
    "bs_lat",
    "bs_lon",
    "bs_height_agl",
    "ground_asl",
    "wobble_window",
    "block_samples",
];

/// Keys that do not change any computed value.
const UNHASHED: &[&str] = &["csi", "trajectory", "out_dir", "threads", "block_samples"];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<(PathBuf, Option<PathBuf>)>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub analysis: AnalysisConfig,
    /// Effective settings, defaults filled in.
    pub canonical: KvMap,
}

fn split_paths(s: &str, base: &Path) -> Vec<PathBuf> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| base.join(p))
        .collect()
}

fn set_pair(kv: &mut KvMap, pair: &str) -> Result<(), CliError> {
    let (k, v) = pair
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {pair:?}")))?;
    kv.insert(k.trim(), v.trim());
    Ok(())
}

fn usage(e: csi_prism::Error) -> CliError {
    CliError::Usage(format!("config: {e}"))
}

impl RunConfig {
    pub fn from_args(args: &AnalyzeArgs) -> Result<Self, CliError> {
        let (mut kv, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!(
                    "cannot read config {}: {e}",
                    path.display()
                )))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (KvMap::parse(&text).map_err(usage)?, base)
            }
            None => (KvMap::new(), PathBuf::new()),
        };
        // Paths in the file are relative to it; flag paths to the cwd.
        let mut csi = kv.get("csi").map(|s| split_paths(s, &base)).unwrap_or_default();
        let mut traj = kv
            .get("trajectory")
            .map(|s| split_paths(s, &base))
            .unwrap_or_default();
        let file_out = kv.get("out_dir").map(|s| base.join(s));
        for pair in &args.set {
            set_pair(&mut kv, pair)?;
        }
        if let Some(s) = args.set.iter().find_map(|p| p.strip_prefix("csi=")) {
            csi = split_paths(s, Path::new(""));
        }
        if let Some(s) = args.set.iter().find_map(|p| p.strip_prefix("trajectory=")) {
            traj = split_paths(s, Path::new(""));
        }
        if !args.csi.is_empty() {
            csi = args.csi.clone();
        }
        if !args.trajectory.is_empty() {
            traj = args.trajectory.clone();
        }
        let flags: [(&str, Option<String>); 6] = [
            ("window", args.window.map(|v| v.to_string())),
            ("stride", args.stride.map(|v| v.to_string())),
            ("gate_db", args.gate_db.map(|v| v.to_string())),
            ("c_th", args.c_th.map(|v| v.to_string())),
            ("noise", args.noise.clone()),
            ("decimation", args.decimation.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                kv.insert(k, v);
            }
        }
        if let Some(key) = kv.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(CliError::Usage(format!("unknown config key {key:?}")));
        }

        if csi.is_empty() {
            return Err(CliError::Usage("no CSI input (use --csi or csi= in the config)".into()));
        }
        if !traj.is_empty() && traj.len() != csi.len() {
            return Err(CliError::Usage(format!(
                "{} CSI inputs but {} trajectories",
                csi.len(),
                traj.len()
            )));
        }
        let inputs = csi
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, traj.get(i).cloned()))
            .collect();
        let out_dir = file_out.or_else(|| kv.get("out_dir").map(PathBuf::from));

        let threads = kv.parse_opt("threads").map_err(usage)?;
        let analysis = analysis_config(&kv)?;
        let canonical = canonical(&analysis);
        Ok(Self {
            inputs,
            out_dir,
            threads,
            analysis,
            canonical,
        })
    }

    /// SHA-256 over the canonical settings that affect results.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical.iter() {
            if !UNHASHED.contains(&k) {
                h.update(k.as_bytes());
                h.update(b"=");
                h.update(v.as_bytes());
                h.update(b"\n");
            }
        }
        hex(&h.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn analysis_config(kv: &KvMap) -> Result<AnalysisConfig, CliError> {
    let d = AnalysisConfig::default();
    let window: usize = kv.parse_or("window", d.window).map_err(usage)?;
    let site = SiteConfig {
        bs_lat: kv.parse_or("bs_lat", d.site.bs_lat).map_err(usage)?,
        bs_lon: kv.parse_or("bs_lon", d.site.bs_lon).map_err(usage)?,
        bs_height_agl: kv.parse_or("bs_height_agl", d.site.bs_height_agl).map_err(usage)?,
        ground_asl: kv.parse_or("ground_asl", d.site.ground_asl).map_err(usage)?,
    };
    let ura = match (
        kv.parse_opt::<usize>("ura_rows").map_err(usage)?,
        kv.parse_opt::<usize>("ura_cols").map_err(usage)?,
    ) {
        (Some(r), Some(c)) => Some((r, c)),
        (None, None) => None,
        _ => return Err(CliError::Usage("ura_rows and ura_cols go together".into())),
    };
    let cfg = AnalysisConfig {
        window,
        stride: kv.parse_or("stride", window).map_err(usage)?,
        gate_db: kv.parse_or("gate_db", d.gate_db).map_err(usage)?,
        c_th: kv.parse_or("c_th", d.c_th).map_err(usage)?,
        span_rule: kv.parse_or("span_rule", d.span_rule).map_err(usage)?,
        span_speed: kv.parse_or("span_speed", d.span_speed).map_err(usage)?,
        noise: kv.parse_or("noise", d.noise).map_err(usage)?,
        decimation: kv.parse_or("decimation", d.decimation).map_err(usage)?,
        delay_window: kv.parse_or("delay_window", d.delay_window).map_err(usage)?,
        doppler_t0: kv.parse_or("doppler_t0", d.doppler_t0).map_err(usage)?,
        doppler_w: kv.parse_or("doppler_w", d.doppler_w).map_err(usage)?,
        corr_t0: kv.parse_or("corr_t0", d.corr_t0).map_err(usage)?,
        corr_w: kv.parse_opt("corr_w").map_err(usage)?,
        corr_mode: kv.parse_or("corr_mode", d.corr_mode).map_err(usage)?,
        ura,
        spacing: kv.parse_opt("spacing_m").map_err(usage)?,
        reference: (
            kv.parse_or("ref_row", d.reference.0).map_err(usage)?,
            kv.parse_or("ref_col", d.reference.1).map_err(usage)?,
        ),
        site,
        wobble_window: kv.parse_opt("wobble_window").map_err(usage)?,
        block_samples: kv.parse_or("block_samples", d.block_samples).map_err(usage)?,
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn canonical(c: &AnalysisConfig) -> KvMap {
    let mut kv = KvMap::new();
    kv.insert("window", c.window);
    kv.insert("stride", c.stride);
    kv.insert("gate_db", c.gate_db);
    kv.insert("c_th", c.c_th);
    kv.insert("span_rule", c.span_rule);
    kv.insert("span_speed", c.span_speed);
    kv.insert("noise", c.noise);
    kv.insert("decimation", c.decimation);
    kv.insert("delay_window", c.delay_window);
    kv.insert("doppler_t0", c.doppler_t0);
    kv.insert("doppler_w", c.doppler_w);
    kv.insert("corr_t0", c.corr_t0);
    kv.insert("corr_w", c.corr_w.map_or("window".to_string(), |w| w.to_string()));
    kv.insert("corr_mode", c.corr_mode);
    match c.ura {
        Some((r, k)) => {
            kv.insert("ura_rows", r);
            kv.insert("ura_cols", k);
        }
        None => {
            kv.insert("ura_rows", "auto");
            kv.insert("ura_cols", "auto");
        }
    }
    kv.insert(
        "spacing_m",
        c.spacing.map_or("half-wavelength".to_string(), |s| s.to_string()),
    );
    kv.insert("ref_row", c.reference.0);
    kv.insert("ref_col", c.reference.1);
    kv.insert("bs_lat", c.site.bs_lat);
    kv.insert("bs_lon", c.site.bs_lon);
    kv.insert("bs_height_agl", c.site.bs_height_agl);
    kv.insert("ground_asl", c.site.ground_asl);
    kv.insert(
        "wobble_window",
        c.wobble_window.map_or("auto".to_string(), |w| w.to_string()),
    );
    kv.insert("block_samples", c.block_samples);
    kv
}
