use csi_prism::kv::KvMap;
use csi_prism::synth::SynthConfig;

use crate::{resolve_out, CliError, SynthArgs};

pub fn run(args: SynthArgs) -> Result<(), CliError> {
    let out = resolve_out(args.out.clone(), Some(".".into()));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io {
        context: format!("creating {}", out.display()),
        source: e,
    })?;
    for spec in &args.specs {
        let text = std::fs::read_to_string(spec).map_err(|e| {
            CliError::Usage(format!("cannot read spec {}: {e}", spec.display()))
        })?;
        let mut kv = KvMap::parse(&text)?;
        for pair in &args.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--set expects key=value, got {pair:?}"))
            })?;
            kv.insert(k.trim(), v.trim());
        }
        let cfg = SynthConfig::from_kv(&kv)
            .map_err(|e| CliError::Usage(format!("{}: {e}", spec.display())))?;
        let stem = spec.file_stem().unwrap_or_default().to_string_lossy();
        let csit = out.join(format!("{stem}.csit"));
        for path in cfg.write(&csit)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}
