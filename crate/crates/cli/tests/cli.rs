//! Binary behaviour: exit codes, output directory precedence and headers.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_csi-prism");

fn run(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("CSI_PRISM_OUT");
    if let Some(p) = env_out {
        cmd.env("CSI_PRISM_OUT", p);
    }
    cmd.output().unwrap()
}

fn synth_small(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("small.kv");
    std::fs::write(&spec, "n_time=400\nn_ant=4\nn_sub=16\nseed=3\ntaps=0:1:clarke:3;200:0.3\n").unwrap();
    let out = run(&["synth", "-o", dir.to_str().unwrap(), spec.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("small.csit")
}

#[test]
fn inspect_reports_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let csi = synth_small(dir.path());
    assert!(dir.path().join("small.meta").is_file());
    let out = run(&["inspect", csi.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("400 x 4 x 16"));
}

#[test]
fn out_flag_beats_environment_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "csi=small.csit\nout_dir=from_config\nref_row=1\nref_col=1\n").unwrap();
    let c = cfg.to_str().unwrap();
    let env_dir = dir.path().join("from_env");
    let flag_dir = dir.path().join("from_flag");

    assert!(run(&["analyze", "-c", c], None).status.success());
    assert!(dir.path().join("from_config/rms_ds.csv").is_file());
    assert!(run(&["analyze", "-c", c], Some(&env_dir)).status.success());
    assert!(env_dir.join("rms_ds.csv").is_file());
    let flag = flag_dir.to_str().unwrap();
    assert!(run(&["analyze", "-c", c, "-o", flag], Some(&env_dir)).status.success());
    assert!(flag_dir.join("manifest.json").is_file());

    let text = std::fs::read_to_string(flag_dir.join("rms_ds.csv")).unwrap();
    let header = text.lines().next().unwrap();
    let parts: Vec<&str> = header.split(' ').collect();
    assert_eq!(&parts[..2], &["#", "csi-prism"]);
    assert_eq!(parts[2], env!("CARGO_PKG_VERSION"));
    assert_eq!(parts[3].len(), 16);
    let manifest = std::fs::read_to_string(flag_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains(parts[3]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    // Missing input and bad flags are usage errors.
    assert_eq!(run(&["analyze", "--csi", "/no/such.csit", "-o", o], None).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--bogus"], None).status.code(), Some(2));
    let csi = synth_small(dir.path());
    let c = csi.to_str().unwrap();
    assert_eq!(run(&["analyze", "--csi", c, "-o", o, "--threads", "0"], None).status.code(), Some(2));

    // Malformed recording.
    let bad = dir.path().join("bad.csit");
    std::fs::write(&bad, b"CSIX\x01garbage").unwrap();
    let r = run(&["analyze", "--csi", bad.to_str().unwrap(), "-o", o], None);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).starts_with("error:"));

    // Window longer than the recording.
    assert_eq!(
        run(&["analyze", "--csi", c, "-o", o, "--window", "1000", "--set", "ref_row=1", "--set", "ref_col=1"], None)
            .status
            .code(),
        Some(2)
    );

    // Output directory that cannot be created.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let inside = blocker.join("sub");
    assert_eq!(
        run(&["analyze", "--csi", c, "-o", inside.to_str().unwrap(), "--set", "ref_row=1", "--set", "ref_col=1"], None)
            .status
            .code(),
        Some(1)
    );

    assert_eq!(
        run(&["analyze", "--csi", c, "-o", o, "--set", "ref_row=1", "--set", "ref_col=1"], None).status.code(),
        Some(0)
    );
}

#[test]
fn synth_rejects_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.kv");
    std::fs::write(&spec, "taps=0:1\nflavour=odd\n").unwrap();
    let out = run(&["synth", "-o", dir.path().to_str().unwrap(), spec.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}
