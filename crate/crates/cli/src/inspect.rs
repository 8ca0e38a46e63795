use std::path::Path;

use csi_prism::csit::CsiReader;
use csi_prism::synth::meta_path;

use crate::CliError;

pub fn run(path: &Path) -> Result<(), CliError> {
    let reader = CsiReader::open(path)?;
    let h = reader.header();
    let (d, m) = (h.dims, h.meta);
    let dtau = m.delay_resolution();
    println!("file      {}", path.display());
    println!(
        "dims      {} x {} x {} (time x antenna x subcarrier)",
        d.n_time, d.n_ant, d.n_sub
    );
    println!("dt        {} s", m.dt);
    println!("duration  {} s", d.n_time as f64 * m.dt);
    println!("f_c       {} Hz", m.f_c);
    println!("bw        {} Hz", m.bw);
    println!("payload   {} bytes", h.payload_bytes());
    println!(
        "\u{394}\u{3c4} = {:.1} ns, span {:.2} \u{b5}s",
        dtau * 1e9,
        dtau * d.n_sub as f64 * 1e6
    );
    let sidecar = meta_path(path);
    if sidecar.is_file() {
        println!("sidecar   {}", sidecar.display());
    }
    Ok(())
}
