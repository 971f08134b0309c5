//! Reads a UAI model (default: the bundled 5x5 spin glass) and prints the
//! bound trace of a SAC run as CSV.
//!
//! `cargo run --example tighten_uai -- path/to/model.uai`

use std::path::PathBuf;

use mapt::driver::{run_file, write_trace, Method, RunConfig};
use mapt::io::InputFormat;

fn main() {
    let path = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/spin_glass_5x5.uai")
    });
    let cfg = RunConfig { method: Method::Sac, time_limit: 30.0, ..RunConfig::default() };
    let out = run_file(&path, InputFormat::Uai, &cfg).unwrap_or_else(|e| {
        eprintln!("{}: {e}", path.display());
        std::process::exit(1);
    });
    write_trace(&out.trace, std::io::stdout().lock()).unwrap();
    eprintln!("stopped: {:?}, {} triplets", out.stop, out.model.num_triplets());
}
