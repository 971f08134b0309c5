//! Runs the three tighteners and plain ascent on generated frustrated
//! cycles and on the bundled spin glass, printing final bounds.

use std::path::PathBuf;

use mapt::driver::{run, Method, RunConfig};
use mapt::io::{read_model, InputFormat};
use mapt::oracle::gen_frustrated;
use mapt::Relaxation;

fn row(name: &str, model: &Relaxation) {
    let mut line = format!("{name:<18}");
    for method in [Method::None, Method::Fr1, Method::Fr, Method::Sac] {
        let cfg = RunConfig { method, time_limit: 30.0, ..RunConfig::default() };
        let out = run(model.clone(), &cfg).unwrap();
        line.push_str(&format!(
            " {:>4} {:>9.5} ({:>2})",
            method.name(),
            out.trace.final_bound().unwrap(),
            out.model.num_triplets()
        ));
    }
    println!("{line}");
}

fn main() {
    println!("final bound (triplets added) per method");
    for len in [3, 5, 7, 9] {
        row(&format!("cycle len {len}"), &gen_frustrated(len, 3, len as u64).unwrap());
    }
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/spin_glass_5x5.uai");
    row("spin glass 5x5", &read_model(&path, InputFormat::Uai).unwrap());
}
