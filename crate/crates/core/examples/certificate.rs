//! Builds the reparameterization certified by a probe trace and checks it:
//! no factor minimum drops, `θ_r(s)` rises by the promised amount and every
//! labeling keeps its energy. Uses the frustrated triangle (a path-shaped
//! trace, gain ε) and a bundled instance whose trace branches (gain ε/2).

use std::path::Path;

use mapt::certificate::{
    add_trace_triplets, build_certificate, build_certificate_doubling, verify_certificate,
};
use mapt::csp::{ac3, build_csp};
use mapt::io::{read_model, InputFormat};
use mapt::oracle::fc3;
use mapt::sac::probe;
use mapt::Relaxation;

fn show(name: &str, model: &Relaxation, r: usize, s: usize, eps: f64) {
    let (closure, _) = ac3(&build_csp(model, eps));
    let trace = probe(&closure, r, s, usize::MAX).trace.expect("probe wipes out");
    let mut m = model.clone();
    add_trace_triplets(&mut m, &trace).unwrap();
    for (label, cert) in [
        ("branching", build_certificate(&m, &trace, eps).unwrap()),
        ("doubling", build_certificate_doubling(&m, &trace, eps).unwrap()),
    ] {
        let report = verify_certificate(&m, &cert.messages, r, s, cert.gain).unwrap();
        let shape = match label {
            "branching" => format!(", max B {}", cert.max_branching),
            _ => String::new(),
        };
        println!("{name}, {label}: {} deletions{shape}, gain {}", cert.dag_nodes, cert.gain);
        println!("{report}\n");
    }
}

fn main() {
    show("frustrated triangle", &fc3(), 0, 0, 0.5);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/branching.native");
    let model = read_model(&path, InputFormat::Native).unwrap();
    show("branching instance", &model, 2, 0, 0.4);
}
