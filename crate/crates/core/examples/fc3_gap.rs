//! The frustrated triangle: the local polytope bound is 0, the optimum is 1,
//! and one triplet closes the gap.

use mapt::driver::{run, Method, RunConfig};
use mapt::oracle::{brute_min, fc3};

fn main() {
    let model = fc3();
    let truth = brute_min(&model).expect("8 labelings");
    println!("optimum {} at {:?}", truth.min_energy, truth.argmin.0);
    for method in [Method::None, Method::Sac, Method::Fr, Method::Fr1] {
        let out = run(model.clone(), &RunConfig { method, ..RunConfig::default() }).expect("valid config");
        println!(
            "{:>4}: bound {:.6} with {} triplet(s), stop {:?}",
            method.name(),
            out.trace.final_bound().unwrap(),
            out.model.num_triplets(),
            out.stop
        );
    }
}
