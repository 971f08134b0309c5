//! Runs one SAC probe on the frustrated triangle and prints the raw and
//! minimal deletion traces together with the clusters they yield.

use mapt::csp::{ac3, build_csp, fix_label, minimal_trace};
use mapt::oracle::fc3;
use mapt::sac::{find_triplets, probe};
use mapt::schedule::Selection;

fn main() {
    let model = fc3();
    let eps = 0.5;
    let (closure, t) = ac3(&build_csp(&model, eps));
    assert!(!t.is_wipeout(), "plain arc consistency holds");

    let (_, raw) = ac3(&fix_label(&closure, 0, 0).unwrap());
    println!("fix x0 = 0, raw trace:");
    for (var, label, via) in raw.steps() {
        println!("  delete ({var}, {label}) via {via:?}");
    }
    let min = minimal_trace(&raw).unwrap();
    println!("minimal trace keeps {} of {} deletions", min.records.len(), raw.records.len());

    let res = probe(&closure, 0, 0, 3);
    println!("clusters: {:?}", res.clusters.genuine().collect::<Vec<_>>());

    let found = find_triplets(&model, eps, 3, &Selection::default());
    for node in &found.nodes {
        println!(
            "node {}: {} of {} labels wipe out{}",
            node.r,
            node.covered.len(),
            node.domain.len(),
            if node.full_coverage() { " (full coverage)" } else { "" }
        );
    }
}
