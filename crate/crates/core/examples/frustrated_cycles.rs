//! Builds the signed partition graph of a generated frustrated cycle and
//! compares the spanning-forest search with the depth-bounded one.

use mapt::frustrated::{build_signed_graph, cycle_candidates, find_cycles_fr, find_cycles_fr1};
use mapt::oracle::{all_frustrated_cycles, gen_frustrated};

fn main() {
    let model = gen_frustrated(7, 3, 42).unwrap();
    let graph = build_signed_graph(&model, 0.1);
    let negative = graph.edges().iter().filter(|e| e.is_negative()).count();
    println!(
        "{} partition nodes, {} edges ({negative} negative)",
        graph.num_nodes(),
        graph.edges().len()
    );
    println!("exhaustive search: {:?}", all_frustrated_cycles(&graph, 7));

    let fr1 = find_cycles_fr1(&graph);
    println!("spanning forest: {:?}", fr1.iter().map(|c| &c.vars).collect::<Vec<_>>());
    for d in [1, 2, 3] {
        let fr = find_cycles_fr(&graph, d);
        println!("depth {d}: {:?}", fr.iter().map(|c| &c.vars).collect::<Vec<_>>());
    }
    for set in cycle_candidates(&fr1) {
        println!("triangulation: {:?}", set.genuine().collect::<Vec<_>>());
    }
}
