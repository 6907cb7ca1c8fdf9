#![allow(dead_code)]

use copath_core::io::generate::{generate_synthetic, GeneratorSpec};
use copath_core::model::Instance;
use copath_core::oracle::search_space_size;
use copath_core::scoring::ThresholdCombiner;

/// Largest oracle space accepted for randomized cross-checks.
pub const SPACE_CAP: u128 = 200_000;

/// A small random instance: at most 3 graphs of at most 8 nodes, at most 3
/// options per node, window widths at most 3 and interaction density 0.3.
pub fn small_instance(seed: u64) -> Instance {
    let graphs = 1 + (seed % 3) as usize;
    let nodes = 1 + ((seed / 3) % 8) as usize;
    let spec = GeneratorSpec {
        seed,
        graph_count: graphs,
        nodes_per_graph: nodes,
        branching: 0.4,
        options_per_node: 3,
        resource_count: 6,
        interaction_density: 0.3,
        interaction_range: Some((-12, 4)),
        effectiveness_range: (-2, 9),
        amount_range: (5, 25),
        t_min_max: 2,
        max_window_width: 3,
        start_spread: 3,
        combiner: ThresholdCombiner::new(1 + seed % 4, 10),
        ..GeneratorSpec::default()
    };
    generate_synthetic(&spec)
}

/// Instances from consecutive seeds whose oracle space stays under [`SPACE_CAP`].
pub fn tractable_instances(first_seed: u64, count: usize) -> Vec<(u64, Instance)> {
    (first_seed..)
        .map(|s| (s, small_instance(s)))
        .filter(|(_, i)| search_space_size(i).is_ok_and(|n| n <= SPACE_CAP))
        .take(count)
        .collect()
}
