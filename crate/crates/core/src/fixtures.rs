//! Reference instances, kept in sync with the JSON files under `fixtures/`.

use crate::model::{Edge, Instance, NodeSpec, PathwayGraph};
use crate::scoring::{InteractionTable, Resource, ThresholdCombiner};

/// Two graphs: `a -> b [1,2]`, `a -> c [0,0]` and `p -> q [0,3]`, no
/// interactions. The optimum (14) executes `a, c, p, q`.
pub fn tiny() -> Instance {
    Instance {
        graphs: vec![
            PathwayGraph::new("G1", vec![Edge::new("a", "b", 1, 2), Edge::new("a", "c", 0, 0)], 0),
            PathwayGraph::new("G2", vec![Edge::new("p", "q", 0, 3)], 0),
        ],
        nodes: vec![
            NodeSpec::new("a", "G1", ["r0"]),
            NodeSpec::new("b", "G1", ["r1"]),
            NodeSpec::new("c", "G1", ["r2"]),
            NodeSpec::new("p", "G2", ["r3"]),
            NodeSpec::new("q", "G2", ["r1"]),
        ],
        resources: vec![
            Resource::new("r0", 5, 20),
            Resource::new("r1", 3, 20),
            Resource::new("r2", 4, 20),
            Resource::new("r3", 2, 20),
        ],
        interactions: InteractionTable::default(),
        combiner: ThresholdCombiner::new(8, 10),
        pins: Default::default(),
    }
}

/// [`tiny`] with `r1/r3 = -10`, `r2/r3 = -20` and a time window of 2. The
/// optimum (3) switches to `a -> b`.
pub fn tiny_plus() -> Instance {
    Instance {
        interactions: InteractionTable::from_pairs([("r1", "r3", -10), ("r2", "r3", -20)]),
        combiner: ThresholdCombiner::new(2, 10),
        ..tiny()
    }
}

/// Hospital admission with a medical branch (`n2`, drug d0) and a surgical
/// branch (`n3` with d1 or d2, then surgery 2 to 4 days later), next to a
/// week of a chronic treatment alternating d3 on even and d4 on odd days.
/// d1 interacts with d3 and d2 with d4.
pub fn fig1() -> Instance {
    let mut chronic_edges = Vec::new();
    let mut nodes = vec![
        NodeSpec::new("n1", "hospital", ["admission"]),
        NodeSpec::new("n2", "hospital", ["d0"]),
        NodeSpec::new("n3", "hospital", ["d1", "d2"]),
        NodeSpec::new("n4", "hospital", ["surgery"]),
    ];
    for day in 0..7 {
        let drug = if day % 2 == 0 { "d3" } else { "d4" };
        nodes.push(NodeSpec::new(format!("c{day}"), "chronic", [drug]));
        if day > 0 {
            chronic_edges.push(Edge::new(format!("c{}", day - 1), format!("c{day}"), 1, 1));
        }
    }
    Instance {
        graphs: vec![
            PathwayGraph::new(
                "hospital",
                vec![
                    Edge::new("n1", "n2", 0, 1),
                    Edge::new("n1", "n3", 0, 1),
                    Edge::new("n3", "n4", 2, 4),
                ],
                0,
            ),
            PathwayGraph::new("chronic", chronic_edges, 0),
        ],
        nodes,
        resources: vec![
            Resource::new("admission", 0, 10),
            Resource::new("d0", 3, 10),
            Resource::new("d1", 2, 20),
            Resource::new("d2", 2, 20),
            Resource::new("d3", 1, 20),
            Resource::new("d4", 1, 20),
            Resource::new("surgery", 6, 10),
        ],
        interactions: InteractionTable::from_pairs([("d1", "d3", -4), ("d2", "d4", -4)]),
        combiner: ThresholdCombiner::new(1, 10),
        pins: Default::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::json::{load_json, save_json};

    #[test]
    fn committed_json_matches() {
        let files = [
            (include_str!("../fixtures/tiny.json"), tiny()),
            (include_str!("../fixtures/tiny_plus.json"), tiny_plus()),
            (include_str!("../fixtures/fig1.json"), fig1()),
        ];
        for (text, inst) in files {
            assert_eq!(load_json(text).unwrap(), inst);
            assert_eq!(text, save_json(&inst));
        }
    }
}
