use std::fmt::Write as _;

use crate::model::{Instance, Solution};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: one cluster per graph, edges labelled with their time
/// window. With a solution, executed nodes show the picked resource and
/// clock, the others `N/A`, and active conflicts appear as dashed edges.
pub fn export_dot(instance: &Instance, solution: Option<&Solution>) -> String {
    let mut out = String::from("digraph copath {\n");
    if !instance.graphs.is_empty() {
        out.push_str("  rankdir=TB;\n");
    }
    for graph in &instance.graphs {
        let _ = writeln!(out, "  subgraph cluster_{} {{", graph.id);
        let _ = writeln!(out, "    label={};", quote(graph.id.as_str()));
        for node in instance.graph_nodes(graph) {
            let spec = instance.node(node.as_str());
            let label = match solution {
                None => spec.map_or_else(|| node.0.clone(), |s| s.display_label.clone()),
                Some(sol) if sol.executed.contains(&node) => {
                    let resource = sol
                        .choice
                        .get(&node)
                        .map(|r| instance.resource(r.as_str()).map_or(r.0.clone(), |res| res.name.clone()))
                        .unwrap_or_default();
                    let clock = sol.clock.get(&node).map_or(String::new(), |c| format!(" @{c}"));
                    format!("{resource}{clock}")
                }
                Some(_) => "N/A".to_owned(),
            };
            let style = match solution {
                Some(sol) if sol.executed.contains(&node) => ", style=bold",
                Some(_) => ", style=dashed, fontcolor=gray",
                None => "",
            };
            let _ = writeln!(out, "    {node} [label={}{style}];", quote(&label));
        }
        for e in &graph.edges {
            let _ = writeln!(out, "    {} -> {} [label=\"[{},{}]\"];", e.from, e.to, e.t_min, e.t_max);
        }
        out.push_str("  }\n");
    }
    if let Some(sol) = solution {
        for c in &sol.conflicts {
            let _ = writeln!(
                out,
                "  {} -> {} [dir=none, style=dashed, color=red, constraint=false, label=\"{}\"];",
                c.node_a, c.node_b, c.contribution
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{oracle_solve, DEFAULT_BUDGET};

    #[test]
    fn plain_export_labels_edges() {
        let dot = export_dot(&fixtures::tiny(), None);
        assert!(dot.contains("a -> b [label=\"[1,2]\"]"), "{dot}");
        assert!(dot.contains("subgraph cluster_G1 {"));
        assert!(dot.contains("subgraph cluster_G2 {"));
    }

    #[test]
    fn solution_marks_unexecuted_nodes() {
        let inst = fixtures::tiny();
        let sol = oracle_solve(&inst, DEFAULT_BUDGET).unwrap().witness;
        let dot = export_dot(&inst, Some(&sol));
        assert!(dot.contains("b [label=\"N/A\""), "{dot}");
        assert!(dot.contains("c [label=\"r2 @0\""), "{dot}");
    }

    #[test]
    fn empty_instance() {
        let inst = crate::model::Instance {
            graphs: vec![],
            nodes: vec![],
            resources: vec![],
            interactions: Default::default(),
            combiner: Default::default(),
            pins: Default::default(),
        };
        assert_eq!(export_dot(&inst, None), "digraph copath {\n}\n");
    }
}
