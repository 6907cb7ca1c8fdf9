//! Structural validation of instances. Violations are reported as data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph::Topology;
use crate::model::{is_valid_identifier, GraphId, Instance, NodeId, ResourceId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    InvalidIdentifier { entity: &'static str, id: String },
    DuplicateGraph { graph: GraphId },
    DuplicateNode { node: NodeId },
    DuplicateResource { resource: ResourceId },
    DuplicateEdge { graph: GraphId, from: NodeId, to: NodeId },
    InvalidTimeWindow { graph: GraphId, from: NodeId, to: NodeId, t_min: u64, t_max: u64 },
    SelfLoop { graph: GraphId, node: NodeId },
    MissingNodeSpec { graph: GraphId, node: NodeId },
    UnknownGraph { node: NodeId, graph: GraphId },
    OverlappingNodeSets { node: NodeId, graphs: Vec<GraphId> },
    EmptyGraph { graph: GraphId },
    Cyclic { graph: GraphId },
    NoSource { graph: GraphId },
    MultipleSources { graph: GraphId, sources: Vec<NodeId> },
    EmptyOptions { node: NodeId },
    UnknownResource { node: NodeId, resource: ResourceId },
    UnknownInteractionResource { resource: ResourceId },
    ConflictingInteraction { resource_a: ResourceId, resource_b: ResourceId },
    UnknownPinnedNode { node: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            InvalidIdentifier { entity, id } => write!(f, "{entity} id {id:?} is not [A-Za-z0-9_]+"),
            DuplicateGraph { graph } => write!(f, "graph {graph} declared twice"),
            DuplicateNode { node } => write!(f, "node {node} declared twice"),
            DuplicateResource { resource } => write!(f, "resource {resource} declared twice"),
            DuplicateEdge { graph, from, to } => write!(f, "graph {graph}: edge {from}->{to} listed twice"),
            InvalidTimeWindow { graph, from, to, t_min, t_max } => {
                write!(f, "graph {graph}: edge {from}->{to} has t_min {t_min} > t_max {t_max}")
            }
            SelfLoop { graph, node } => write!(f, "graph {graph}: self-loop on {node}"),
            MissingNodeSpec { graph, node } => write!(f, "graph {graph}: node {node} has no node spec"),
            UnknownGraph { node, graph } => write!(f, "node {node} refers to unknown graph {graph}"),
            OverlappingNodeSets { node, graphs } => write!(f, "node {node} belongs to several graphs {}", join(graphs)),
            EmptyGraph { graph } => write!(f, "graph {graph} has no nodes"),
            Cyclic { graph } => write!(f, "graph {graph} contains a directed cycle"),
            NoSource { graph } => write!(f, "graph {graph} has no source"),
            MultipleSources { graph, sources } => write!(f, "graph {graph} has several sources {}", join(sources)),
            EmptyOptions { node } => write!(f, "node {node} has no resource options"),
            UnknownResource { node, resource } => write!(f, "node {node} lists unknown resource {resource}"),
            UnknownInteractionResource { resource } => write!(f, "interaction refers to unknown resource {resource}"),
            ConflictingInteraction { resource_a, resource_b } => {
                write!(f, "interaction {resource_a}/{resource_b} listed twice with different values")
            }
            UnknownPinnedNode { node } => write!(f, "pin refers to unknown node {node}"),
        }
    }
}

pub(crate) fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut out = Vec::new();

    let mut graph_ids = BTreeSet::new();
    for g in &instance.graphs {
        if !is_valid_identifier(g.id.as_str()) {
            out.push(Violation::InvalidIdentifier { entity: "graph", id: g.id.0.clone() });
        }
        if !graph_ids.insert(&g.id) {
            out.push(Violation::DuplicateGraph { graph: g.id.clone() });
        }
    }

    let mut resource_ids = BTreeSet::new();
    for r in &instance.resources {
        if !is_valid_identifier(r.id.as_str()) {
            out.push(Violation::InvalidIdentifier { entity: "resource", id: r.id.0.clone() });
        }
        if !resource_ids.insert(&r.id) {
            out.push(Violation::DuplicateResource { resource: r.id.clone() });
        }
    }

    let mut specs: BTreeMap<&NodeId, &GraphId> = BTreeMap::new();
    for n in &instance.nodes {
        if !is_valid_identifier(n.id.as_str()) {
            out.push(Violation::InvalidIdentifier { entity: "node", id: n.id.0.clone() });
        }
        if specs.insert(&n.id, &n.graph).is_some() {
            out.push(Violation::DuplicateNode { node: n.id.clone() });
        }
        if !graph_ids.contains(&n.graph) {
            out.push(Violation::UnknownGraph { node: n.id.clone(), graph: n.graph.clone() });
        }
        let pinned_off = instance.pins.get(&n.id) == Some(&false);
        if n.options.is_empty() && !pinned_off {
            out.push(Violation::EmptyOptions { node: n.id.clone() });
        }
        for r in &n.options {
            if !resource_ids.contains(r) {
                out.push(Violation::UnknownResource { node: n.id.clone(), resource: r.clone() });
            }
        }
    }

    // Which graphs touch each node, through specs or edges.
    let mut membership: BTreeMap<NodeId, BTreeSet<GraphId>> = BTreeMap::new();
    for n in &instance.nodes {
        membership.entry(n.id.clone()).or_default().insert(n.graph.clone());
    }
    for g in &instance.graphs {
        let mut seen_edges = BTreeSet::new();
        for e in &g.edges {
            if e.t_min > e.t_max {
                out.push(Violation::InvalidTimeWindow {
                    graph: g.id.clone(),
                    from: e.from.clone(),
                    to: e.to.clone(),
                    t_min: e.t_min,
                    t_max: e.t_max,
                });
            }
            if e.from == e.to {
                out.push(Violation::SelfLoop { graph: g.id.clone(), node: e.from.clone() });
            }
            if !seen_edges.insert((&e.from, &e.to)) {
                out.push(Violation::DuplicateEdge { graph: g.id.clone(), from: e.from.clone(), to: e.to.clone() });
            }
            for endpoint in [&e.from, &e.to] {
                membership.entry(endpoint.clone()).or_default().insert(g.id.clone());
                if !specs.contains_key(endpoint) {
                    out.push(Violation::MissingNodeSpec { graph: g.id.clone(), node: endpoint.clone() });
                }
            }
        }
    }
    for (node, graphs) in &membership {
        if graphs.len() > 1 {
            out.push(Violation::OverlappingNodeSets {
                node: node.clone(),
                graphs: graphs.iter().cloned().collect(),
            });
        }
    }
    out.dedup();

    for g in &instance.graphs {
        let topo = Topology::of(instance, g);
        if topo.nodes.is_empty() {
            out.push(Violation::EmptyGraph { graph: g.id.clone() });
            continue;
        }
        if !topo.is_acyclic() {
            out.push(Violation::Cyclic { graph: g.id.clone() });
        }
        let sources = topo.sources();
        match sources.len() {
            0 => out.push(Violation::NoSource { graph: g.id.clone() }),
            1 => {}
            _ => out.push(Violation::MultipleSources {
                graph: g.id.clone(),
                sources: sources.into_iter().collect(),
            }),
        }
    }

    let mut interaction_values: BTreeMap<(ResourceId, ResourceId), i64> = BTreeMap::new();
    let mut reported_unknown = BTreeSet::new();
    for entry in &instance.interactions.entries {
        for r in [&entry.resource_a, &entry.resource_b] {
            if !resource_ids.contains(r) && reported_unknown.insert(r.clone()) {
                out.push(Violation::UnknownInteractionResource { resource: r.clone() });
            }
        }
        let key = entry.key();
        if let Some(prev) = interaction_values.insert(key.clone(), entry.value) {
            if prev != entry.value {
                out.push(Violation::ConflictingInteraction { resource_a: key.0, resource_b: key.1 });
            }
        }
    }

    for node in instance.pins.keys() {
        if !specs.contains_key(node) {
            out.push(Violation::UnknownPinnedNode { node: node.clone() });
        }
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{Edge, NodeSpec, PathwayGraph};
    use crate::scoring::Resource;

    fn one_graph(edges: Vec<Edge>, nodes: &[&str]) -> Instance {
        Instance {
            graphs: vec![PathwayGraph::new("G1", edges, 0)],
            nodes: nodes.iter().map(|n| NodeSpec::new(*n, "G1", ["r"])).collect(),
            resources: vec![Resource::new("r", 1, 10)],
            interactions: Default::default(),
            combiner: Default::default(),
            pins: Default::default(),
        }
    }

    #[test]
    fn fixtures_are_valid() {
        for inst in [fixtures::tiny(), fixtures::tiny_plus(), fixtures::fig1()] {
            assert!(validate_instance(&inst).is_ok(), "{}", validate_instance(&inst));
        }
    }

    #[test]
    fn reports_multiple_sources() {
        let inst = one_graph(vec![Edge::new("a", "b", 0, 1), Edge::new("c", "b", 0, 1)], &["a", "b", "c"]);
        assert_eq!(
            validate_instance(&inst).violations,
            vec![Violation::MultipleSources {
                graph: "G1".into(),
                sources: vec!["a".into(), "c".into()]
            }]
        );
    }

    #[test]
    fn reports_cycle() {
        let inst = one_graph(vec![Edge::new("a", "b", 0, 1), Edge::new("b", "a", 0, 1)], &["a", "b"]);
        let report = validate_instance(&inst);
        assert!(report.violations.contains(&Violation::Cyclic { graph: "G1".into() }));
    }

    #[test]
    fn reports_overlapping_node_sets() {
        let mut inst = one_graph(vec![Edge::new("a", "x", 0, 1)], &["a", "x"]);
        inst.graphs.push(PathwayGraph::new("G2", vec![Edge::new("p", "x", 0, 1)], 0));
        inst.nodes.push(NodeSpec::new("p", "G2", ["r"]));
        let report = validate_instance(&inst);
        assert!(report.violations.contains(&Violation::OverlappingNodeSets {
            node: "x".into(),
            graphs: vec!["G1".into(), "G2".into()]
        }));
    }

    #[test]
    fn reports_bad_window_and_identifier() {
        let mut inst = one_graph(vec![Edge::new("a", "b", 3, 2)], &["a", "b"]);
        inst.nodes.push(NodeSpec::new("bad-id", "G1", ["r"]));
        let report = validate_instance(&inst);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::InvalidTimeWindow { t_min: 3, t_max: 2, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InvalidIdentifier { entity: "node", .. })));
    }

    #[test]
    fn empty_options_allowed_only_when_pinned_off() {
        let mut inst = one_graph(vec![Edge::new("a", "b", 0, 1)], &["a", "b"]);
        inst.nodes[1].options.clear();
        assert_eq!(
            validate_instance(&inst).violations,
            vec![Violation::EmptyOptions { node: "b".into() }]
        );
        inst.pins.insert("b".into(), false);
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn single_node_graph_is_valid() {
        assert!(validate_instance(&one_graph(Vec::new(), &["n"])).is_ok());
    }

    #[test]
    fn validation_is_pure() {
        let inst = one_graph(vec![Edge::new("a", "b", 0, 1), Edge::new("c", "b", 0, 1)], &["a", "b", "c"]);
        assert_eq!(validate_instance(&inst), validate_instance(&inst));
    }
}
