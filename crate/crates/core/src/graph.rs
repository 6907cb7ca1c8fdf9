//! Graph queries: sources, sinks, path enumeration and walk checking.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::GraphError;
use crate::model::{Edge, GraphId, Instance, NodeId, PathwayGraph, Solution};

/// Adjacency view of one pathway graph, with children and parents sorted by id.
#[derive(Debug, Clone)]
pub struct Topology {
    pub graph: GraphId,
    pub nodes: Vec<NodeId>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    parents: BTreeMap<NodeId, Vec<NodeId>>,
}

impl Topology {
    pub fn of(instance: &Instance, graph: &PathwayGraph) -> Self {
        Self::from_parts(graph.id.clone(), instance.graph_nodes(graph), &graph.edges)
    }

    /// Builds a topology from an explicit node list; edge endpoints are added
    /// to the node set if missing.
    pub fn from_parts(graph: GraphId, nodes: impl IntoIterator<Item = NodeId>, edges: &[Edge]) -> Self {
        let mut node_set: BTreeSet<NodeId> = nodes.into_iter().collect();
        let mut children: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut parents: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for e in edges {
            node_set.insert(e.from.clone());
            node_set.insert(e.to.clone());
            children.entry(e.from.clone()).or_default().insert(e.to.clone());
            parents.entry(e.to.clone()).or_default().insert(e.from.clone());
        }
        let flatten = |m: BTreeMap<NodeId, BTreeSet<NodeId>>| {
            m.into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect()
        };
        Self {
            graph,
            nodes: node_set.into_iter().collect(),
            children: flatten(children),
            parents: flatten(parents),
        }
    }

    pub fn children(&self, node: &NodeId) -> &[NodeId] {
        self.children.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn parents(&self, node: &NodeId) -> &[NodeId] {
        self.parents.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn sources(&self) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| self.parents(n).is_empty())
            .cloned()
            .collect()
    }

    pub fn sinks(&self) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| self.children(n).is_empty())
            .cloned()
            .collect()
    }

    /// Kahn's algorithm; `None` when a directed cycle exists.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indegree: BTreeMap<&NodeId, usize> =
            self.nodes.iter().map(|n| (n, self.parents(n).len())).collect();
        let mut ready: Vec<&NodeId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        ready.reverse();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop() {
            order.push(n.clone());
            for c in self.children(n).iter().rev() {
                let d = indegree.get_mut(c).expect("child is a node");
                *d -= 1;
                if *d == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// The unique source of a valid graph.
    pub fn source(&self) -> Result<NodeId, GraphError> {
        if !self.is_acyclic() {
            return Err(GraphError::Cyclic(self.graph.clone()));
        }
        let sources = self.sources();
        match sources.len() {
            1 => Ok(sources.into_iter().next().expect("one source")),
            0 => Err(GraphError::NoSource(self.graph.clone())),
            _ => Err(GraphError::MultipleSources(self.graph.clone(), sources.into_iter().collect())),
        }
    }

    /// All source-to-sink paths, branching in lexicographic child order.
    pub fn enumerate_paths(&self) -> Result<Vec<Vec<NodeId>>, GraphError> {
        let source = self.source()?;
        let mut out = Vec::new();
        let mut stack = vec![source];
        self.extend_paths(&mut stack, &mut out);
        Ok(out)
    }

    /// Paths whose node set is itself a valid selection. A path that skips a
    /// shortcut edge (`a -> b -> c` next to `a -> c`) is excluded, since
    /// executing its nodes gives `a` two executed children.
    pub fn realizable_paths(&self) -> Result<Vec<Vec<NodeId>>, GraphError> {
        let mut paths = self.enumerate_paths()?;
        paths.retain(|p| {
            let set: BTreeSet<NodeId> = p.iter().cloned().collect();
            self.reconstruct_walk(&set).1.is_none()
        });
        Ok(paths)
    }

    fn extend_paths(&self, stack: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let last = stack.last().expect("non-empty path").clone();
        let children = self.children(&last);
        if children.is_empty() {
            out.push(stack.clone());
            return;
        }
        for c in children {
            stack.push(c.clone());
            self.extend_paths(stack, out);
            stack.pop();
        }
    }

    /// Follows executed children from the source. Returns the walk built so far
    /// and the first violation met, if any.
    pub fn reconstruct_walk(&self, executed: &BTreeSet<NodeId>) -> (Vec<NodeId>, Option<WalkViolation>) {
        let source = match self.source() {
            Ok(s) => s,
            Err(_) => return (Vec::new(), Some(WalkViolation::InvalidGraph)),
        };
        if !executed.contains(&source) {
            return (Vec::new(), Some(WalkViolation::SourceNotExecuted));
        }
        let mut walk = vec![source.clone()];
        let mut seen: BTreeSet<NodeId> = BTreeSet::from([source.clone()]);
        let mut current = source;
        loop {
            let next: Vec<&NodeId> = self
                .children(&current)
                .iter()
                .filter(|c| executed.contains(*c))
                .collect();
            match next.as_slice() {
                [] => {
                    if !self.children(&current).is_empty() {
                        return (walk, Some(WalkViolation::DeadEnd(current)));
                    }
                    break;
                }
                [only] => {
                    let only = (*only).clone();
                    if !seen.insert(only.clone()) {
                        return (walk, Some(WalkViolation::RepeatedNode(only)));
                    }
                    walk.push(only.clone());
                    current = only;
                }
                _ => return (walk, Some(WalkViolation::TwoExecutedChildren(current))),
            }
        }
        let stray: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| executed.contains(*n) && !seen.contains(*n))
            .cloned()
            .collect();
        if stray.is_empty() {
            (walk, None)
        } else {
            (walk, Some(WalkViolation::StrayExecuted(stray)))
        }
    }
}

/// Source nodes (no incoming edge) of a graph.
pub fn graph_sources(topology: &Topology) -> BTreeSet<NodeId> {
    topology.sources()
}

/// Sink nodes (no outgoing edge) of a graph.
pub fn graph_sinks(topology: &Topology) -> BTreeSet<NodeId> {
    topology.sinks()
}

pub fn enumerate_paths(topology: &Topology) -> Result<Vec<Vec<NodeId>>, GraphError> {
    topology.enumerate_paths()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "node")]
pub enum WalkViolation {
    InvalidGraph,
    SourceNotExecuted,
    /// Executed node with more than one executed child.
    TwoExecutedChildren(NodeId),
    /// Executed non-sink with no executed child.
    DeadEnd(NodeId),
    RepeatedNode(NodeId),
    /// Executed nodes not on the walk from the source.
    StrayExecuted(Vec<NodeId>),
    /// Executed node that belongs to no graph.
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WalkReport {
    pub walks: Vec<(GraphId, Vec<NodeId>)>,
    pub violations: Vec<(GraphId, WalkViolation)>,
}

impl WalkReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every graph's executed nodes form a duplicate-free walk from
/// its source to one of its sinks.
pub fn check_walk(instance: &Instance, solution: &Solution) -> WalkReport {
    let mut report = WalkReport::default();
    let mut covered: BTreeSet<&NodeId> = BTreeSet::new();
    for graph in &instance.graphs {
        let topo = Topology::of(instance, graph);
        covered.extend(solution.executed.iter().filter(|n| topo.nodes.binary_search(n).is_ok()));
        let (walk, violation) = topo.reconstruct_walk(&solution.executed);
        if let Some(v) = violation {
            report.violations.push((graph.id.clone(), v));
        }
        report.walks.push((graph.id.clone(), walk));
    }
    for n in &solution.executed {
        if !covered.contains(n) {
            report
                .violations
                .push((GraphId::new(""), WalkViolation::UnknownNode(n.clone())));
        }
    }
    report
}

/// Checks output conditions beyond the walk: resource membership, source
/// clocks and edge windows between executed endpoints. Returns one message
/// per violation.
pub fn check_schedule(instance: &Instance, solution: &Solution) -> Vec<String> {
    let mut problems = Vec::new();
    for n in &solution.executed {
        match (instance.node(n.as_str()), solution.choice.get(n)) {
            (Some(spec), Some(r)) if spec.options.contains(r) => {}
            (Some(_), Some(r)) => problems.push(format!("node {n}: resource {r} not among its options")),
            (_, None) => problems.push(format!("node {n}: no resource chosen")),
            (None, _) => problems.push(format!("node {n}: unknown node")),
        }
        if !solution.clock.contains_key(n) {
            problems.push(format!("node {n}: no clock"));
        }
    }
    for graph in &instance.graphs {
        let topo = Topology::of(instance, graph);
        if let Ok(source) = topo.source() {
            if solution.executed.contains(&source) && solution.clock.get(&source) != Some(&graph.start_time) {
                problems.push(format!(
                    "graph {}: source {source} clock {:?} differs from start time {}",
                    graph.id,
                    solution.clock.get(&source),
                    graph.start_time
                ));
            }
        }
        for e in &graph.edges {
            if !(solution.executed.contains(&e.from) && solution.executed.contains(&e.to)) {
                continue;
            }
            if let (Some(a), Some(b)) = (solution.clock.get(&e.from), solution.clock.get(&e.to)) {
                if !e.admits(b - a) {
                    problems.push(format!(
                        "edge {}->{}: delay {} outside [{},{}]",
                        e.from,
                        e.to,
                        b - a,
                        e.t_min,
                        e.t_max
                    ));
                }
            }
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topo(edges: &[(&str, &str)]) -> Topology {
        let edges: Vec<Edge> = edges.iter().map(|(a, b)| Edge::new(*a, *b, 0, 0)).collect();
        Topology::from_parts(GraphId::new("G"), Vec::new(), &edges)
    }

    fn ids(v: &[&str]) -> BTreeSet<NodeId> {
        v.iter().map(|s| NodeId::new(*s)).collect()
    }

    fn paths(v: &[&[&str]]) -> Vec<Vec<NodeId>> {
        v.iter().map(|p| p.iter().map(|s| NodeId::new(*s)).collect()).collect()
    }

    #[test]
    fn shortcut_paths_are_not_realizable() {
        let t = topo(&[("a", "b"), ("b", "c"), ("a", "c")]);
        assert_eq!(t.enumerate_paths().unwrap(), paths(&[&["a", "b", "c"], &["a", "c"]]));
        assert_eq!(t.realizable_paths().unwrap(), paths(&[&["a", "c"]]));
    }

    #[test]
    fn sources_and_sinks() {
        let t = topo(&[("a", "b"), ("a", "c")]);
        assert_eq!(graph_sources(&t), ids(&["a"]));
        assert_eq!(graph_sinks(&t), ids(&["b", "c"]));

        let t = topo(&[("a", "b"), ("b", "c")]);
        assert_eq!(graph_sources(&t), ids(&["a"]));
        assert_eq!(graph_sinks(&t), ids(&["c"]));

        let single = Topology::from_parts(GraphId::new("G"), vec![NodeId::new("n")], &[]);
        assert_eq!(graph_sources(&single), ids(&["n"]));
        assert_eq!(graph_sinks(&single), ids(&["n"]));
    }

    #[test]
    fn enumerates_paths_in_lexicographic_order() {
        assert_eq!(
            enumerate_paths(&topo(&[("a", "c"), ("a", "b")])).unwrap(),
            paths(&[&["a", "b"], &["a", "c"]])
        );
        assert_eq!(
            enumerate_paths(&topo(&[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])).unwrap(),
            paths(&[&["a", "b", "d"], &["a", "c", "d"]])
        );
        let single = Topology::from_parts(GraphId::new("G"), vec![NodeId::new("n")], &[]);
        assert_eq!(enumerate_paths(&single).unwrap(), paths(&[&["n"]]));
    }

    #[test]
    fn enumerate_rejects_invalid_graphs() {
        assert!(matches!(
            enumerate_paths(&topo(&[("a", "b"), ("c", "b")])),
            Err(GraphError::MultipleSources(..))
        ));
        assert!(matches!(
            enumerate_paths(&topo(&[("a", "b"), ("b", "a")])),
            Err(GraphError::Cyclic(_))
        ));
    }

    #[test]
    fn walk_reconstruction_flags_violations() {
        let t = topo(&[("a", "b"), ("a", "c")]);
        assert_eq!(
            t.reconstruct_walk(&ids(&["a", "b", "c"])).1,
            Some(WalkViolation::TwoExecutedChildren(NodeId::new("a")))
        );
        assert_eq!(t.reconstruct_walk(&ids(&[])).1, Some(WalkViolation::SourceNotExecuted));
        assert_eq!(t.reconstruct_walk(&ids(&["a"])).1, Some(WalkViolation::DeadEnd(NodeId::new("a"))));
        let (walk, v) = t.reconstruct_walk(&ids(&["a", "c"]));
        assert_eq!(v, None);
        assert_eq!(walk, vec![NodeId::new("a"), NodeId::new("c")]);

        let chain = topo(&[("a", "b"), ("b", "c"), ("a", "d")]);
        assert_eq!(
            chain.reconstruct_walk(&ids(&["a", "d", "c"])).1,
            Some(WalkViolation::StrayExecuted(vec![NodeId::new("c")]))
        );
    }
}
