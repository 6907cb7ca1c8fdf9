//! Problem instances and solutions.
//!
//! An [`Instance`] is a list of single-source DAGs ("pathway graphs") whose
//! edges carry `[t_min, t_max]` waiting windows, plus per-node resource
//! options and the scoring data in [`crate::scoring`]. A [`Solution`] picks
//! one source-to-sink walk per graph, a clock per executed node and a resource
//! per executed node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scoring::{InteractionTable, Resource, ThresholdCombiner};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(
    /// Identifier of a node. Restricted to `[A-Za-z0-9_]+` by validation.
    NodeId
);
id_type!(GraphId);
id_type!(ResourceId);

/// True when `id` is non-empty and only uses ASCII letters, digits and `_`.
pub fn is_valid_identifier(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A timed edge: the target may run between `t_min` and `t_max` time units
/// after the origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub t_min: u64,
    pub t_max: u64,
}

impl Edge {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>, t_min: u64, t_max: u64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            t_min,
            t_max,
        }
    }

    /// Whether a clock difference `clock(to) - clock(from)` respects the window.
    pub fn admits(&self, delta: i64) -> bool {
        delta >= self.t_min as i64 && delta <= self.t_max as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub graph: GraphId,
    #[serde(default)]
    pub display_label: String,
    /// Resources that may perform this node, in preference-free order.
    pub options: Vec<ResourceId>,
}

impl NodeSpec {
    pub fn new(
        id: impl Into<NodeId>,
        graph: impl Into<GraphId>,
        options: impl IntoIterator<Item = impl Into<ResourceId>>,
    ) -> Self {
        let id = id.into();
        Self {
            display_label: id.0.clone(),
            id,
            graph: graph.into(),
            options: options.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwayGraph {
    pub id: GraphId,
    #[serde(default)]
    pub edges: Vec<Edge>,
    /// Clock value of the source node.
    #[serde(default)]
    pub start_time: i64,
}

impl PathwayGraph {
    pub fn new(id: impl Into<GraphId>, edges: Vec<Edge>, start_time: i64) -> Self {
        Self {
            id: id.into(),
            edges,
            start_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub graphs: Vec<PathwayGraph>,
    pub nodes: Vec<NodeSpec>,
    pub resources: Vec<Resource>,
    #[serde(default)]
    pub interactions: InteractionTable,
    #[serde(default)]
    pub combiner: ThresholdCombiner,
    /// Operator pins: `true` forces a node to be executed, `false` forbids it.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pins: BTreeMap<NodeId, bool>,
}

impl Instance {
    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id.as_str() == id)
    }

    pub fn resource(&self, id: &str) -> Option<&Resource> {
        self.resources.iter().find(|r| r.id.as_str() == id)
    }

    pub fn graph(&self, id: &str) -> Option<&PathwayGraph> {
        self.graphs.iter().find(|g| g.id.as_str() == id)
    }

    /// Position of the graph owning `node`, as given by its [`NodeSpec`].
    pub fn graph_index_of(&self, node: &str) -> Option<usize> {
        let spec = self.node(node)?;
        self.graphs.iter().position(|g| g.id == spec.graph)
    }

    /// Node set of a graph: declared node specs plus edge endpoints, sorted.
    pub fn graph_nodes(&self, graph: &PathwayGraph) -> Vec<NodeId> {
        let mut set: BTreeSet<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.graph == graph.id)
            .map(|n| n.id.clone())
            .collect();
        for e in &graph.edges {
            set.insert(e.from.clone());
            set.insert(e.to.clone());
        }
        set.into_iter().collect()
    }

    /// Resource ids sorted; the position of an id is its SMT label value.
    pub fn resource_order(&self) -> Vec<ResourceId> {
        let mut ids: Vec<ResourceId> = self.resources.iter().map(|r| r.id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

/// A pair of cross-graph executed nodes whose interaction score is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictRecord {
    /// Node in the graph listed first.
    pub node_a: NodeId,
    pub node_b: NodeId,
    pub resource_a: ResourceId,
    pub resource_b: ResourceId,
    pub time_distance: u64,
    pub contribution: i64,
}

/// The raw `(F, c, m)` triple: executed nodes, their clocks and resources.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub executed: BTreeSet<NodeId>,
    pub clock: BTreeMap<NodeId, i64>,
    pub choice: BTreeMap<NodeId, ResourceId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub executed: BTreeSet<NodeId>,
    pub clock: BTreeMap<NodeId, i64>,
    pub choice: BTreeMap<NodeId, ResourceId>,
    pub objective: i64,
    pub effectiveness_total: i64,
    pub interaction_total: i64,
    #[serde(default)]
    pub conflicts: Vec<ConflictRecord>,
}

impl Solution {
    pub fn assignment(&self) -> Assignment {
        Assignment {
            executed: self.executed.clone(),
            clock: self.clock.clone(),
            choice: self.choice.clone(),
        }
    }

    /// Executed nodes of one graph, in walk order when the solution is valid.
    pub fn walk_in(&self, instance: &Instance, graph: &PathwayGraph) -> Vec<NodeId> {
        crate::graph::Topology::of(instance, graph)
            .reconstruct_walk(&self.executed)
            .0
    }
}
