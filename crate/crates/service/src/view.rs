//! Response payloads. Every number shown by a client comes from here.

use serde::{Deserialize, Serialize};

use copath_core::model::{Instance, NodeId, ResourceId, Solution};
use copath_core::whatif::{Diff, WhatIfDelta};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictView {
    pub partner: NodeId,
    pub partner_resource: ResourceId,
    pub time_distance: u64,
    pub contribution: i64,
}

/// The per-node fields of the operator's node list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: NodeId,
    pub graph: String,
    pub label: String,
    pub executed: bool,
    pub resource: Option<ResourceId>,
    pub resource_name: Option<String>,
    pub clock: Option<i64>,
    pub score: i64,
    pub conflicts: Vec<ConflictView>,
    pub conflict_score: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictRow {
    pub node_a: NodeId,
    pub node_b: NodeId,
    pub resource_a: ResourceId,
    pub resource_b: ResourceId,
    pub time_distance: u64,
    pub contribution: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionView {
    pub objective: i64,
    pub effectiveness_total: i64,
    pub interaction_total: i64,
    pub executed: Vec<NodeId>,
    pub conflicts: Vec<ConflictRow>,
    pub nodes: Vec<NodeRecord>,
}

impl SolutionView {
    pub fn new(instance: &Instance, solution: &Solution) -> Self {
        let mut nodes = Vec::new();
        for graph in &instance.graphs {
            for id in instance.graph_nodes(graph) {
                let spec = instance.node(id.as_str()).expect("graph node has a spec");
                let executed = solution.executed.contains(&id);
                let resource = solution.choice.get(&id).filter(|_| executed).cloned();
                let res = resource.as_ref().and_then(|r| instance.resource(r.as_str()));
                let conflicts: Vec<ConflictView> = solution
                    .conflicts
                    .iter()
                    .filter_map(|c| {
                        let (partner, partner_resource) = if c.node_a == id {
                            (&c.node_b, &c.resource_b)
                        } else if c.node_b == id {
                            (&c.node_a, &c.resource_a)
                        } else {
                            return None;
                        };
                        Some(ConflictView {
                            partner: partner.clone(),
                            partner_resource: partner_resource.clone(),
                            time_distance: c.time_distance,
                            contribution: c.contribution,
                        })
                    })
                    .collect();
                nodes.push(NodeRecord {
                    graph: graph.id.to_string(),
                    label: spec.display_label.clone(),
                    executed,
                    resource_name: res.map(|r| r.name.clone()),
                    score: res.map_or(0, |r| r.effectiveness),
                    clock: if executed { solution.clock.get(&id).copied() } else { None },
                    conflict_score: conflicts.iter().map(|c| c.contribution).sum(),
                    conflicts,
                    resource,
                    node: id,
                });
            }
        }
        Self {
            objective: solution.objective,
            effectiveness_total: solution.effectiveness_total,
            interaction_total: solution.interaction_total,
            executed: solution.executed.iter().cloned().collect(),
            conflicts: solution
                .conflicts
                .iter()
                .map(|c| ConflictRow {
                    node_a: c.node_a.clone(),
                    node_b: c.node_b.clone(),
                    resource_a: c.resource_a.clone(),
                    resource_b: c.resource_b.clone(),
                    time_distance: c.time_distance,
                    contribution: c.contribution,
                })
                .collect(),
            nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionView {
    pub id: ResourceId,
    pub name: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeView {
    pub id: NodeId,
    pub label: String,
    pub options: Vec<OptionView>,
    pub pinned: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeView {
    pub from: NodeId,
    pub to: NodeId,
    pub t_min: u64,
    pub t_max: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphView {
    pub id: String,
    pub start_time: i64,
    pub nodes: Vec<NodeView>,
    pub edges: Vec<EdgeView>,
}

/// Layout input for clients: nodes, windows and option names per graph.
pub fn graph_views(instance: &Instance) -> Vec<GraphView> {
    instance
        .graphs
        .iter()
        .map(|g| GraphView {
            id: g.id.to_string(),
            start_time: g.start_time,
            nodes: instance
                .graph_nodes(g)
                .into_iter()
                .map(|id| {
                    let spec = instance.node(id.as_str()).expect("graph node has a spec");
                    NodeView {
                        label: spec.display_label.clone(),
                        options: spec
                            .options
                            .iter()
                            .map(|r| OptionView {
                                id: r.clone(),
                                name: instance.resource(r.as_str()).map_or_else(|| r.to_string(), |x| x.name.clone()),
                            })
                            .collect(),
                        pinned: instance.pins.get(&id).copied(),
                        id,
                    }
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeView {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    t_min: e.t_min,
                    t_max: e.t_max,
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub delta: WhatIfDelta,
    pub solution: SolutionView,
    pub diff: Diff,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub solution: SolutionView,
    pub diff: Diff,
}
