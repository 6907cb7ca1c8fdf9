//! Re-solving under operator modifications.
//!
//! A [`WhatIfDelta`] pins nodes on or off, removes resources, forces a node's
//! resource and overrides graph start times (e.g. pre-existing pathways
//! restarted at `-x` while a newly added one starts at 0). Pins become encoder
//! assertions; the graph structure is never edited.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::WhatIfError;
use crate::model::{GraphId, Instance, NodeId, ResourceId, Solution};
use crate::solver::{solve_maximize, BackendConfig};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WhatIfDelta {
    pub pins_true: BTreeSet<NodeId>,
    pub pins_false: BTreeSet<NodeId>,
    pub exclude_resources: BTreeSet<ResourceId>,
    pub force_choice: BTreeMap<NodeId, ResourceId>,
    pub start_overrides: BTreeMap<GraphId, i64>,
}

impl WhatIfDelta {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

pub fn apply_delta(instance: &Instance, delta: &WhatIfDelta) -> Result<Instance, WhatIfError> {
    if let Some(n) = delta.pins_true.intersection(&delta.pins_false).next() {
        return Err(WhatIfError::InvalidDelta(format!("node {n} pinned both on and off")));
    }
    for n in delta.pins_true.iter().chain(&delta.pins_false).chain(delta.force_choice.keys()) {
        if instance.node(n.as_str()).is_none() {
            return Err(WhatIfError::UnknownEntity(format!("node {n}")));
        }
    }
    for r in delta.exclude_resources.iter().chain(delta.force_choice.values()) {
        if instance.resource(r.as_str()).is_none() {
            return Err(WhatIfError::UnknownEntity(format!("resource {r}")));
        }
    }
    for g in delta.start_overrides.keys() {
        if instance.graph(g.as_str()).is_none() {
            return Err(WhatIfError::UnknownEntity(format!("graph {g}")));
        }
    }
    for (n, r) in &delta.force_choice {
        let spec = instance.node(n.as_str()).expect("checked above");
        if !spec.options.contains(r) {
            return Err(WhatIfError::InvalidDelta(format!("{r} is not an option of node {n}")));
        }
        if delta.exclude_resources.contains(r) {
            return Err(WhatIfError::InvalidDelta(format!("node {n} forced to excluded resource {r}")));
        }
    }

    let mut out = instance.clone();
    for g in &mut out.graphs {
        if let Some(&t) = delta.start_overrides.get(&g.id) {
            g.start_time = t;
        }
    }
    for n in &delta.pins_true {
        out.pins.insert(n.clone(), true);
    }
    for n in &delta.pins_false {
        out.pins.insert(n.clone(), false);
    }
    for spec in &mut out.nodes {
        spec.options.retain(|r| !delta.exclude_resources.contains(r));
        if let Some(r) = delta.force_choice.get(&spec.id) {
            spec.options = vec![r.clone()];
        }
        if spec.options.is_empty() && out.pins.get(&spec.id) != Some(&false) {
            return Err(WhatIfError::InfeasibleDelta(spec.id.clone()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceChange {
    pub node: NodeId,
    pub before: ResourceId,
    pub after: ResourceId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockChange {
    pub node: NodeId,
    pub before: i64,
    pub after: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDiff {
    pub graph: GraphId,
    /// Whether the executed node set of this graph changed.
    pub path_changed: bool,
    pub added: Vec<NodeId>,
    pub dropped: Vec<NodeId>,
    pub choice_changes: Vec<ChoiceChange>,
    pub clock_changes: Vec<ClockChange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diff {
    pub objective_before: Option<i64>,
    pub objective_after: i64,
    pub objective_delta: i64,
    pub graphs: Vec<GraphDiff>,
}

impl Diff {
    pub fn graph(&self, id: &str) -> Option<&GraphDiff> {
        self.graphs.iter().find(|g| g.graph.as_str() == id)
    }
}

/// Compares two solutions graph by graph. Without a baseline every executed
/// node counts as added and the objective delta is taken from 0.
pub fn diff_solutions(instance: &Instance, baseline: Option<&Solution>, after: &Solution) -> Diff {
    let empty = Solution::default();
    let before = baseline.unwrap_or(&empty);
    let graphs = instance
        .graphs
        .iter()
        .map(|g| {
            let nodes = instance.graph_nodes(g);
            let was = |n: &NodeId| before.executed.contains(n);
            let is = |n: &NodeId| after.executed.contains(n);
            let added: Vec<NodeId> = nodes.iter().filter(|n| is(n) && !was(n)).cloned().collect();
            let dropped: Vec<NodeId> = nodes.iter().filter(|n| was(n) && !is(n)).cloned().collect();
            let mut choice_changes = Vec::new();
            let mut clock_changes = Vec::new();
            for n in nodes.iter().filter(|n| was(n) && is(n)) {
                if let (Some(b), Some(a)) = (before.choice.get(n), after.choice.get(n)) {
                    if a != b {
                        choice_changes.push(ChoiceChange {
                            node: n.clone(),
                            before: b.clone(),
                            after: a.clone(),
                        });
                    }
                }
                if let (Some(&b), Some(&a)) = (before.clock.get(n), after.clock.get(n)) {
                    if a != b {
                        clock_changes.push(ClockChange {
                            node: n.clone(),
                            before: b,
                            after: a,
                        });
                    }
                }
            }
            GraphDiff {
                graph: g.id.clone(),
                path_changed: !added.is_empty() || !dropped.is_empty(),
                added,
                dropped,
                choice_changes,
                clock_changes,
            }
        })
        .collect();
    let objective_before = baseline.map(|b| b.objective);
    Diff {
        objective_before,
        objective_after: after.objective,
        objective_delta: after.objective - objective_before.unwrap_or(0),
        graphs,
    }
}

/// Applies the delta, re-optimises and diffs against `baseline`.
pub fn resolve(
    config: &BackendConfig,
    instance: &Instance,
    delta: &WhatIfDelta,
    baseline: Option<&Solution>,
) -> Result<(Solution, Diff), WhatIfError> {
    let derived = apply_delta(instance, delta)?;
    let solution = solve_maximize(config, &derived)?;
    let diff = diff_solutions(&derived, baseline, &solution);
    Ok((solution, diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{oracle_solve, DEFAULT_BUDGET};

    fn optimum(inst: &Instance) -> i64 {
        oracle_solve(inst, DEFAULT_BUDGET).unwrap().optimum
    }

    #[test]
    fn offset_removes_conflicts() {
        let base = fixtures::tiny_plus();
        let delta = WhatIfDelta {
            start_overrides: BTreeMap::from([("G2".into(), -6)]),
            ..Default::default()
        };
        let derived = apply_delta(&base, &delta).unwrap();
        assert_eq!(derived.graph("G2").unwrap().start_time, -6);
        assert_eq!(base.graph("G2").unwrap().start_time, 0);
        let r = oracle_solve(&derived, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 14);
        assert!(r.witness.executed.contains(&NodeId::new("c")));
    }

    #[test]
    fn pin_forces_branch() {
        let delta = WhatIfDelta {
            pins_true: BTreeSet::from(["b".into()]),
            ..Default::default()
        };
        assert_eq!(optimum(&apply_delta(&fixtures::tiny(), &delta).unwrap()), 13);
    }

    #[test]
    fn excluding_sole_option_is_infeasible() {
        let delta = WhatIfDelta {
            exclude_resources: BTreeSet::from(["r2".into()]),
            ..Default::default()
        };
        assert!(matches!(
            apply_delta(&fixtures::tiny(), &delta),
            Err(WhatIfError::InfeasibleDelta(n)) if n.as_str() == "c"
        ));
        let pinned = WhatIfDelta {
            pins_false: BTreeSet::from(["c".into()]),
            ..delta
        };
        let derived = apply_delta(&fixtures::tiny(), &pinned).unwrap();
        assert_eq!(optimum(&derived), 13);
    }

    #[test]
    fn rejects_inconsistent_deltas() {
        let both = WhatIfDelta {
            pins_true: BTreeSet::from(["b".into()]),
            pins_false: BTreeSet::from(["b".into()]),
            ..Default::default()
        };
        assert!(matches!(apply_delta(&fixtures::tiny(), &both), Err(WhatIfError::InvalidDelta(_))));
        let unknown = WhatIfDelta {
            start_overrides: BTreeMap::from([("G9".into(), 1)]),
            ..Default::default()
        };
        assert!(matches!(apply_delta(&fixtures::tiny(), &unknown), Err(WhatIfError::UnknownEntity(_))));
        let foreign = WhatIfDelta {
            force_choice: BTreeMap::from([("a".into(), "r1".into())]),
            ..Default::default()
        };
        assert!(matches!(apply_delta(&fixtures::tiny(), &foreign), Err(WhatIfError::InvalidDelta(_))));
    }

    #[test]
    fn idempotent() {
        let delta = WhatIfDelta {
            pins_false: BTreeSet::from(["c".into()]),
            exclude_resources: BTreeSet::from(["r2".into()]),
            start_overrides: BTreeMap::from([("G1".into(), 3)]),
            ..Default::default()
        };
        let once = apply_delta(&fixtures::tiny(), &delta).unwrap();
        assert_eq!(apply_delta(&once, &delta).unwrap(), once);
    }

    #[test]
    fn diff_reports_switch() {
        let inst = fixtures::tiny_plus();
        let before = oracle_solve(&inst, DEFAULT_BUDGET).unwrap().witness;
        let delta = WhatIfDelta {
            start_overrides: BTreeMap::from([("G2".into(), -6)]),
            ..Default::default()
        };
        let derived = apply_delta(&inst, &delta).unwrap();
        let after = oracle_solve(&derived, DEFAULT_BUDGET).unwrap().witness;
        let diff = diff_solutions(&derived, Some(&before), &after);
        assert_eq!(diff.objective_delta, 11);
        let g1 = diff.graph("G1").unwrap();
        assert!(g1.path_changed);
        assert_eq!(g1.added, vec![NodeId::new("c")]);
        assert_eq!(g1.dropped, vec![NodeId::new("b")]);
        let g2 = diff.graph("G2").unwrap();
        assert!(!g2.path_changed);
        assert!(!g2.clock_changes.is_empty());

        let fresh = diff_solutions(&derived, None, &after);
        assert_eq!(fresh.objective_delta, after.objective);
        assert_eq!(fresh.graph("G1").unwrap().added.len(), 2);
    }
}
