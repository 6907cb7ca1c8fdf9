//! Resources, interactions and the global objective.
//!
//! The objective of an assignment is the sum of the effectiveness of every
//! executed node's resource plus, for every pair of executed nodes lying in
//! two different graphs, the interaction score returned by the threshold
//! combiner.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ScoringError;
use crate::model::{Assignment, ConflictRecord, Instance, NodeId, ResourceId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    #[serde(default)]
    pub name: String,
    /// Effectiveness, may be negative.
    pub effectiveness: i64,
    /// Amount consumed (e.g. a dosage).
    pub amount: u64,
}

impl Resource {
    pub fn new(id: impl Into<ResourceId>, effectiveness: i64, amount: u64) -> Self {
        let id = id.into();
        Self {
            name: id.0.clone(),
            id,
            effectiveness,
            amount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionEntry {
    pub resource_a: ResourceId,
    pub resource_b: ResourceId,
    pub value: i64,
}

impl InteractionEntry {
    /// Unordered pair key, smaller id first.
    pub fn key(&self) -> (ResourceId, ResourceId) {
        if self.resource_a <= self.resource_b {
            (self.resource_a.clone(), self.resource_b.clone())
        } else {
            (self.resource_b.clone(), self.resource_a.clone())
        }
    }
}

/// Symmetric interaction table; pairs not listed interact with value 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InteractionTable {
    pub entries: Vec<InteractionEntry>,
}

impl InteractionTable {
    pub fn from_pairs<A, B>(pairs: impl IntoIterator<Item = (A, B, i64)>) -> Self
    where
        A: Into<ResourceId>,
        B: Into<ResourceId>,
    {
        Self {
            entries: pairs
                .into_iter()
                .map(|(a, b, value)| InteractionEntry {
                    resource_a: a.into(),
                    resource_b: b.into(),
                    value,
                })
                .collect(),
        }
    }

    pub fn lookup(&self, a: &ResourceId, b: &ResourceId) -> i64 {
        self.entries
            .iter()
            .find(|e| (&e.resource_a == a && &e.resource_b == b) || (&e.resource_a == b && &e.resource_b == a))
            .map_or(0, |e| e.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The threshold interaction combiner: passes the interaction through when
/// the two events are at most `time_window` apart and both amounts reach
/// `amount_floor`, and yields 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdCombiner {
    pub time_window: u64,
    pub amount_floor: u64,
}

impl Default for ThresholdCombiner {
    fn default() -> Self {
        Self {
            time_window: 8,
            amount_floor: 10,
        }
    }
}

impl ThresholdCombiner {
    pub fn new(time_window: u64, amount_floor: u64) -> Self {
        Self {
            time_window,
            amount_floor,
        }
    }

    /// Whether the amount condition holds; independent of timing.
    pub fn amounts_clear(&self, amount_a: u64, amount_b: u64) -> bool {
        amount_a >= self.amount_floor && amount_b >= self.amount_floor
    }
}

pub fn eval_f(combiner: &ThresholdCombiner, interaction: i64, distance: u64, amount_a: u64, amount_b: u64) -> i64 {
    if distance <= combiner.time_window && combiner.amounts_clear(amount_a, amount_b) {
        interaction
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Minor,
    Moderate,
    Major,
}

impl FromStr for Severity {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minor" => Ok(Self::Minor),
            "moderate" => Ok(Self::Moderate),
            "major" => Ok(Self::Major),
            other => Err(ScoringError::UnknownSeverity(other.to_owned())),
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Minor => "minor",
            Self::Moderate => "moderate",
            Self::Major => "major",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityMap {
    pub minor: i64,
    pub moderate: i64,
    pub major: i64,
}

impl Default for SeverityMap {
    fn default() -> Self {
        Self {
            minor: -100,
            moderate: -1000,
            major: -5000,
        }
    }
}

impl SeverityMap {
    pub fn value(&self, severity: Severity) -> i64 {
        match severity {
            Severity::Minor => self.minor,
            Severity::Moderate => self.moderate,
            Severity::Major => self.major,
        }
    }
}

/// Maps a severity token to its interaction value.
pub fn severity_to_interaction(map: &SeverityMap, severity: &str) -> Result<i64, ScoringError> {
    Ok(map.value(severity.parse()?))
}

/// Dense, index-based view of an instance's scoring data.
#[derive(Debug, Clone)]
pub struct ScoreModel {
    pub resources: Vec<ResourceId>,
    index: HashMap<ResourceId, usize>,
    effectiveness: Vec<i64>,
    amount: Vec<u64>,
    interaction: Vec<i64>,
    pub combiner: ThresholdCombiner,
}

impl ScoreModel {
    pub fn new(instance: &Instance) -> Self {
        let resources = instance.resource_order();
        let index: HashMap<ResourceId, usize> =
            resources.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        let n = resources.len();
        let mut effectiveness = vec![0; n];
        let mut amount = vec![0; n];
        for r in &instance.resources {
            let i = index[&r.id];
            effectiveness[i] = r.effectiveness;
            amount[i] = r.amount;
        }
        let mut interaction = vec![0; n * n];
        for e in &instance.interactions.entries {
            if let (Some(&a), Some(&b)) = (index.get(&e.resource_a), index.get(&e.resource_b)) {
                interaction[a * n + b] = e.value;
                interaction[b * n + a] = e.value;
            }
        }
        Self {
            resources,
            index,
            effectiveness,
            amount,
            interaction,
            combiner: instance.combiner,
        }
    }

    pub fn index_of(&self, id: &ResourceId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn effectiveness(&self, r: usize) -> i64 {
        self.effectiveness[r]
    }

    pub fn amount(&self, r: usize) -> u64 {
        self.amount[r]
    }

    pub fn interaction(&self, a: usize, b: usize) -> i64 {
        self.interaction[a * self.resources.len() + b]
    }

    /// Interaction score of two resources used `distance` time units apart.
    pub fn pair_score(&self, a: usize, b: usize, distance: u64) -> i64 {
        eval_f(&self.combiner, self.interaction(a, b), distance, self.amount[a], self.amount[b])
    }

    /// Interaction of a resource pair as seen through the amount floor only:
    /// zero when no timing could make the pair contribute.
    pub fn effective_interaction(&self, a: usize, b: usize) -> i64 {
        if self.combiner.amounts_clear(self.amount[a], self.amount[b]) {
            self.interaction(a, b)
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: i64,
    pub effectiveness_total: i64,
    pub interaction_total: i64,
    pub conflicts: Vec<ConflictRecord>,
}

/// One executed node in dense form: (graph position, resource index, clock).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseEvent {
    pub graph: usize,
    pub resource: usize,
    pub clock: i64,
}

/// Objective of a dense assignment, without conflict bookkeeping.
pub fn dense_objective(model: &ScoreModel, events: &[DenseEvent]) -> i64 {
    let mut total = 0;
    for (i, a) in events.iter().enumerate() {
        total += model.effectiveness(a.resource);
        for b in &events[i + 1..] {
            if a.graph != b.graph {
                total += model.pair_score(a.resource, b.resource, a.clock.abs_diff(b.clock));
            }
        }
    }
    total
}

pub fn evaluate_objective(instance: &Instance, assignment: &Assignment) -> Result<Evaluation, ScoringError> {
    let model = ScoreModel::new(instance);
    evaluate_with(instance, &model, assignment)
}

pub fn evaluate_with(instance: &Instance, model: &ScoreModel, assignment: &Assignment) -> Result<Evaluation, ScoringError> {
    let graph_pos: BTreeMap<_, usize> = instance.graphs.iter().enumerate().map(|(i, g)| (&g.id, i)).collect();
    let mut events: Vec<(usize, &NodeId, &ResourceId, usize, i64)> = Vec::with_capacity(assignment.executed.len());
    for node in &assignment.executed {
        let unassigned = || ScoringError::UnassignedNode(node.clone());
        let spec = instance.node(node.as_str()).ok_or_else(unassigned)?;
        let resource = assignment.choice.get(node).ok_or_else(unassigned)?;
        if !spec.options.contains(resource) {
            return Err(unassigned());
        }
        let clock = *assignment.clock.get(node).ok_or_else(unassigned)?;
        let g = *graph_pos.get(&spec.graph).ok_or_else(unassigned)?;
        let r = model.index_of(resource).ok_or_else(unassigned)?;
        events.push((g, node, resource, r, clock));
    }
    events.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

    let mut eval = Evaluation::default();
    for (i, a) in events.iter().enumerate() {
        eval.effectiveness_total += model.effectiveness(a.3);
        for b in &events[i + 1..] {
            if a.0 == b.0 {
                continue;
            }
            let distance = a.4.abs_diff(b.4);
            let contribution = model.pair_score(a.3, b.3, distance);
            if contribution != 0 {
                eval.interaction_total += contribution;
                eval.conflicts.push(ConflictRecord {
                    node_a: a.1.clone(),
                    node_b: b.1.clone(),
                    resource_a: a.2.clone(),
                    resource_b: b.2.clone(),
                    time_distance: distance,
                    contribution,
                });
            }
        }
    }
    eval.conflicts
        .sort_by(|x, y| (&x.node_a, &x.node_b).cmp(&(&y.node_a, &y.node_b)));
    eval.objective = eval.effectiveness_total + eval.interaction_total;
    Ok(eval)
}

/// Bounds bracketing the objective of every feasible assignment.
pub fn objective_bounds(instance: &Instance) -> (i64, i64) {
    let model = ScoreModel::new(instance);
    let options: Vec<(usize, Vec<usize>)> = instance
        .nodes
        .iter()
        .filter_map(|n| {
            let g = instance.graphs.iter().position(|g| g.id == n.graph)?;
            Some((g, n.options.iter().filter_map(|r| model.index_of(r)).collect()))
        })
        .collect();

    let (mut lower, mut upper) = (0i64, 0i64);
    for (_, opts) in &options {
        let values = opts.iter().map(|&r| model.effectiveness(r));
        upper += values.clone().max().unwrap_or(0).max(0);
        lower += values.min().unwrap_or(0).min(0);
    }
    for (i, (ga, oa)) in options.iter().enumerate() {
        for (gb, ob) in &options[i + 1..] {
            if ga == gb {
                continue;
            }
            let (mut hi, mut lo) = (0i64, 0i64);
            for &ra in oa {
                for &rb in ob {
                    let v = model.interaction(ra, rb);
                    hi = hi.max(v);
                    lo = lo.min(v);
                }
            }
            upper += hi;
            lower += lo;
        }
    }
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn assignment(nodes: &[(&str, i64, &str)]) -> Assignment {
        let mut a = Assignment::default();
        for (n, c, r) in nodes {
            a.executed.insert(NodeId::new(*n));
            a.clock.insert(NodeId::new(*n), *c);
            a.choice.insert(NodeId::new(*n), ResourceId::new(*r));
        }
        a
    }

    #[test]
    fn threshold_examples() {
        let c = ThresholdCombiner::default();
        assert_eq!(eval_f(&c, -1000, 9, 50, 50), 0);
        assert_eq!(eval_f(&c, -5000, 2, 9, 50), 0);
        assert_eq!(eval_f(&c, -1000, 8, 10, 10), -1000);
        assert_eq!(eval_f(&c, 0, 1, 100, 100), 0);
    }

    #[test]
    fn severities() {
        let m = SeverityMap::default();
        assert_eq!(severity_to_interaction(&m, "minor"), Ok(-100));
        assert_eq!(severity_to_interaction(&m, "moderate"), Ok(-1000));
        assert_eq!(severity_to_interaction(&m, "major"), Ok(-5000));
        assert_eq!(
            severity_to_interaction(&m, "severe"),
            Err(ScoringError::UnknownSeverity("severe".into()))
        );
    }

    #[test]
    fn tiny_plus_assignment_breakdown() {
        let inst = fixtures::tiny_plus();
        let eval = evaluate_objective(&inst, &assignment(&[("a", 0, "r0"), ("c", 0, "r2"), ("p", 0, "r3"), ("q", 1, "r1")])).unwrap();
        assert_eq!(eval.objective, -6);
        assert_eq!(eval.effectiveness_total, 14);
        assert_eq!(eval.interaction_total, -20);
        assert_eq!(
            eval.conflicts,
            vec![ConflictRecord {
                node_a: "c".into(),
                node_b: "p".into(),
                resource_a: "r2".into(),
                resource_b: "r3".into(),
                time_distance: 0,
                contribution: -20,
            }]
        );
    }

    #[test]
    fn empty_assignment_scores_zero() {
        let eval = evaluate_objective(&fixtures::tiny_plus(), &Assignment::default()).unwrap();
        assert_eq!(eval, Evaluation::default());
    }

    #[test]
    fn no_interactions_means_zero_interaction_total() {
        let eval = evaluate_objective(&fixtures::tiny(), &assignment(&[("a", 0, "r0"), ("c", 0, "r2"), ("p", 0, "r3"), ("q", 1, "r1")])).unwrap();
        assert_eq!(eval.interaction_total, 0);
        assert_eq!(eval.objective, 14);
    }

    #[test]
    fn rejects_unassigned_or_foreign_choice() {
        let inst = fixtures::tiny();
        let mut a = assignment(&[("a", 0, "r0")]);
        a.clock.clear();
        assert_eq!(evaluate_objective(&inst, &a), Err(ScoringError::UnassignedNode("a".into())));
        let a = assignment(&[("a", 0, "r1")]);
        assert_eq!(evaluate_objective(&inst, &a), Err(ScoringError::UnassignedNode("a".into())));
    }

    #[test]
    fn bounds_of_fixtures() {
        assert_eq!(objective_bounds(&fixtures::tiny()), (0, 17));
        assert_eq!(objective_bounds(&fixtures::tiny_plus()), (-30, 17));
    }

    #[test]
    fn lookup_is_symmetric_and_defaults_to_zero() {
        let t = InteractionTable::from_pairs([("x", "y", -3)]);
        assert_eq!(t.lookup(&"x".into(), &"y".into()), -3);
        assert_eq!(t.lookup(&"y".into(), &"x".into()), -3);
        assert_eq!(t.lookup(&"x".into(), &"x".into()), 0);
    }
}
