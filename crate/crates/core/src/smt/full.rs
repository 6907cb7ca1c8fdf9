use std::collections::BTreeMap;

use super::{and, implies, int, not, or, ArtifactKind, EncodeStrategy, SmtArtifact, SmtEntity, Writer};
use crate::error::EncodeError;
use crate::graph::Topology;
use crate::model::{Instance, NodeId};
use crate::scoring::ScoreModel;
use crate::validate::validate_instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullOptions {
    pub strategy: EncodeStrategy,
    /// Skip pair variables that are identically zero.
    pub prune_pairs: bool,
}

impl Default for FullOptions {
    fn default() -> Self {
        Self {
            strategy: EncodeStrategy::NativeMaximize,
            prune_pairs: true,
        }
    }
}

impl From<EncodeStrategy> for FullOptions {
    fn from(strategy: EncodeStrategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }
}

/// Full optimisation encoding of an instance.
pub fn encode_full(instance: &Instance, strategy: EncodeStrategy) -> Result<SmtArtifact, EncodeError> {
    encode_full_with(instance, strategy.into())
}

struct NodeInfo<'a> {
    id: &'a NodeId,
    graph: usize,
    /// Resource index per option, in option order; also the label value.
    options: Vec<usize>,
}

pub fn encode_full_with(instance: &Instance, opts: FullOptions) -> Result<SmtArtifact, EncodeError> {
    let report = validate_instance(instance);
    if !report.is_ok() {
        return Err(EncodeError::InvalidInstance(report));
    }
    let model = ScoreModel::new(instance);
    let topologies: Vec<Topology> = instance.graphs.iter().map(|g| Topology::of(instance, g)).collect();

    let mut nodes: Vec<NodeInfo> = Vec::new();
    for (gi, topo) in topologies.iter().enumerate() {
        for id in &topo.nodes {
            let spec = instance.node(id.as_str()).expect("validated");
            let options = spec
                .options
                .iter()
                .map(|r| model.index_of(r).expect("validated"))
                .collect();
            nodes.push(NodeInfo { id, graph: gi, options });
        }
    }

    // Cross-graph pairs and their contributing option combinations.
    struct Pair {
        a: usize,
        b: usize,
        combos: Vec<(usize, usize, i64)>,
        /// False when the clocks can never be farther apart than the window.
        needs_window: bool,
    }
    let window = instance.combiner.time_window as i64;
    let ranges = clock_ranges(instance, &topologies);
    let mut pairs: Vec<Pair> = Vec::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if nodes[a].graph == nodes[b].graph {
                continue;
            }
            let (lo_a, hi_a) = ranges[nodes[a].id];
            let (lo_b, hi_b) = ranges[nodes[b].id];
            let closest = (lo_b - hi_a).max(lo_a - hi_b).max(0);
            let farthest = (hi_b - lo_a).max(hi_a - lo_b);
            if opts.prune_pairs && closest > window {
                continue;
            }
            let needs_window = !opts.prune_pairs || farthest > window;
            let mut combos = Vec::new();
            for &ra in &nodes[a].options {
                for &rb in &nodes[b].options {
                    let v = model.effective_interaction(ra, rb);
                    if v != 0 {
                        combos.push((ra, rb, v));
                    }
                }
            }
            if !combos.is_empty() || !opts.prune_pairs {
                pairs.push(Pair { a, b, combos, needs_window });
            }
        }
    }

    let mut w = Writer::new();
    let node_var = |n: &NodeInfo| SmtEntity::Node(n.id.clone()).name();
    let clock_var = |n: &NodeInfo| SmtEntity::Clock(n.id.clone()).name();
    let label_var = |n: &NodeInfo| SmtEntity::Label(n.id.clone()).name();
    let score_var = |n: &NodeInfo| SmtEntity::Score(n.id.clone()).name();
    let pair_var = |p: &Pair| SmtEntity::Pair(nodes[p.a].id.clone(), nodes[p.b].id.clone()).name();

    w.comment("declarations");
    for n in &nodes {
        w.declare(SmtEntity::Node(n.id.clone()), "Bool");
        w.declare(SmtEntity::Clock(n.id.clone()), "Int");
        w.declare(SmtEntity::Label(n.id.clone()), "Int");
        w.declare(SmtEntity::Score(n.id.clone()), "Int");
    }
    for p in &pairs {
        w.declare(SmtEntity::Pair(nodes[p.a].id.clone(), nodes[p.b].id.clone()), "Int");
    }
    w.declare(SmtEntity::Objective, "Int");

    let sources: Vec<NodeId> = topologies.iter().map(|t| t.source().expect("validated")).collect();

    w.comment("sources are executed");
    for s in &sources {
        w.assert(&SmtEntity::Node(s.clone()).name());
    }

    if !instance.pins.is_empty() {
        w.comment("operator pins");
        for (node, &on) in &instance.pins {
            let v = SmtEntity::Node(node.clone()).name();
            w.assert(&if on { v } else { not(&v) });
        }
    }

    w.comment("an executed node has exactly one executed child");
    for topo in &topologies {
        for id in &topo.nodes {
            let children = topo.children(id);
            if children.is_empty() {
                continue;
            }
            let branches: Vec<String> = children
                .iter()
                .map(|chosen| {
                    let mut conj = vec![SmtEntity::Node(chosen.clone()).name()];
                    conj.extend(
                        children
                            .iter()
                            .filter(|c| *c != chosen)
                            .map(|c| not(&SmtEntity::Node(c.clone()).name())),
                    );
                    and(&conj)
                })
                .collect();
            w.assert(&implies(&SmtEntity::Node(id.clone()).name(), &or(&branches)));
        }
    }

    w.comment("a node with no executed parent is not executed");
    for topo in &topologies {
        for id in &topo.nodes {
            let parents = topo.parents(id);
            if parents.is_empty() {
                continue;
            }
            let none: Vec<String> = parents.iter().map(|p| not(&SmtEntity::Node(p.clone()).name())).collect();
            w.assert(&implies(&and(&none), &not(&SmtEntity::Node(id.clone()).name())));
        }
    }

    w.comment("edge time windows");
    for graph in &instance.graphs {
        for e in &graph.edges {
            let delta = format!(
                "(- {} {})",
                SmtEntity::Clock(e.to.clone()).name(),
                SmtEntity::Clock(e.from.clone()).name()
            );
            let guard = and(&[SmtEntity::Node(e.from.clone()).name(), SmtEntity::Node(e.to.clone()).name()]);
            let window = and(&[
                format!("(<= {} {delta})", int(e.t_min as i64)),
                format!("(<= {delta} {})", int(e.t_max as i64)),
            ]);
            w.assert(&implies(&guard, &window));
        }
    }

    w.comment("source start times");
    for (graph, s) in instance.graphs.iter().zip(&sources) {
        w.assert(&format!("(= {} {})", SmtEntity::Clock(s.clone()).name(), int(graph.start_time)));
    }

    w.comment("resource domains");
    for n in &nodes {
        let l = label_var(n);
        let choices: Vec<String> = n.options.iter().map(|v| format!("(= {l} {v})")).collect();
        w.assert(&implies(&node_var(n), &or(&choices)));
    }

    let mut pairs_of: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for p in &pairs {
        pairs_of.entry(p.a).or_default().push(pair_var(p));
        pairs_of.entry(p.b).or_default().push(pair_var(p));
    }

    w.comment("non-executed nodes score zero");
    for (i, n) in nodes.iter().enumerate() {
        let mut zeros = vec![format!("(= {} 0)", score_var(n))];
        if let Some(ps) = pairs_of.get(&i) {
            zeros.extend(ps.iter().map(|p| format!("(= {p} 0)")));
        }
        w.assert(&implies(&not(&node_var(n)), &and(&zeros)));
    }

    w.comment("effectiveness of the chosen resource");
    for n in &nodes {
        let l = label_var(n);
        let value = match n.options.split_last() {
            None => "0".to_owned(),
            Some((&last, rest)) => rest.iter().rev().fold(int(model.effectiveness(last)), |acc, &r| {
                format!("(ite (= {l} {r}) {} {acc})", int(model.effectiveness(r)))
            }),
        };
        w.assert(&implies(&node_var(n), &format!("(= {} {value})", score_var(n))));
    }

    w.comment("interaction scores");
    for p in &pairs {
        let (a, b) = (&nodes[p.a], &nodes[p.b]);
        let delta = format!("(- {} {})", clock_var(b), clock_var(a));
        let within = and(&[
            format!("(<= {} {delta})", int(-window)),
            format!("(<= {delta} {})", int(window)),
        ]);
        let value = p.combos.iter().rev().fold("0".to_owned(), |acc, &(la, lb, v)| {
            let hit = if p.needs_window {
                format!("(ite {within} {} 0)", int(v))
            } else {
                int(v)
            };
            format!(
                "(ite {} {hit} {acc})",
                and(&[format!("(= {} {la})", label_var(a)), format!("(= {} {lb})", label_var(b))])
            )
        });
        let guard = and(&[node_var(a), node_var(b)]);
        w.assert(&implies(&guard, &format!("(= {} {value})", pair_var(p))));
    }

    w.comment("global score");
    let mut terms: Vec<String> = nodes.iter().map(score_var).collect();
    terms.extend(pairs.iter().map(pair_var));
    w.assert(&format!("(= obj {})", super::nary("+", &terms, "0")));

    if opts.strategy == EncodeStrategy::NativeMaximize {
        w.line("(maximize obj)");
    }
    w.line("(check-sat)");
    w.line("(get-value (obj))");
    for make in [node_var, clock_var, label_var] {
        let names: Vec<String> = nodes.iter().map(make).collect();
        if !names.is_empty() {
            w.line(&format!("(get-value ({}))", names.join(" ")));
        }
    }
    Ok(w.finish(ArtifactKind::Full))
}

/// Earliest and latest clock each node can have when executed, following
/// edge windows from its graph's start time.
fn clock_ranges<'a>(instance: &Instance, topologies: &'a [Topology]) -> BTreeMap<&'a NodeId, (i64, i64)> {
    let mut ranges = BTreeMap::new();
    for (graph, topo) in instance.graphs.iter().zip(topologies) {
        let window_of = |from: &NodeId, to: &NodeId| {
            graph
                .edges
                .iter()
                .find(|e| &e.from == from && &e.to == to)
                .map(|e| (e.t_min as i64, e.t_max as i64))
                .expect("edge exists")
        };
        for id in topo.topological_order().expect("validated") {
            let id = topo.nodes.iter().find(|n| **n == id).expect("own node");
            let parents = topo.parents(id);
            let range = if parents.is_empty() {
                (graph.start_time, graph.start_time)
            } else {
                parents.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| {
                    let (plo, phi) = ranges[p];
                    let (tmin, tmax) = window_of(p, id);
                    (lo.min(plo + tmin), hi.max(phi + tmax))
                })
            };
            ranges.insert(id, range);
        }
    }
    ranges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn count(a: &SmtArtifact, pred: fn(&SmtEntity) -> bool) -> usize {
        a.var_map.values().filter(|e| pred(e)).count()
    }

    #[test]
    fn tiny_declarations_and_start_clock() {
        let a = encode_full(&fixtures::tiny(), EncodeStrategy::NativeMaximize).unwrap();
        assert!(a.text.lines().any(|l| l == "(assert (= clock_a 0))"));
        assert_eq!(count(&a, |e| matches!(e, SmtEntity::Node(_))), 5);
        assert_eq!(count(&a, |e| matches!(e, SmtEntity::Clock(_))), 5);
        assert_eq!(count(&a, |e| matches!(e, SmtEntity::Label(_))), 5);
        assert_eq!(count(&a, |e| matches!(e, SmtEntity::Pair(..))), 0);
        assert!(a.text.contains("(maximize obj)"));
        // every declared name is mapped
        let declared = a.text.lines().filter(|l| l.starts_with("(declare-const")).count();
        assert_eq!(declared, a.var_map.len());
    }

    #[test]
    fn tiny_plus_pair_pruning() {
        let a = encode_full(&fixtures::tiny_plus(), EncodeStrategy::SatisfactionOnly).unwrap();
        let pairs = a.names_where(|e| matches!(e, SmtEntity::Pair(..)));
        assert_eq!(pairs, vec!["pair_b__p", "pair_c__p"]);
        assert!(!a.text.contains("maximize"));

        let unpruned = encode_full_with(
            &fixtures::tiny_plus(),
            FullOptions {
                strategy: EncodeStrategy::SatisfactionOnly,
                prune_pairs: false,
            },
        )
        .unwrap();
        // 3 G1 nodes x 2 G2 nodes
        assert_eq!(unpruned.names_where(|e| matches!(e, SmtEntity::Pair(..))).len(), 6);
    }

    #[test]
    fn pairs_out_of_reach_are_dropped() {
        let mut inst = fixtures::tiny_plus();
        inst.graphs[1].start_time = -6;
        let a = encode_full(&inst, EncodeStrategy::NativeMaximize).unwrap();
        assert!(a.names_where(|e| matches!(e, SmtEntity::Pair(..))).is_empty());

        // c and p both sit at 0, so no distance test is needed
        let a = encode_full(&fixtures::tiny_plus(), EncodeStrategy::NativeMaximize).unwrap();
        assert!(a.text.contains("(assert (=> (and node_c node_p) (= pair_c__p (ite (and (= label_c 2) (= label_p 3)) (- 20) 0))))"), "{}", a.text);
        assert!(!a.text.contains("(- clock_p clock_b)"));
        // b lies in [1,2] and p at 0: with a window of 1 the test returns
        let mut narrow = fixtures::tiny_plus();
        narrow.combiner.time_window = 1;
        let a = encode_full(&narrow, EncodeStrategy::NativeMaximize).unwrap();
        assert!(a.text.contains("(<= (- clock_p clock_b) 1)"));
    }

    #[test]
    fn encoding_is_deterministic() {
        let inst = fixtures::fig1();
        let a = encode_full(&inst, EncodeStrategy::NativeMaximize).unwrap();
        let b = encode_full(&inst, EncodeStrategy::NativeMaximize).unwrap();
        assert_eq!(a.text, b.text);
    }

    #[test]
    fn source_gets_no_parent_rule_and_sink_no_child_rule() {
        let a = encode_full(&fixtures::tiny(), EncodeStrategy::NativeMaximize).unwrap();
        assert!(a.text.contains("(assert (=> node_a (or (and node_b (not node_c)) (and node_c (not node_b)))))"));
        assert!(a.text.contains("(assert (=> (not node_a) (not node_b)))"));
        assert!(!a.text.contains("(=> true"));
        assert!(!a.text.contains("(assert (=> node_b node_"));
        assert!(a.text.contains("(assert (=> node_p node_q))"));
    }

    #[test]
    fn rejects_invalid_instance() {
        let mut inst = fixtures::tiny();
        inst.graphs[0].edges[0].t_min = 9;
        assert!(matches!(
            encode_full(&inst, EncodeStrategy::NativeMaximize),
            Err(EncodeError::InvalidInstance(_))
        ));
    }
}
