//! Path-selection constraints over shared `F_<id>` selection variables.
//!
//! `efficient` is the compact form used by the full encoding: sources are
//! selected, a selected node has exactly one selected child (one disjunct
//! per child), and a node whose parents are all unselected is unselected.
//! `formal` states the same conditions the way a proof assistant would
//! phrase them: at-least-one plus pairwise at-most-one child for a selected
//! non-sink, and a selected non-source has a selected parent. The
//! equivalence artifact asks a solver for a selection on which they differ.

use std::collections::BTreeMap;

use super::{and, implies, not, or, ArtifactKind, SmtArtifact, SmtEntity, Writer};
use crate::error::GraphError;
use crate::graph::Topology;
use crate::model::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathRuleOptions {
    /// Emit the "no selected parent implies unselected" rule in `efficient`.
    /// Turning it off yields a deliberately broken encoding for mutation tests.
    pub parent_rule: bool,
}

impl Default for PathRuleOptions {
    fn default() -> Self {
        Self { parent_rule: true }
    }
}

fn sel(n: &NodeId) -> String {
    SmtEntity::Selection(n.clone()).name()
}

fn check(graphs: &[Topology]) -> Result<Vec<NodeId>, GraphError> {
    graphs.iter().map(Topology::source).collect()
}

fn declare_selection(w: &mut Writer, graphs: &[Topology]) {
    for t in graphs {
        for n in &t.nodes {
            w.declare(SmtEntity::Selection(n.clone()), "Bool");
        }
    }
}

fn efficient_body(graphs: &[Topology], sources: &[NodeId], opts: PathRuleOptions) -> String {
    let mut clauses: Vec<String> = sources.iter().map(sel).collect();
    for t in graphs {
        for n in &t.nodes {
            let children = t.children(n);
            if children.is_empty() {
                continue;
            }
            let branches: Vec<String> = children
                .iter()
                .map(|chosen| {
                    let mut conj = vec![sel(chosen)];
                    conj.extend(children.iter().filter(|c| *c != chosen).map(|c| not(&sel(c))));
                    and(&conj)
                })
                .collect();
            clauses.push(implies(&sel(n), &or(&branches)));
        }
        if opts.parent_rule {
            for n in &t.nodes {
                let parents = t.parents(n);
                if parents.is_empty() {
                    continue;
                }
                let none: Vec<String> = parents.iter().map(|p| not(&sel(p))).collect();
                clauses.push(implies(&and(&none), &not(&sel(n))));
            }
        }
    }
    and(&clauses)
}

fn formal_body(graphs: &[Topology], sources: &[NodeId]) -> String {
    // condition one: every source is selected
    let mut clauses: Vec<String> = sources.iter().map(sel).collect();
    for t in graphs {
        // condition two: a selected non-sink has a unique selected child
        for n in &t.nodes {
            let children = t.children(n);
            if children.is_empty() {
                continue;
            }
            let at_least: Vec<String> = children.iter().map(sel).collect();
            clauses.push(implies(&sel(n), &or(&at_least)));
            for (i, c1) in children.iter().enumerate() {
                for c2 in &children[i + 1..] {
                    clauses.push(implies(&sel(n), &not(&and(&[sel(c1), sel(c2)]))));
                }
            }
        }
        // condition three: a selected non-source has a selected parent
        for n in &t.nodes {
            let parents = t.parents(n);
            if parents.is_empty() {
                continue;
            }
            let some: Vec<String> = parents.iter().map(sel).collect();
            clauses.push(implies(&sel(n), &or(&some)));
        }
    }
    and(&clauses)
}

pub fn encode_efficient(graphs: &[Topology]) -> Result<SmtArtifact, GraphError> {
    encode_efficient_with(graphs, PathRuleOptions::default())
}

pub fn encode_efficient_with(graphs: &[Topology], opts: PathRuleOptions) -> Result<SmtArtifact, GraphError> {
    let sources = check(graphs)?;
    let mut w = Writer::new();
    declare_selection(&mut w, graphs);
    w.define_bool(SmtEntity::Efficient, &efficient_body(graphs, &sources, opts));
    Ok(w.finish(ArtifactKind::Efficient))
}

pub fn encode_formal(graphs: &[Topology]) -> Result<SmtArtifact, GraphError> {
    let sources = check(graphs)?;
    let mut w = Writer::new();
    declare_selection(&mut w, graphs);
    w.define_bool(SmtEntity::Formal, &formal_body(graphs, &sources));
    Ok(w.finish(ArtifactKind::Formal))
}

/// Asserts that `efficient` and `formal` differ; `unsat` certifies that the
/// two encodings agree on every selection.
pub fn encode_equivalence(graphs: &[Topology]) -> Result<SmtArtifact, GraphError> {
    encode_equivalence_with(graphs, PathRuleOptions::default())
}

pub fn encode_equivalence_with(graphs: &[Topology], opts: PathRuleOptions) -> Result<SmtArtifact, GraphError> {
    let sources = check(graphs)?;
    let mut w = Writer::new();
    declare_selection(&mut w, graphs);
    w.define_bool(SmtEntity::Efficient, &efficient_body(graphs, &sources, opts));
    w.define_bool(SmtEntity::Formal, &formal_body(graphs, &sources));
    w.assert("(not (= efficient formal))");
    w.line("(check-sat)");
    Ok(w.finish(ArtifactKind::Equivalence))
}

/// Evaluates the `efficient` constraints directly on a selection.
pub fn efficient_holds(graphs: &[Topology], selection: &BTreeMap<NodeId, bool>, opts: PathRuleOptions) -> bool {
    let on = |n: &NodeId| selection.get(n).copied().unwrap_or(false);
    graphs.iter().all(|t| {
        let Ok(source) = t.source() else { return false };
        on(&source)
            && t.nodes.iter().all(|n| {
                let children = t.children(n);
                let child_ok = children.is_empty() || !on(n) || children.iter().filter(|c| on(c)).count() == 1;
                let parents = t.parents(n);
                let parent_ok =
                    !opts.parent_rule || parents.is_empty() || parents.iter().any(on) || !on(n);
                child_ok && parent_ok
            })
    })
}

/// Evaluates the `formal` constraints directly on a selection.
pub fn formal_holds(graphs: &[Topology], selection: &BTreeMap<NodeId, bool>) -> bool {
    let on = |n: &NodeId| selection.get(n).copied().unwrap_or(false);
    graphs.iter().all(|t| {
        let Ok(source) = t.source() else { return false };
        on(&source)
            && t.nodes.iter().all(|n| {
                let children = t.children(n);
                let unique_child = children.is_empty() || !on(n) || children.iter().filter(|c| on(c)).count() == 1;
                let parents = t.parents(n);
                let has_parent = parents.is_empty() || !on(n) || parents.iter().any(on);
                unique_child && has_parent
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, GraphId};

    fn topo(name: &str, edges: &[(&str, &str)]) -> Topology {
        let edges: Vec<Edge> = edges.iter().map(|(a, b)| Edge::new(*a, *b, 0, 0)).collect();
        Topology::from_parts(GraphId::new(name), Vec::new(), &edges)
    }

    #[test]
    fn two_children_give_two_disjuncts() {
        let a = encode_efficient(&[topo("G", &[("a", "b"), ("a", "c")])]).unwrap();
        assert!(a
            .text
            .contains("(=> F_a (or (and F_b (not F_c)) (and F_c (not F_b))))"));
        // sinks b, c get no child rule; source a gets no parent rule
        assert!(!a.text.contains("(=> F_b"));
        assert!(!a.text.contains("(not F_a))"));
    }

    #[test]
    fn diamond_formal_grounding() {
        let a = encode_formal(&[topo("G", &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])]).unwrap();
        assert!(a.text.contains("(=> F_a (or F_b F_c))"));
        assert_eq!(a.text.matches("(=> F_a (not (and").count(), 1);
        assert!(a.text.contains("(=> F_d (or F_b F_c))"));
    }

    #[test]
    fn single_node_formal_is_source_selection() {
        let t = Topology::from_parts(GraphId::new("G"), vec![NodeId::new("n")], &[]);
        let a = encode_formal(&[t]).unwrap();
        assert!(a.text.contains("(define-fun formal () Bool F_n)"));
    }

    #[test]
    fn shared_selection_variables() {
        let graphs = [topo("G", &[("a", "b"), ("a", "c")]), topo("H", &[("p", "q")])];
        let e = encode_efficient(&graphs).unwrap();
        let f = encode_formal(&graphs).unwrap();
        let sel = |a: &SmtArtifact| -> Vec<String> {
            a.names_where(|e| matches!(e, SmtEntity::Selection(_)))
                .into_iter()
                .map(str::to_owned)
                .collect()
        };
        assert_eq!(sel(&e), sel(&f));
        assert_eq!(sel(&e).len(), 5);
    }

    #[test]
    fn empty_graph_list_grounds_to_true() {
        let a = encode_equivalence(&[]).unwrap();
        assert!(a.text.contains("(define-fun efficient () Bool true)"));
        assert!(a.text.contains("(define-fun formal () Bool true)"));
        assert!(a.text.trim_end().ends_with("(check-sat)"));
    }

    #[test]
    fn native_evaluators_agree_on_all_selections() {
        let graphs = [topo("G", &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("c", "e")])];
        let nodes = graphs[0].nodes.clone();
        for mask in 0u32..(1 << nodes.len()) {
            let sel: BTreeMap<NodeId, bool> =
                nodes.iter().enumerate().map(|(i, n)| (n.clone(), mask & (1 << i) != 0)).collect();
            assert_eq!(
                efficient_holds(&graphs, &sel, PathRuleOptions::default()),
                formal_holds(&graphs, &sel)
            );
        }
    }

    #[test]
    fn rejects_multi_source_graph() {
        assert!(encode_equivalence(&[topo("G", &[("a", "b"), ("c", "b")])]).is_err());
    }
}
