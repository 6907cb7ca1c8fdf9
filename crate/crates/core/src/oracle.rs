//! Exhaustive ground-truth optimiser for small instances.
//!
//! Enumerates every tuple of per-graph paths, every resource choice for the
//! nodes on those paths and every integer delay `t_min..=t_max` on the chosen
//! edges. Clocks follow from the start times and the delay prefix sums. No
//! pruning: this is the reference the SMT route is checked against.

use serde::Serialize;

use crate::error::{EncodeError, OracleError};
use crate::graph::Topology;
use crate::model::{Assignment, Instance, NodeId, Solution};
use crate::scoring::{dense_objective, evaluate_with, DenseEvent, ScoreModel};
use crate::validate::validate_instance;

pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub optimum: i64,
    pub witness: Solution,
    /// Number of complete assignments evaluated.
    pub explored: u64,
}

struct Step<'a> {
    node: &'a NodeId,
    options: Vec<usize>,
}

struct GraphPath<'a> {
    steps: Vec<Step<'a>>,
    /// (t_min, t_max) of the edge entering each step after the first.
    windows: Vec<(i64, i64)>,
}

impl GraphPath<'_> {
    fn size(&self) -> u128 {
        let choices: u128 = self.steps.iter().map(|s| s.options.len() as u128).product();
        let delays: u128 = self.windows.iter().map(|(lo, hi)| (hi - lo + 1) as u128).product();
        choices.saturating_mul(delays)
    }
}

struct Space<'a> {
    start: Vec<i64>,
    paths: Vec<Vec<GraphPath<'a>>>,
}

fn build_space<'a>(instance: &'a Instance, model: &ScoreModel) -> Result<Space<'a>, OracleError> {
    let report = validate_instance(instance);
    if !report.is_ok() {
        return Err(EncodeError::InvalidInstance(report).into());
    }
    let mut paths = Vec::new();
    for graph in &instance.graphs {
        let topo = Topology::of(instance, graph);
        let mut admissible = Vec::new();
        for path in topo.realizable_paths().map_err(EncodeError::from)? {
            let pinned_ok = instance.pins.iter().all(|(node, &on)| {
                topo.nodes.binary_search(node).is_err() || path.contains(node) == on
            });
            if !pinned_ok {
                continue;
            }
            let mut steps = Vec::with_capacity(path.len());
            for id in &path {
                let spec = instance.node(id.as_str()).expect("validated");
                let node = &spec.id;
                let options: Vec<usize> = spec.options.iter().map(|r| model.index_of(r).expect("validated")).collect();
                steps.push(Step { node, options });
            }
            if steps.iter().any(|s| s.options.is_empty()) {
                continue;
            }
            let windows = path
                .windows(2)
                .map(|w| {
                    let e = graph
                        .edges
                        .iter()
                        .find(|e| e.from == w[0] && e.to == w[1])
                        .expect("path follows edges");
                    (e.t_min as i64, e.t_max as i64)
                })
                .collect();
            admissible.push(GraphPath { steps, windows });
        }
        if admissible.is_empty() {
            return Err(OracleError::Infeasible(graph.id.clone()));
        }
        paths.push(admissible);
    }
    Ok(Space {
        start: instance.graphs.iter().map(|g| g.start_time).collect(),
        paths,
    })
}

impl Space<'_> {
    fn size(&self) -> u128 {
        self.paths
            .iter()
            .map(|ps| ps.iter().map(GraphPath::size).fold(0u128, u128::saturating_add))
            .fold(1u128, u128::saturating_mul)
    }
}

struct Best {
    optimum: i64,
    path_digits: Vec<usize>,
    /// Per executed step, in path order.
    resources: Vec<usize>,
    clocks: Vec<i64>,
}

/// Visits every digit vector below `radices`, last digit fastest.
fn odometer(radices: &[usize], mut visit: impl FnMut(&[usize])) {
    if radices.contains(&0) {
        return;
    }
    let mut digits = vec![0; radices.len()];
    loop {
        visit(&digits);
        let mut i = radices.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Size of the enumerated space (assignments), without enumerating it.
pub fn search_space_size(instance: &Instance) -> Result<u128, OracleError> {
    let model = ScoreModel::new(instance);
    Ok(build_space(instance, &model)?.size())
}

pub fn oracle_solve(instance: &Instance, budget: u128) -> Result<OracleResult, OracleError> {
    let model = ScoreModel::new(instance);
    let space = build_space(instance, &model)?;
    let size = space.size();
    if size > budget {
        return Err(OracleError::BudgetExceeded { size, budget });
    }

    let path_radices: Vec<usize> = space.paths.iter().map(Vec::len).collect();
    let mut explored = 0u64;
    let mut best: Option<Best> = None;
    let mut events: Vec<DenseEvent> = Vec::new();

    odometer(&path_radices, |path_digits| {
        let chosen: Vec<&GraphPath> = path_digits.iter().enumerate().map(|(g, &p)| &space.paths[g][p]).collect();
        let option_radices: Vec<usize> = chosen.iter().flat_map(|p| p.steps.iter().map(|s| s.options.len())).collect();
        let delay_radices: Vec<usize> = chosen
            .iter()
            .flat_map(|p| p.windows.iter().map(|(lo, hi)| (hi - lo + 1) as usize))
            .collect();

        odometer(&option_radices, |option_digits| {
            odometer(&delay_radices, |delay_digits| {
                events.clear();
                let (mut o, mut d) = (0, 0);
                for (g, path) in chosen.iter().enumerate() {
                    let mut clock = space.start[g];
                    for (k, step) in path.steps.iter().enumerate() {
                        if k > 0 {
                            clock += path.windows[k - 1].0 + delay_digits[d] as i64;
                            d += 1;
                        }
                        events.push(DenseEvent {
                            graph: g,
                            resource: step.options[option_digits[o]],
                            clock,
                        });
                        o += 1;
                    }
                }
                explored += 1;
                let value = dense_objective(&model, &events);
                if best.as_ref().is_none_or(|b| value > b.optimum) {
                    best = Some(Best {
                        optimum: value,
                        path_digits: path_digits.to_vec(),
                        resources: events.iter().map(|e| e.resource).collect(),
                        clocks: events.iter().map(|e| e.clock).collect(),
                    });
                }
            });
        });
    });

    let Best { optimum, path_digits, resources, clocks } = best.expect("every graph has an admissible path");
    let mut assignment = Assignment::default();
    let steps = path_digits
        .iter()
        .enumerate()
        .flat_map(|(g, &p)| space.paths[g][p].steps.iter());
    for ((step, r), c) in steps.zip(resources).zip(clocks) {
        assignment.executed.insert(step.node.clone());
        assignment.clock.insert(step.node.clone(), c);
        assignment.choice.insert(step.node.clone(), model.resources[r].clone());
    }
    let eval = evaluate_with(instance, &model, &assignment).expect("oracle assignment is complete");
    debug_assert_eq!(eval.objective, optimum);
    Ok(OracleResult {
        optimum,
        witness: Solution {
            executed: assignment.executed,
            clock: assignment.clock,
            choice: assignment.choice,
            objective: eval.objective,
            effectiveness_total: eval.effectiveness_total,
            interaction_total: eval.interaction_total,
            conflicts: eval.conflicts,
        },
        explored,
    })
}

/// Whether `solution` reaches the exhaustive optimum.
pub fn oracle_agrees(instance: &Instance, solution: &Solution, budget: u128) -> Result<bool, OracleError> {
    Ok(oracle_solve(instance, budget)?.optimum == solution.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{check_schedule, check_walk};
    use crate::model::NodeId;

    fn executed(r: &OracleResult) -> Vec<&str> {
        r.witness.executed.iter().map(NodeId::as_str).collect()
    }

    #[test]
    fn tiny_optimum_and_count() {
        let inst = fixtures::tiny();
        let r = oracle_solve(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 14);
        assert_eq!(executed(&r), ["a", "c", "p", "q"]);
        // G1: a->b has 2 delays, a->c has 1; G2: p->q has 4
        assert_eq!(r.explored, 3 * 4);
        assert!(check_walk(&inst, &r.witness).is_ok());
        assert!(check_schedule(&inst, &r.witness).is_empty());
    }

    #[test]
    fn tiny_plus_prefers_b() {
        let r = oracle_solve(&fixtures::tiny_plus(), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 3);
        assert_eq!(executed(&r), ["a", "b", "p", "q"]);
        assert_eq!(r.witness.interaction_total, -10);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            oracle_solve(&fixtures::tiny(), 11),
            Err(OracleError::BudgetExceeded { size: 12, budget: 11 })
        ));
        assert_eq!(search_space_size(&fixtures::tiny()).unwrap(), 12);
    }

    #[test]
    fn zero_scores_give_zero_optimum() {
        let mut inst = fixtures::tiny();
        for r in &mut inst.resources {
            r.effectiveness = 0;
        }
        assert_eq!(oracle_solve(&inst, DEFAULT_BUDGET).unwrap().optimum, 0);
    }

    #[test]
    fn agreement() {
        let inst = fixtures::tiny();
        let forced_b = Solution {
            objective: 13,
            ..Default::default()
        };
        assert!(!oracle_agrees(&inst, &forced_b, DEFAULT_BUDGET).unwrap());
        let r = oracle_solve(&inst, DEFAULT_BUDGET).unwrap();
        assert!(oracle_agrees(&inst, &r.witness, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn pins_restrict_paths() {
        let mut inst = fixtures::tiny();
        inst.pins.insert("b".into(), true);
        let r = oracle_solve(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 13);
        inst.pins.insert("c".into(), true);
        assert!(matches!(oracle_solve(&inst, DEFAULT_BUDGET), Err(OracleError::Infeasible(_))));
    }

    #[test]
    fn odometer_order() {
        let mut seen = Vec::new();
        odometer(&[2, 3], |d| seen.push(d.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], [0, 0]);
        assert_eq!(seen[1], [0, 1]);
        assert_eq!(seen[5], [1, 2]);
        let mut n = 0;
        odometer(&[], |_| n += 1);
        assert_eq!(n, 1);
    }
}
