use std::time::{Duration, Instant};

use copath_core::error::SolveError;
use copath_core::fixtures;
use copath_core::graph::{check_schedule, check_walk, Topology};
use copath_core::model::{Edge, GraphId, NodeId};
use copath_core::oracle::{oracle_solve, DEFAULT_BUDGET};
use copath_core::scoring::objective_bounds;
use copath_core::smt::{encode_equivalence_with, encode_full_with, FullOptions, PathRuleOptions};
use copath_core::solver::{
    check_equivalence, check_equivalence_artifact, run_artifact, solve_maximize, solve_with, BackendConfig,
    Equivalence, Strategy, Verdict,
};

fn z3() -> BackendConfig {
    BackendConfig::new("z3 -in").with_timeout(Duration::from_secs(60))
}

fn stub(script: &str) -> BackendConfig {
    BackendConfig {
        command: vec!["sh".into(), "-c".into(), format!("cat >/dev/null; {script}")],
        timeout: Duration::from_secs(10),
        supports_maximize: true,
    }
}

#[test]
fn tiny_optimum() {
    let inst = fixtures::tiny();
    let sol = solve_maximize(&z3(), &inst).unwrap();
    assert_eq!(sol.objective, 14);
    let ids: Vec<&str> = sol.executed.iter().map(NodeId::as_str).collect();
    assert_eq!(ids, ["a", "c", "p", "q"]);
    assert!(check_walk(&inst, &sol).is_ok());
    assert!(check_schedule(&inst, &sol).is_empty());
}

#[test]
fn tiny_plus_avoids_conflict() {
    let inst = fixtures::tiny_plus();
    for strategy in [Strategy::Native, Strategy::Iterative] {
        let report = solve_with(&z3(), &inst, strategy).unwrap();
        assert_eq!(report.solution.objective, 3, "{strategy:?}");
        assert!(report.solution.executed.contains(&NodeId::new("b")));
        assert_eq!(report.solution.interaction_total, -10);
    }
}

#[test]
fn fig1_matches_oracle() {
    let inst = fixtures::fig1();
    let oracle = oracle_solve(&inst, DEFAULT_BUDGET).unwrap();
    assert_eq!(oracle.optimum, 11);
    let sol = solve_maximize(&z3(), &inst).unwrap();
    assert_eq!(sol.objective, 11);
    assert!(check_schedule(&inst, &sol).is_empty());
}

#[test]
fn iterative_run_count_is_logarithmic() {
    let inst = fixtures::fig1();
    let report = solve_with(&z3(), &inst, Strategy::Iterative).unwrap();
    let initial = report.initial_objective.unwrap();
    let upper = objective_bounds(&inst).1;
    let gap = (upper - initial).max(1) as f64;
    let bound = 1 + gap.log2().ceil() as usize;
    assert!(report.runs <= bound, "{} runs, bound {bound}", report.runs);
    assert_eq!(report.solution.objective, 11);
}

#[test]
fn pruning_keeps_optimum() {
    let inst = fixtures::tiny_plus();
    for prune in [true, false] {
        let art = encode_full_with(
            &inst,
            FullOptions {
                prune_pairs: prune,
                ..FullOptions::default()
            },
        )
        .unwrap();
        let out = run_artifact(&z3(), &art);
        assert_eq!(out.verdict, Verdict::Sat);
        assert_eq!(out.int("obj").unwrap(), 3);
    }
}

#[test]
fn pins_are_honoured() {
    let mut inst = fixtures::tiny();
    inst.pins.insert(NodeId::new("b"), true);
    assert_eq!(solve_maximize(&z3(), &inst).unwrap().objective, 13);
    // p has a single child, so switching q off leaves G2 without a path
    inst.pins.insert(NodeId::new("q"), false);
    assert!(matches!(solve_maximize(&z3(), &inst), Err(SolveError::Infeasible(_))));
}

#[test]
fn equivalence_holds_and_mutation_is_caught() {
    let inst = fixtures::fig1();
    let topologies: Vec<Topology> = inst.graphs.iter().map(|g| Topology::of(&inst, g)).collect();
    assert_eq!(check_equivalence(&z3(), &topologies).unwrap(), Equivalence::Equivalent);

    let mutated = encode_equivalence_with(&topologies, PathRuleOptions { parent_rule: false }).unwrap();
    match check_equivalence_artifact(&z3(), &mutated).unwrap() {
        Equivalence::Counterexample { selection } => assert!(!selection.is_empty()),
        other => panic!("expected a counterexample, got {other:?}"),
    }
}

#[test]
fn diamond_equivalence() {
    let edges = [Edge::new("s", "x", 0, 0), Edge::new("s", "y", 0, 0), Edge::new("x", "t", 0, 0), Edge::new("y", "t", 0, 0)];
    let topo = Topology::from_parts(GraphId::new("D"), ["s", "x", "y", "t"].map(NodeId::new), &edges);
    assert_eq!(check_equivalence(&z3(), &[topo]).unwrap(), Equivalence::Equivalent);
}

#[test]
fn stub_model_is_rescored() {
    let inst = fixtures::tiny();
    let model = "sat\n((obj 14)(node_a true)(node_b false)(node_c true)(node_p true)(node_q true)\
                 (clock_a 0)(clock_b 0)(clock_c 0)(clock_p 0)(clock_q 0)\
                 (label_a 0)(label_b 1)(label_c 2)(label_p 3)(label_q 1))";
    let sol = solve_maximize(&stub(&format!("printf '{model}'")), &inst).unwrap();
    assert_eq!(sol.objective, 14);

    let lying = model.replace("(obj 14)", "(obj 99)");
    match solve_maximize(&stub(&format!("printf '{lying}'")), &inst) {
        Err(SolveError::ModelMismatch { solver: 99, recomputed: 14 }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn stub_failures_are_classified() {
    let inst = fixtures::tiny();
    assert!(matches!(solve_maximize(&stub("echo unsat"), &inst), Err(SolveError::Infeasible(_))));
    assert!(matches!(
        solve_maximize(&stub("echo '(error \"boom\")'; exit 1"), &inst),
        Err(SolveError::Backend(m)) if m.contains("boom")
    ));
    assert!(matches!(
        solve_maximize(&BackendConfig::new("/nonexistent/solver -in"), &inst),
        Err(SolveError::Backend(_))
    ));
}

#[test]
fn stalling_backend_times_out() {
    let inst = fixtures::tiny();
    let config = stub("sleep 30").with_timeout(Duration::from_millis(300));
    let started = Instant::now();
    assert!(matches!(solve_maximize(&config, &inst), Err(SolveError::Timeout(_))));
    assert!(started.elapsed() < Duration::from_secs(10));
}

#[test]
fn unsat_then_error_is_still_unsat() {
    let topo = Topology::from_parts(GraphId::new("G"), [NodeId::new("n")], &[]);
    let eq = check_equivalence(&stub("printf 'unsat\\n(error \"model is not available\")\\n'"), &[topo]).unwrap();
    assert_eq!(eq, Equivalence::Equivalent);
}
