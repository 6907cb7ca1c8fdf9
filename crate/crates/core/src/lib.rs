//! Joint selection of one path per treatment DAG, one resource per executed
//! step and a schedule, maximising effectiveness minus pairwise interaction
//! penalties. Optimisation is delegated to an external SMT solver; an
//! exhaustive oracle cross-checks small instances.

pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod model;
pub mod oracle;
pub mod scoring;
pub mod sexpr;
pub mod smt;
pub mod solver;
pub mod validate;
pub mod whatif;

pub use error::{EncodeError, GraphError, IoError, OracleError, ScoringError, SolveError, WhatIfError};
pub use graph::{check_schedule, check_walk, Topology, WalkReport, WalkViolation};
pub use model::{Assignment, ConflictRecord, Edge, GraphId, Instance, NodeId, NodeSpec, PathwayGraph, ResourceId, Solution};
pub use oracle::{oracle_solve, OracleResult, DEFAULT_BUDGET};
pub use scoring::{
    eval_f, evaluate_objective, objective_bounds, InteractionTable, Resource, Severity, SeverityMap, ThresholdCombiner,
};
pub use solver::{solve_maximize, solve_with, BackendConfig, SolveReport, Strategy};
pub use validate::{validate_instance, ValidationReport, Violation};
pub use whatif::{apply_delta, diff_solutions, resolve, Diff, WhatIfDelta};
