use thiserror::Error;

use crate::model::{GraphId, NodeId};
use crate::validate::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph {0} contains a directed cycle")]
    Cyclic(GraphId),
    #[error("graph {0} has no source node")]
    NoSource(GraphId),
    #[error("graph {0} has several sources: {list}", list = crate::validate::join(.1))]
    MultipleSources(GraphId, Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("executed node {0} has no clock or no admissible resource")]
    UnassignedNode(NodeId),
    #[error("unknown severity {0:?} (expected minor, moderate or major)")]
    UnknownSeverity(String),
}

#[derive(Debug, Clone, Error)]
pub enum EncodeError {
    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),
    #[error(transparent)]
    InvalidGraph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("backend timed out after {0:.3}s")]
    Timeout(f64),
    #[error("backend answered {0} where a model was required")]
    Infeasible(String),
    #[error("solver objective {solver} differs from recomputed objective {recomputed}")]
    ModelMismatch { solver: i64, recomputed: i64 },
    #[error("model is missing value for {0}")]
    MissingValue(String),
    #[error("malformed model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("search space of {size} assignments exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("no feasible assignment: graph {0} has no admissible path")]
    Infeasible(GraphId),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{file}:{line}: {reason}")]
    Parse { file: String, line: usize, reason: String },
    #[error("invalid instance: {0}")]
    Validation(ValidationReport),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    pub fn parse(file: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Self::Parse {
            file: file.into(),
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum WhatIfError {
    #[error("delta leaves node {0} without resources while it may still be executed")]
    InfeasibleDelta(NodeId),
    #[error("delta references unknown {0}")]
    UnknownEntity(String),
    #[error("inconsistent delta: {0}")]
    InvalidDelta(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
