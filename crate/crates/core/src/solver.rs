//! Running SMT-LIB 2 artifacts through an external solver process.
//!
//! Any solver that reads a script on standard input and answers on standard
//! output works. Maximisation uses the solver's `(maximize ...)` command when
//! [`BackendConfig::supports_maximize`] is set, and otherwise a bound-tightening
//! binary search over `obj >= b` assertions, finished by one `unsat` run.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use wait_timeout::ChildExt;

use crate::error::{EncodeError, SolveError};
use crate::graph::Topology;
use crate::model::{Assignment, Instance, NodeId, Solution};
use crate::scoring::{evaluate_objective, objective_bounds};
use crate::sexpr::{parse_all, Sexp};
use crate::smt::{encode_equivalence, encode_full, EncodeStrategy, SmtArtifact, SmtEntity};

/// Environment variable holding the default backend command line.
pub const BACKEND_ENV: &str = "COPATH_BACKEND";
pub const DEFAULT_BACKEND: &str = "z3 -in";

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub timeout: Duration,
    pub supports_maximize: bool,
}

impl BackendConfig {
    /// Splits `command_line` on whitespace. Solvers named `z3*` are assumed to
    /// support the optimization extension.
    pub fn new(command_line: &str) -> Self {
        let command: Vec<String> = command_line.split_whitespace().map(str::to_owned).collect();
        let supports_maximize = command
            .first()
            .and_then(|p| std::path::Path::new(p).file_name())
            .is_some_and(|n| n.to_string_lossy().starts_with("z3"));
        Self {
            command,
            timeout: Duration::from_secs(60),
            supports_maximize,
        }
    }

    /// Backend from `COPATH_BACKEND`, falling back to `z3 -in`.
    pub fn from_env() -> Self {
        match std::env::var(BACKEND_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Self::new(&cmd),
            _ => Self::new(DEFAULT_BACKEND),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_maximize(mut self, supports: bool) -> Self {
        self.supports_maximize = supports;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "message", rename_all = "snake_case")]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    BackendError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum SmtValue {
    Bool(bool),
    Int(i64),
}

impl SmtValue {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Self::Bool(b) => Some(b),
            Self::Int(_) => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Self::Int(i) => Some(i),
            Self::Bool(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    /// Model values; empty unless the verdict is `sat`.
    pub values: BTreeMap<String, SmtValue>,
    pub raw_transcript: String,
}

impl SolveOutcome {
    fn failed(verdict: Verdict, raw_transcript: String) -> Self {
        Self {
            verdict,
            values: BTreeMap::new(),
            raw_transcript,
        }
    }

    pub fn int(&self, name: &str) -> Result<i64, SolveError> {
        self.values
            .get(name)
            .and_then(|v| v.as_int())
            .ok_or_else(|| SolveError::MissingValue(name.to_owned()))
    }

    pub fn bool(&self, name: &str) -> Result<bool, SolveError> {
        self.values
            .get(name)
            .and_then(|v| v.as_bool())
            .ok_or_else(|| SolveError::MissingValue(name.to_owned()))
    }
}

fn parse_value(v: &Sexp) -> Option<SmtValue> {
    match v {
        Sexp::Atom(a) if a == "true" => Some(SmtValue::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(SmtValue::Bool(false)),
        Sexp::Atom(a) => a.parse().ok().map(SmtValue::Int),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(minus), inner] if minus == "-" => match parse_value(inner)? {
                SmtValue::Int(i) => Some(SmtValue::Int(-i)),
                SmtValue::Bool(_) => None,
            },
            _ => None,
        },
        Sexp::Str(_) => None,
    }
}

/// Interprets a solver transcript. The first `sat`/`unsat`/`unknown` answer
/// is the verdict; errors reported after `unsat` or `unknown` (typically a
/// refused `get-value`) are ignored.
pub fn parse_transcript(transcript: &str) -> SolveOutcome {
    let raw = transcript.to_owned();
    let exprs = match parse_all(transcript) {
        Ok(e) => e,
        Err(e) => return SolveOutcome::failed(Verdict::BackendError(format!("unparseable output: {e}")), raw),
    };
    let mut verdict: Option<Verdict> = None;
    let mut values = BTreeMap::new();
    for e in &exprs {
        match e {
            Sexp::Atom(a) => match a.as_str() {
                "sat" | "unsat" | "unknown" if verdict.is_none() => {
                    verdict = Some(match a.as_str() {
                        "sat" => Verdict::Sat,
                        "unsat" => Verdict::Unsat,
                        _ => Verdict::Unknown,
                    });
                }
                "sat" | "unsat" | "unknown" | "success" => {}
                other => {
                    if verdict.is_none() || verdict == Some(Verdict::Sat) {
                        return SolveOutcome::failed(Verdict::BackendError(format!("unexpected output {other:?}")), raw);
                    }
                }
            },
            Sexp::List(items) => {
                if let Some(Sexp::Atom(head)) = items.first() {
                    if head == "error" {
                        if matches!(verdict, None | Some(Verdict::Sat)) {
                            let msg = match items.get(1) {
                                Some(Sexp::Str(s)) => s.clone(),
                                Some(other) => other.to_string(),
                                None => String::new(),
                            };
                            return SolveOutcome::failed(Verdict::BackendError(msg), raw);
                        }
                        continue;
                    }
                    // e.g. an `(objectives ...)` report
                    continue;
                }
                for binding in items {
                    if let Some([Sexp::Atom(name), value]) = binding.as_list() {
                        if let Some(v) = parse_value(value) {
                            values.insert(name.clone(), v);
                        }
                    }
                }
            }
            Sexp::Str(_) => {}
        }
    }
    match verdict {
        Some(Verdict::Sat) => SolveOutcome {
            verdict: Verdict::Sat,
            values,
            raw_transcript: raw,
        },
        Some(v) => SolveOutcome::failed(v, raw),
        None => SolveOutcome::failed(Verdict::BackendError("no verdict in backend output".into()), raw),
    }
}

/// Runs raw SMT-LIB text through the backend.
pub fn run_text(config: &BackendConfig, text: &str) -> SolveOutcome {
    let Some((program, args)) = config.command.split_first() else {
        return SolveOutcome::failed(Verdict::BackendError("empty backend command".into()), String::new());
    };
    let mut child = match Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => {
            return SolveOutcome::failed(
                Verdict::BackendError(format!("cannot start backend {program:?}: {e}")),
                String::new(),
            )
        }
    };

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = text.to_owned();
    // A backend that exits early closes the pipe; the write error is expected then.
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let status = match child.wait_timeout(config.timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            // Grandchildren may still hold the pipes open, so the I/O threads are left to finish on their own.
            drop((writer, reader, err_reader));
            return SolveOutcome::failed(Verdict::Timeout, String::new());
        }
        Err(e) => {
            let _ = child.kill();
            return SolveOutcome::failed(Verdict::BackendError(format!("waiting for backend: {e}")), String::new());
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();

    let outcome = parse_transcript(&out);
    match (&outcome.verdict, status.success()) {
        (Verdict::BackendError(msg), false) => SolveOutcome::failed(
            Verdict::BackendError(format!("{msg} (exit status {status}; stderr: {})", err.trim())),
            out,
        ),
        _ => outcome,
    }
}

pub fn run_artifact(config: &BackendConfig, artifact: &SmtArtifact) -> SolveOutcome {
    run_text(config, &artifact.text)
}

fn require_sat(config: &BackendConfig, outcome: &SolveOutcome) -> Result<(), SolveError> {
    match &outcome.verdict {
        Verdict::Sat => Ok(()),
        Verdict::Timeout => Err(SolveError::Timeout(config.timeout.as_secs_f64())),
        Verdict::BackendError(m) => Err(SolveError::Backend(m.clone())),
        Verdict::Unsat => Err(SolveError::Infeasible("unsat".into())),
        Verdict::Unknown => Err(SolveError::Infeasible("unknown".into())),
    }
}

/// Reads the executed nodes, clocks and labels out of a `sat` model and
/// rescores them natively; the result must match the solver's `obj`.
pub fn extract_solution(
    instance: &Instance,
    outcome: &SolveOutcome,
    var_map: &BTreeMap<String, SmtEntity>,
) -> Result<Solution, SolveError> {
    if outcome.verdict != Verdict::Sat {
        return Err(SolveError::Infeasible(format!("{:?}", outcome.verdict)));
    }
    let order = instance.resource_order();
    let mut assignment = Assignment::default();
    for entity in var_map.values() {
        let SmtEntity::Node(id) = entity else { continue };
        if !outcome.bool(&entity.name())? {
            continue;
        }
        let clock = outcome.int(&SmtEntity::Clock(id.clone()).name())?;
        let label = outcome.int(&SmtEntity::Label(id.clone()).name())?;
        let resource = usize::try_from(label)
            .ok()
            .and_then(|i| order.get(i))
            .ok_or_else(|| SolveError::InvalidModel(format!("label {label} of node {id} is not a resource index")))?;
        assignment.executed.insert(id.clone());
        assignment.clock.insert(id.clone(), clock);
        assignment.choice.insert(id.clone(), resource.clone());
    }
    let eval = evaluate_objective(instance, &assignment)?;
    let solver_obj = outcome.int(&SmtEntity::Objective.name())?;
    if solver_obj != eval.objective {
        return Err(SolveError::ModelMismatch {
            solver: solver_obj,
            recomputed: eval.objective,
        });
    }
    Ok(Solution {
        executed: assignment.executed,
        clock: assignment.clock,
        choice: assignment.choice,
        objective: eval.objective,
        effectiveness_total: eval.effectiveness_total,
        interaction_total: eval.interaction_total,
        conflicts: eval.conflicts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One run with `(maximize obj)`.
    Native,
    /// Binary search on `obj >= b` with plain satisfiability runs.
    Iterative,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "native" | "native_maximize" => Ok(Self::Native),
            "iterative" | "satisfaction_only" => Ok(Self::Iterative),
            other => Err(format!("unknown strategy {other:?} (expected native or iterative)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: Solution,
    pub strategy: Strategy,
    /// Backend runs, including the first.
    pub runs: usize,
    /// Objective of the first model found by the iterative strategy.
    pub initial_objective: Option<i64>,
    pub upper_bound: Option<i64>,
    pub elapsed: Duration,
}

/// Maximises the objective using the strategy the backend supports.
pub fn solve_maximize(config: &BackendConfig, instance: &Instance) -> Result<Solution, SolveError> {
    let strategy = if config.supports_maximize {
        Strategy::Native
    } else {
        Strategy::Iterative
    };
    solve_with(config, instance, strategy).map(|r| r.solution)
}

pub fn solve_with(config: &BackendConfig, instance: &Instance, strategy: Strategy) -> Result<SolveReport, SolveError> {
    let started = Instant::now();
    match strategy {
        Strategy::Native => {
            let artifact = encode_full(instance, EncodeStrategy::NativeMaximize)?;
            let outcome = run_artifact(config, &artifact);
            require_sat(config, &outcome)?;
            let solution = extract_solution(instance, &outcome, &artifact.var_map)?;
            Ok(SolveReport {
                solution,
                strategy,
                runs: 1,
                initial_objective: None,
                upper_bound: None,
                elapsed: started.elapsed(),
            })
        }
        Strategy::Iterative => {
            let artifact = encode_full(instance, EncodeStrategy::SatisfactionOnly)?;
            let outcome = run_artifact(config, &artifact);
            require_sat(config, &outcome)?;
            let mut best = extract_solution(instance, &outcome, &artifact.var_map)?;
            let initial = best.objective;
            let (_, upper) = objective_bounds(instance);
            let mut hi = upper;
            let mut runs = 1;
            while best.objective < hi {
                let target = best.objective + (hi - best.objective + 1) / 2;
                let bounded = artifact.with_assertion(&format!("(>= obj {})", crate::smt::int(target)));
                let outcome = run_artifact(config, &bounded);
                runs += 1;
                match outcome.verdict {
                    Verdict::Sat => {
                        let next = extract_solution(instance, &outcome, &artifact.var_map)?;
                        if next.objective < target {
                            return Err(SolveError::InvalidModel(format!(
                                "model objective {} violates bound {target}",
                                next.objective
                            )));
                        }
                        best = next;
                    }
                    Verdict::Unsat => hi = target - 1,
                    _ => {
                        require_sat(config, &outcome)?;
                    }
                }
            }
            Ok(SolveReport {
                solution: best,
                strategy,
                runs,
                initial_objective: Some(initial),
                upper_bound: Some(upper),
                elapsed: started.elapsed(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent,
    /// A selection on which the two encodings disagree.
    Counterexample { selection: BTreeMap<NodeId, bool> },
    Inconclusive { reason: String },
}

/// Runs an equivalence artifact and interprets the verdict.
pub fn check_equivalence_artifact(config: &BackendConfig, artifact: &SmtArtifact) -> Result<Equivalence, SolveError> {
    let names = artifact.names_where(|e| matches!(e, SmtEntity::Selection(_)));
    let query = if names.is_empty() {
        String::new()
    } else {
        format!("(get-value ({}))", names.join(" "))
    };
    let outcome = run_artifact(config, &artifact.with_commands(&query));
    match outcome.verdict {
        Verdict::Unsat => Ok(Equivalence::Equivalent),
        Verdict::Sat => {
            let mut selection = BTreeMap::new();
            for (name, entity) in &artifact.var_map {
                if let SmtEntity::Selection(n) = entity {
                    selection.insert(n.clone(), outcome.bool(name)?);
                }
            }
            Ok(Equivalence::Counterexample { selection })
        }
        Verdict::Unknown => Ok(Equivalence::Inconclusive {
            reason: "backend answered unknown".into(),
        }),
        Verdict::Timeout => Ok(Equivalence::Inconclusive {
            reason: format!("timed out after {:.3}s", config.timeout.as_secs_f64()),
        }),
        Verdict::BackendError(m) => Err(SolveError::Backend(m)),
    }
}

/// Checks that the compact and the formal path encodings agree on every
/// selection of the given graphs.
pub fn check_equivalence(config: &BackendConfig, graphs: &[Topology]) -> Result<Equivalence, SolveError> {
    let artifact = encode_equivalence(graphs).map_err(EncodeError::from)?;
    check_equivalence_artifact(config, &artifact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unsat() {
        let o = parse_transcript("unsat\n");
        assert_eq!(o.verdict, Verdict::Unsat);
        assert!(o.values.is_empty());
    }

    #[test]
    fn parses_model_values() {
        let o = parse_transcript("sat\n((obj 14))\n((node_a true)\n (node_b false))\n((clock_a (- 3)))\n");
        assert_eq!(o.verdict, Verdict::Sat);
        assert_eq!(o.values["obj"], SmtValue::Int(14));
        assert_eq!(o.values["node_a"], SmtValue::Bool(true));
        assert_eq!(o.values["node_b"], SmtValue::Bool(false));
        assert_eq!(o.values["clock_a"], SmtValue::Int(-3));
    }

    #[test]
    fn error_before_verdict_is_backend_error() {
        let o = parse_transcript("(error \"line 1 column 2: unknown constant x\")\n");
        assert_eq!(
            o.verdict,
            Verdict::BackendError("line 1 column 2: unknown constant x".into())
        );
    }

    #[test]
    fn error_after_unsat_is_ignored() {
        let o = parse_transcript("unsat\n(error \"line 9 column 10: model is not available\")\n");
        assert_eq!(o.verdict, Verdict::Unsat);
    }

    #[test]
    fn empty_output_has_no_verdict() {
        assert!(matches!(parse_transcript("").verdict, Verdict::BackendError(_)));
        assert!(matches!(parse_transcript("((a").verdict, Verdict::BackendError(_)));
    }

    #[test]
    fn config_parsing() {
        let c = BackendConfig::new("/usr/local/bin/z3 -in");
        assert_eq!(c.command, vec!["/usr/local/bin/z3", "-in"]);
        assert!(c.supports_maximize);
        assert!(!BackendConfig::new("cvc5 --lang smt2").supports_maximize);
    }

    #[test]
    fn missing_program_is_backend_error() {
        let c = BackendConfig::new("/nonexistent/solver");
        assert!(matches!(run_text(&c, "(check-sat)").verdict, Verdict::BackendError(_)));
    }
}
