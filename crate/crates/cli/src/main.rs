//! `copath`: payloads on stdout, diagnostics on stderr.
//!
//! Exit codes: 0 success, 1 domain failure (invalid instance, infeasible
//! delta, counterexample), 2 usage or input error, 3 backend failure.

use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use copath_core::error::{IoError, OracleError, SolveError, WhatIfError};
use copath_core::graph::Topology;
use copath_core::io::csv::{load_csv, save_csv};
use copath_core::io::dot::export_dot;
use copath_core::io::generate::{generate_synthetic, GeneratorSpec};
use copath_core::io::json::{load_json, load_solution_json, save_json, to_canonical_json};
use copath_core::model::{Instance, Solution};
use copath_core::oracle::{oracle_solve, DEFAULT_BUDGET};
use copath_core::smt::{
    encode_efficient, encode_equivalence_with, encode_formal, encode_full_with, EncodeStrategy, FullOptions,
    PathRuleOptions, SmtArtifact,
};
use copath_core::solver::{check_equivalence_artifact, solve_with, BackendConfig, Equivalence, Strategy};
use copath_core::validate::validate_instance;
use copath_core::whatif::{apply_delta, resolve, WhatIfDelta};
use copath_service::view::SolutionView;
use copath_service::ServiceConfig;
use serde_json::json;

#[derive(Parser)]
#[command(name = "copath", version, about = "Joint path selection and scheduling over treatment DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Full,
    Efficient,
    Formal,
    Equivalence,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Native,
    Iterative,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Native => Strategy::Native,
            StrategyArg::Iterative => Strategy::Iterative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Table,
}

#[derive(clap::Args)]
struct BackendArgs {
    /// Solver command line reading SMT-LIB on stdin.
    #[arg(long, env = "COPATH_BACKEND", default_value = copath_core::solver::DEFAULT_BACKEND)]
    backend: String,
    /// Per-run timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
}

impl BackendArgs {
    fn config(&self) -> Result<BackendConfig, Failure> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(Failure::usage("--timeout must be a positive number of seconds"));
        }
        let config = BackendConfig::new(&self.backend).with_timeout(Duration::from_secs_f64(self.timeout));
        if config.command.is_empty() {
            return Err(Failure::usage("--backend is empty"));
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance (JSON file or CSV directory) for structural problems.
    Validate { input: PathBuf },
    /// Print an SMT-LIB document for the instance.
    Encode {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "native")]
        strategy: StrategyArg,
        /// Keep pair variables that can never be nonzero.
        #[arg(long)]
        no_prune: bool,
        /// Leave out the parent rule (equivalence kind only).
        #[arg(long)]
        drop_parent_rule: bool,
    },
    /// Optimise with the external solver.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        /// Defaults to native when the backend supports maximisation.
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exhaustive optimum, for small instances.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check that the compact and formal path encodings agree.
    Equiv {
        input: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        /// Leave out the parent rule; a counterexample is then expected.
        #[arg(long)]
        drop_parent_rule: bool,
    },
    /// Re-solve under a delta and report the differences.
    Whatif {
        input: PathBuf,
        /// Delta as a JSON file or inline JSON.
        #[arg(long)]
        delta: String,
        /// Solution JSON to diff against; solved from scratch when absent.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Write a seeded synthetic instance as instance.json plus CSV files.
    Generate {
        /// Generator settings as JSON; missing fields take defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory for the session snapshot.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long, env = "COPATH_BACKEND", default_value = copath_core::solver::DEFAULT_BACKEND)]
        backend: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn backend(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io(_) => Self::usage(e.to_string()),
            IoError::Validation(report) => Self::domain(violation_list(&report)),
            IoError::Parse { .. } => Self::domain(e.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Infeasible(_) | SolveError::Encode(_) => Self::domain(e.to_string()),
            _ => Self::backend(e.to_string()),
        }
    }
}

impl From<WhatIfError> for Failure {
    fn from(e: WhatIfError) -> Self {
        match e {
            WhatIfError::Solve(inner) => inner.into(),
            other => Self::domain(other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Self::domain(e.to_string())
    }
}

fn violation_list(report: &copath_core::validate::ValidationReport) -> String {
    let mut s = format!("{} violation(s):", report.violations.len());
    for v in &report.violations {
        let _ = write!(s, "\n  {v}");
    }
    s
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Loads a JSON file or CSV directory without validating it.
fn load_unchecked(path: &Path) -> Result<Instance, Failure> {
    if path.is_dir() {
        return Ok(load_csv(path)?);
    }
    load_json(&read_text(path)?).map_err(|e| match e {
        IoError::Parse { line, reason, .. } => Failure::domain(format!("{}:{line}: {reason}", path.display())),
        other => other.into(),
    })
}

fn load_valid(path: &Path) -> Result<Instance, Failure> {
    let instance = load_unchecked(path)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(Failure::domain(violation_list(&report)));
    }
    Ok(instance)
}

fn topologies(instance: &Instance) -> Vec<Topology> {
    instance.graphs.iter().map(|g| Topology::of(instance, g)).collect()
}

fn table(instance: &Instance, solution: &Solution) -> String {
    let view = SolutionView::new(instance, solution);
    let mut rows = vec![[
        "graph".to_owned(),
        "node".into(),
        "resource".into(),
        "clock".into(),
        "score".into(),
        "conflicts".into(),
        "conflict score".into(),
    ]];
    for n in &view.nodes {
        let na = || "N/A".to_owned();
        rows.push([
            n.graph.clone(),
            n.node.to_string(),
            n.resource_name.clone().unwrap_or_else(na),
            n.clock.map_or_else(na, |c| c.to_string()),
            if n.executed { n.score.to_string() } else { na() },
            n.conflicts
                .iter()
                .map(|c| format!("{}({})", c.partner, c.contribution))
                .collect::<Vec<_>>()
                .join(" "),
            if n.conflicts.is_empty() { String::new() } else { n.conflict_score.to_string() },
        ]);
    }
    let widths: Vec<usize> = (0..7).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    let _ = writeln!(
        out,
        "objective {}  (effectiveness {}, interactions {})",
        view.objective, view.effectiveness_total, view.interaction_total
    );
    out
}

fn render(format: Format, instance: &Instance, solution: &Solution) -> String {
    match format {
        Format::Json => to_canonical_json(solution),
        Format::Dot => export_dot(instance, Some(solution)),
        Format::Table => table(instance, solution),
    }
}

fn artifact(instance: &Instance, kind: Kind, strategy: StrategyArg, prune: bool, drop_parent: bool) -> Result<SmtArtifact, Failure> {
    let graph_err = |e: copath_core::error::GraphError| Failure::domain(e.to_string());
    match kind {
        Kind::Full => {
            let strategy = match strategy {
                StrategyArg::Native => EncodeStrategy::NativeMaximize,
                StrategyArg::Iterative => EncodeStrategy::SatisfactionOnly,
            };
            encode_full_with(instance, FullOptions { strategy, prune_pairs: prune }).map_err(|e| Failure::domain(e.to_string()))
        }
        Kind::Efficient => encode_efficient(&topologies(instance)).map_err(graph_err),
        Kind::Formal => encode_formal(&topologies(instance)).map_err(graph_err),
        Kind::Equivalence => {
            encode_equivalence_with(&topologies(instance), PathRuleOptions { parent_rule: !drop_parent }).map_err(graph_err)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { input } => {
            let instance = load_unchecked(&input)?;
            let report = validate_instance(&instance);
            if !report.is_ok() {
                return Err(Failure::domain(violation_list(&report)));
            }
            println!(
                "valid: {} graphs, {} nodes, {} resources, {} interactions",
                instance.graphs.len(),
                instance.nodes.len(),
                instance.resources.len(),
                instance.interactions.len()
            );
        }
        Command::Encode { input, kind, strategy, no_prune, drop_parent_rule } => {
            let instance = load_valid(&input)?;
            print!("{}", artifact(&instance, kind, strategy, !no_prune, drop_parent_rule)?.text);
        }
        Command::Solve { input, backend, strategy, format } => {
            let instance = load_valid(&input)?;
            let config = backend.config()?;
            let strategy = strategy.map_or(
                if config.supports_maximize { Strategy::Native } else { Strategy::Iterative },
                Strategy::from,
            );
            let report = solve_with(&config, &instance, strategy)?;
            eprintln!(
                "{:?} strategy: objective {} after {} run(s) in {:.2}s",
                report.strategy,
                report.solution.objective,
                report.runs,
                report.elapsed.as_secs_f64()
            );
            print!("{}", render(format, &instance, &report.solution));
        }
        Command::Oracle { input, budget, format } => {
            let instance = load_valid(&input)?;
            let result = oracle_solve(&instance, budget)?;
            eprintln!("explored {} assignments", result.explored);
            match format {
                Format::Json => print!(
                    "{}",
                    to_canonical_json(&json!({
                        "optimum": result.optimum,
                        "explored": result.explored,
                        "witness": result.witness,
                    }))
                ),
                other => print!("{}", render(other, &instance, &result.witness)),
            }
        }
        Command::Equiv { input, backend, drop_parent_rule } => {
            let instance = load_valid(&input)?;
            let art = artifact(&instance, Kind::Equivalence, StrategyArg::Native, true, drop_parent_rule)?;
            match check_equivalence_artifact(&backend.config()?, &art)? {
                Equivalence::Equivalent => println!("equivalent"),
                Equivalence::Counterexample { selection } => {
                    println!("counterexample");
                    print!("{}", to_canonical_json(&selection));
                    return Err(Failure::domain("the encodings disagree on the selection above"));
                }
                Equivalence::Inconclusive { reason } => {
                    println!("inconclusive");
                    return Err(Failure::backend(reason));
                }
            }
        }
        Command::Whatif { input, delta, baseline, backend, format } => {
            let instance = load_valid(&input)?;
            let delta_text = if delta.trim_start().starts_with('{') { delta } else { read_text(Path::new(&delta))? };
            let delta: WhatIfDelta =
                serde_json::from_str(&delta_text).map_err(|e| Failure::usage(format!("bad delta: {e}")))?;
            let config = backend.config()?;
            let baseline = match baseline {
                Some(path) => load_solution_json(&read_text(&path)?).map_err(|e| Failure::usage(e.to_string()))?,
                None => copath_core::solver::solve_maximize(&config, &instance)?,
            };
            let (solution, diff) = resolve(&config, &instance, &delta, Some(&baseline))?;
            match format {
                Format::Json => print!("{}", to_canonical_json(&json!({ "solution": solution, "diff": diff }))),
                other => {
                    let derived = apply_delta(&instance, &delta)?;
                    print!("{}", render(other, &derived, &solution));
                    let before = diff.objective_before.map_or_else(|| "none".to_owned(), |o| o.to_string());
                    eprintln!("objective {before} -> {} ({:+})", diff.objective_after, diff.objective_delta);
                }
            }
        }
        Command::Generate { spec, seed, out } => {
            let mut spec: GeneratorSpec = match spec {
                Some(path) => serde_json::from_str(&read_text(&path)?)
                    .map_err(|e| Failure::usage(format!("bad generator spec: {e}")))?,
                None => GeneratorSpec::default(),
            };
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            spec.check().map_err(Failure::usage)?;
            let instance = generate_synthetic(&spec);
            fs::create_dir_all(&out).map_err(|e| Failure::usage(format!("cannot create {}: {e}", out.display())))?;
            fs::write(out.join("instance.json"), save_json(&instance))
                .map_err(|e| Failure::usage(format!("cannot write instance.json: {e}")))?;
            save_csv(&instance).write_dir(&out)?;
            println!(
                "{}: {} graphs, {} nodes, {} resources, {} interactions",
                out.display(),
                instance.graphs.len(),
                instance.nodes.len(),
                instance.resources.len(),
                instance.interactions.len()
            );
        }
        Command::Serve { port, host, data_dir, backend } => {
            let config = ServiceConfig { backend: BackendConfig::new(&backend), data_dir };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::usage(e.to_string()))?;
            runtime
                .block_on(copath_service::serve(SocketAddr::new(host, port), config))
                .map_err(|e| Failure::usage(format!("server error: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
