//! Directory-of-CSV instance format.
//!
//! | file               | columns                                           |
//! |--------------------|---------------------------------------------------|
//! | `edges.csv`        | `graph_id,src,dst,t_min,t_max`                    |
//! | `nodes.csv`        | `graph_id,node_id,label,options` (`;`-separated)  |
//! | `resources.csv`    | `resource_id,name,effectiveness,amount`           |
//! | `interactions.csv` | `resource_a,resource_b,value_or_severity`         |
//! | `starts.csv`       | `graph_id,tau`                                    |
//!
//! All five files are required; `starts.csv` may omit graphs (their start
//! time is 0). An optional
//! `settings.csv` (`key,value` with `time_window`, `amount_floor`) carries the
//! combiner; without it the defaults apply.

use std::fs;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::model::{Edge, Instance, NodeSpec, PathwayGraph, ResourceId};
use crate::scoring::{InteractionEntry, InteractionTable, Resource, Severity, SeverityMap, ThresholdCombiner};
use crate::validate::validate_instance;

pub const EDGES: &str = "edges.csv";
pub const NODES: &str = "nodes.csv";
pub const RESOURCES: &str = "resources.csv";
pub const INTERACTIONS: &str = "interactions.csv";
pub const STARTS: &str = "starts.csv";
pub const SETTINGS: &str = "settings.csv";

/// In-memory contents of the CSV files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvBundle {
    pub edges: String,
    pub nodes: String,
    pub resources: String,
    pub interactions: String,
    pub starts: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<String>,
}

impl CsvBundle {
    pub fn read_dir(dir: &Path) -> Result<Self, IoError> {
        let read = |name: &str| fs::read_to_string(dir.join(name));
        let optional = |name: &str| -> Result<Option<String>, IoError> {
            match fs::read_to_string(dir.join(name)) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(e.into()),
            }
        };
        Ok(Self {
            edges: read(EDGES)?,
            nodes: read(NODES)?,
            resources: read(RESOURCES)?,
            interactions: read(INTERACTIONS)?,
            starts: read(STARTS)?,
            settings: optional(SETTINGS)?,
        })
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), IoError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(EDGES), &self.edges)?;
        fs::write(dir.join(NODES), &self.nodes)?;
        fs::write(dir.join(RESOURCES), &self.resources)?;
        fs::write(dir.join(INTERACTIONS), &self.interactions)?;
        fs::write(dir.join(STARTS), &self.starts)?;
        if let Some(s) = &self.settings {
            fs::write(dir.join(SETTINGS), s)?;
        }
        Ok(())
    }
}

struct Table<'a> {
    file: &'a str,
    rows: Vec<(usize, StringRecord)>,
}

fn read_table<'a>(file: &'a str, text: &str, header: &[&str]) -> Result<Table<'a>, IoError> {
    let mut reader = ReaderBuilder::new().trim(Trim::All).from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| IoError::parse(file, 1, e.to_string()))?
        .clone();
    let found: Vec<&str> = found.iter().collect();
    if found != header {
        return Err(IoError::parse(file, 1, format!("expected header {}, found {}", header.join(","), found.join(","))));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            IoError::parse(file, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec));
    }
    Ok(Table { file, rows })
}

impl Table<'_> {
    fn int<T: std::str::FromStr>(&self, line: usize, field: &str, what: &str) -> Result<T, IoError> {
        field
            .parse()
            .map_err(|_| IoError::parse(self.file, line, format!("{what}: expected an integer, found {field:?}")))
    }
}

/// Parses a bundle and validates the resulting instance.
pub fn parse_bundle(bundle: &CsvBundle, severities: &SeverityMap) -> Result<Instance, IoError> {
    let instance = parse_bundle_unvalidated(bundle, severities)?;
    let report = validate_instance(&instance);
    if report.is_ok() {
        Ok(instance)
    } else {
        Err(IoError::Validation(report))
    }
}

fn parse_bundle_unvalidated(bundle: &CsvBundle, severities: &SeverityMap) -> Result<Instance, IoError> {
    let starts = read_table(STARTS, &bundle.starts, &["graph_id", "tau"])?;
    let nodes = read_table(NODES, &bundle.nodes, &["graph_id", "node_id", "label", "options"])?;
    let edges = read_table(EDGES, &bundle.edges, &["graph_id", "src", "dst", "t_min", "t_max"])?;
    let resources = read_table(RESOURCES, &bundle.resources, &["resource_id", "name", "effectiveness", "amount"])?;
    let interactions = read_table(INTERACTIONS, &bundle.interactions, &["resource_a", "resource_b", "value_or_severity"])?;

    let mut graphs: Vec<PathwayGraph> = Vec::new();
    fn graph_mut<'g>(graphs: &'g mut Vec<PathwayGraph>, id: &str) -> &'g mut PathwayGraph {
        if let Some(i) = graphs.iter().position(|g| g.id.as_str() == id) {
            &mut graphs[i]
        } else {
            graphs.push(PathwayGraph::new(id, Vec::new(), 0));
            graphs.last_mut().expect("just pushed")
        }
    }

    for (line, r) in &starts.rows {
        if graphs.iter().any(|g| g.id.as_str() == &r[0]) {
            return Err(IoError::parse(STARTS, *line, format!("graph {} listed twice", &r[0])));
        }
        let tau = starts.int(*line, &r[1], "tau")?;
        graph_mut(&mut graphs, &r[0]).start_time = tau;
    }

    let mut node_specs = Vec::new();
    for (_, r) in &nodes.rows {
        graph_mut(&mut graphs, &r[0]);
        let options: Vec<ResourceId> = r[3]
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(ResourceId::from)
            .collect();
        node_specs.push(NodeSpec {
            id: r[1].into(),
            graph: r[0].into(),
            display_label: r[2].to_owned(),
            options,
        });
    }

    for (line, r) in &edges.rows {
        let t_min = edges.int(*line, &r[3], "t_min")?;
        let t_max = edges.int(*line, &r[4], "t_max")?;
        graph_mut(&mut graphs, &r[0]).edges.push(Edge::new(&r[1], &r[2], t_min, t_max));
    }

    let mut res = Vec::new();
    for (line, r) in &resources.rows {
        res.push(Resource {
            id: r[0].into(),
            name: r[1].to_owned(),
            effectiveness: resources.int(*line, &r[2], "effectiveness")?,
            amount: resources.int(*line, &r[3], "amount")?,
        });
    }

    let mut entries = Vec::new();
    for (line, r) in &interactions.rows {
        let value = match r[2].parse::<i64>() {
            Ok(v) => v,
            Err(_) => {
                let sev: Severity = r[2]
                    .parse()
                    .map_err(|e: crate::error::ScoringError| IoError::parse(INTERACTIONS, *line, e.to_string()))?;
                severities.value(sev)
            }
        };
        entries.push(InteractionEntry {
            resource_a: r[0].into(),
            resource_b: r[1].into(),
            value,
        });
    }

    let mut combiner = ThresholdCombiner::default();
    if let Some(text) = &bundle.settings {
        let settings = read_table(SETTINGS, text, &["key", "value"])?;
        for (line, r) in &settings.rows {
            match &r[0] {
                "time_window" => combiner.time_window = settings.int(*line, &r[1], "time_window")?,
                "amount_floor" => combiner.amount_floor = settings.int(*line, &r[1], "amount_floor")?,
                other => return Err(IoError::parse(SETTINGS, *line, format!("unknown setting {other:?}"))),
            }
        }
    }

    Ok(Instance {
        graphs,
        nodes: node_specs,
        resources: res,
        interactions: InteractionTable { entries },
        combiner,
        pins: Default::default(),
    })
}

pub fn load_csv(dir: &Path) -> Result<Instance, IoError> {
    load_csv_with(dir, &SeverityMap::default())
}

pub fn load_csv_with(dir: &Path, severities: &SeverityMap) -> Result<Instance, IoError> {
    parse_bundle(&CsvBundle::read_dir(dir)?, severities)
}

fn write_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Inverse of [`parse_bundle`]. Operator pins are not represented.
pub fn save_csv(instance: &Instance) -> CsvBundle {
    let edges = write_rows(
        &["graph_id", "src", "dst", "t_min", "t_max"],
        instance.graphs.iter().flat_map(|g| {
            g.edges.iter().map(move |e| {
                vec![
                    g.id.0.clone(),
                    e.from.0.clone(),
                    e.to.0.clone(),
                    e.t_min.to_string(),
                    e.t_max.to_string(),
                ]
            })
        }),
    );
    let nodes = write_rows(
        &["graph_id", "node_id", "label", "options"],
        instance.nodes.iter().map(|n| {
            vec![
                n.graph.0.clone(),
                n.id.0.clone(),
                n.display_label.clone(),
                n.options.iter().map(ResourceId::as_str).collect::<Vec<_>>().join(";"),
            ]
        }),
    );
    let resources = write_rows(
        &["resource_id", "name", "effectiveness", "amount"],
        instance
            .resources
            .iter()
            .map(|r| vec![r.id.0.clone(), r.name.clone(), r.effectiveness.to_string(), r.amount.to_string()]),
    );
    let interactions = write_rows(
        &["resource_a", "resource_b", "value_or_severity"],
        instance
            .interactions
            .entries
            .iter()
            .map(|e| vec![e.resource_a.0.clone(), e.resource_b.0.clone(), e.value.to_string()]),
    );
    let starts = write_rows(
        &["graph_id", "tau"],
        instance.graphs.iter().map(|g| vec![g.id.0.clone(), g.start_time.to_string()]),
    );
    let settings = (instance.combiner != ThresholdCombiner::default()).then(|| {
        write_rows(
            &["key", "value"],
            [
                vec!["time_window".to_owned(), instance.combiner.time_window.to_string()],
                vec!["amount_floor".to_owned(), instance.combiner.amount_floor.to_string()],
            ],
        )
    });
    CsvBundle {
        edges,
        nodes,
        resources,
        interactions,
        starts,
        settings,
    }
}
