//! Instance formats: canonical JSON, the five-file CSV bundle, Graphviz export
//! and the synthetic generator.

pub mod csv;
pub mod dot;
pub mod generate;
pub mod json;

pub use self::csv::{load_csv, load_csv_with, parse_bundle, save_csv, CsvBundle};
pub use dot::export_dot;
pub use generate::{generate_synthetic, GeneratorSpec, SeverityMix};
pub use json::{load_json, load_solution_json, save_json, save_solution_json, to_canonical_json};
