use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::IoError;
use crate::model::{Instance, Solution};

/// Pretty JSON with object keys sorted.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json's Map is ordered by key unless `preserve_order` is enabled.
    let v = serde_json::to_value(value).expect("model types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

fn from_json<T: DeserializeOwned>(what: &str, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::parse(what, e.line(), e.to_string()))
}

pub fn save_json(instance: &Instance) -> String {
    to_canonical_json(instance)
}

/// Parses an instance document. Unknown keys are ignored; the result is not
/// validated.
pub fn load_json(text: &str) -> Result<Instance, IoError> {
    from_json("instance.json", text)
}

pub fn save_solution_json(solution: &Solution) -> String {
    to_canonical_json(solution)
}

pub fn load_solution_json(text: &str) -> Result<Solution, IoError> {
    from_json("solution.json", text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trips_fixtures() {
        for inst in [fixtures::tiny(), fixtures::tiny_plus(), fixtures::fig1()] {
            assert_eq!(load_json(&save_json(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn keys_are_sorted() {
        let text = save_json(&fixtures::tiny());
        let graphs = text.find("\"graphs\"").unwrap();
        let combiner = text.find("\"combiner\"").unwrap();
        let resources = text.find("\"resources\"").unwrap();
        assert!(combiner < graphs && graphs < resources);
    }

    #[test]
    fn missing_graphs_is_a_parse_error() {
        let err = load_json(r#"{"nodes": [], "resources": []}"#).unwrap_err();
        assert!(matches!(err, IoError::Parse { .. }), "{err}");
    }

    #[test]
    fn unknown_keys_are_ignored() {
        let mut v: serde_json::Value = serde_json::from_str(&save_json(&fixtures::tiny())).unwrap();
        v["future_field"] = serde_json::json!({"x": 1});
        assert_eq!(load_json(&v.to_string()).unwrap(), fixtures::tiny());
    }
}
