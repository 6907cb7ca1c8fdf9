//! Seeded synthetic instances.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Edge, Instance, NodeSpec, PathwayGraph, ResourceId};
use crate::scoring::{InteractionEntry, InteractionTable, Resource, SeverityMap, ThresholdCombiner};

/// Relative weights of minor, moderate and major interactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityMix {
    pub minor: f64,
    pub moderate: f64,
    pub major: f64,
}

impl Default for SeverityMix {
    fn default() -> Self {
        // conflict counts of the reference five-condition dataset
        Self {
            minor: 178.0,
            moderate: 3033.0,
            major: 270.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub graph_count: usize,
    pub nodes_per_graph: usize,
    /// Probability that a node gets a second parent edge.
    pub branching: f64,
    /// Upper bound on the number of options per node (at least 1 is drawn).
    pub options_per_node: usize,
    pub resource_count: usize,
    /// Fraction of unordered resource pairs that interact.
    pub interaction_density: f64,
    pub severity_mix: SeverityMix,
    pub severities: SeverityMap,
    /// When set, interaction values are drawn uniformly (nonzero) from this
    /// range instead of from the severity mix.
    pub interaction_range: Option<(i64, i64)>,
    pub effectiveness_range: (i64, i64),
    pub amount_range: (u64, u64),
    pub t_min_max: u64,
    /// Upper bound on `t_max - t_min`.
    pub max_window_width: u64,
    /// Start times are drawn from `-start_spread..=0`.
    pub start_spread: i64,
    pub combiner: ThresholdCombiner,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            graph_count: 5,
            nodes_per_graph: 12,
            branching: 0.3,
            options_per_node: 3,
            resource_count: 127,
            interaction_density: 3481.0 / 8001.0,
            severity_mix: SeverityMix::default(),
            severities: SeverityMap::default(),
            interaction_range: None,
            effectiveness_range: (0, 10),
            amount_range: (5, 50),
            t_min_max: 3,
            max_window_width: 3,
            start_spread: 0,
            combiner: ThresholdCombiner::default(),
        }
    }
}

impl GeneratorSpec {
    pub fn check(&self) -> Result<(), String> {
        if self.graph_count == 0 || self.nodes_per_graph == 0 || self.options_per_node == 0 || self.resource_count == 0 {
            return Err("graph_count, nodes_per_graph, options_per_node and resource_count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.interaction_density) || !(0.0..=1.0).contains(&self.branching) {
            return Err("interaction_density and branching must lie in [0, 1]".into());
        }
        let mix = self.severity_mix;
        if mix.minor < 0.0 || mix.moderate < 0.0 || mix.major < 0.0 || mix.minor + mix.moderate + mix.major <= 0.0 {
            return Err("severity_mix weights must be nonnegative with a positive sum".into());
        }
        if self.effectiveness_range.0 > self.effectiveness_range.1 || self.amount_range.0 > self.amount_range.1 {
            return Err("ranges must be ordered".into());
        }
        if let Some((lo, hi)) = self.interaction_range {
            if lo > hi || (lo == 0 && hi == 0) {
                return Err("interaction_range must be ordered and contain a nonzero value".into());
            }
        }
        if self.start_spread < 0 {
            return Err("start_spread must be nonnegative".into());
        }
        Ok(())
    }

    /// Number of interaction entries the generator will emit.
    pub fn interaction_count(&self) -> usize {
        let pairs = self.resource_count * (self.resource_count - 1) / 2;
        ((pairs as f64) * self.interaction_density).round() as usize
    }
}

/// Largest-remainder split of `total` by `weights`.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    let mut missing = total - counts.iter().sum::<usize>();
    for i in order {
        if missing == 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    counts
}

/// Deterministic for a given spec. Panics if [`GeneratorSpec::check`] fails.
pub fn generate_synthetic(spec: &GeneratorSpec) -> Instance {
    if let Err(e) = spec.check() {
        panic!("invalid generator spec: {e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let width = spec.resource_count.to_string().len().max(3);
    let resources: Vec<Resource> = (0..spec.resource_count)
        .map(|i| {
            let id = format!("r{i:0width$}");
            Resource {
                name: format!("resource_{i}"),
                id: id.into(),
                effectiveness: rng.gen_range(spec.effectiveness_range.0..=spec.effectiveness_range.1),
                amount: rng.gen_range(spec.amount_range.0..=spec.amount_range.1),
            }
        })
        .collect();

    let mut graphs = Vec::with_capacity(spec.graph_count);
    let mut nodes = Vec::new();
    for g in 0..spec.graph_count {
        let gid = format!("G{}", g + 1);
        let name = |k: usize| format!("g{}_n{k}", g + 1);
        let mut edges = Vec::new();
        for k in 1..spec.nodes_per_graph {
            let first = rng.gen_range(0..k);
            let mut parents = vec![first];
            if k >= 2 && rng.gen_bool(spec.branching) {
                let second = rng.gen_range(0..k);
                if second != first {
                    parents.push(second);
                }
            }
            for p in parents {
                let t_min = rng.gen_range(0..=spec.t_min_max);
                let t_max = t_min + rng.gen_range(0..=spec.max_window_width);
                edges.push(Edge::new(name(p), name(k), t_min, t_max));
            }
        }
        for k in 0..spec.nodes_per_graph {
            let count = rng.gen_range(1..=spec.options_per_node.min(spec.resource_count));
            let options: Vec<ResourceId> = sample(&mut rng, spec.resource_count, count)
                .into_iter()
                .map(|i| resources[i].id.clone())
                .collect();
            nodes.push(NodeSpec {
                id: name(k).into(),
                graph: gid.clone().into(),
                display_label: format!("step {k} of {gid}"),
                options,
            });
        }
        let start = if spec.start_spread > 0 {
            -rng.gen_range(0..=spec.start_spread)
        } else {
            0
        };
        graphs.push(PathwayGraph::new(gid, edges, start));
    }

    let n = spec.resource_count;
    let total_pairs = n * (n - 1) / 2;
    let count = spec.interaction_count().min(total_pairs);
    let mut picked: Vec<usize> = sample(&mut rng, total_pairs, count).into_vec();
    picked.sort_unstable();
    let pair_of = |mut idx: usize| {
        // row-major over i < j
        let mut i = 0;
        while idx >= n - 1 - i {
            idx -= n - 1 - i;
            i += 1;
        }
        (i, i + 1 + idx)
    };
    let values: Vec<i64> = match spec.interaction_range {
        Some((lo, hi)) => (0..count)
            .map(|_| loop {
                let v = rng.gen_range(lo..=hi);
                if v != 0 {
                    break v;
                }
            })
            .collect(),
        None => {
            let mix = spec.severity_mix;
            let split = apportion(count, &[mix.minor, mix.moderate, mix.major]);
            let mut v: Vec<i64> = Vec::with_capacity(count);
            v.extend(std::iter::repeat_n(spec.severities.minor, split[0]));
            v.extend(std::iter::repeat_n(spec.severities.moderate, split[1]));
            v.extend(std::iter::repeat_n(spec.severities.major, split[2]));
            v.shuffle(&mut rng);
            v
        }
    };
    let entries = picked
        .into_iter()
        .zip(values)
        .map(|(idx, value)| {
            let (i, j) = pair_of(idx);
            InteractionEntry {
                resource_a: resources[i].id.clone(),
                resource_b: resources[j].id.clone(),
                value,
            }
        })
        .collect();

    Instance {
        graphs,
        nodes,
        resources,
        interactions: InteractionTable { entries },
        combiner: spec.combiner,
        pins: Default::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::json::save_json;
    use crate::validate::validate_instance;

    #[test]
    fn deterministic_and_valid() {
        let spec = GeneratorSpec {
            seed: 7,
            ..GeneratorSpec::default()
        };
        let a = generate_synthetic(&spec);
        assert_eq!(save_json(&a), save_json(&generate_synthetic(&spec)));
        assert!(validate_instance(&a).is_ok(), "{}", validate_instance(&a));
    }

    #[test]
    fn reference_scale_counts() {
        let inst = generate_synthetic(&GeneratorSpec::default());
        assert_eq!(inst.resources.len(), 127);
        assert_eq!(inst.interactions.len(), 3481);
        let count = |v: i64| inst.interactions.entries.iter().filter(|e| e.value == v).count();
        assert_eq!((count(-100), count(-1000), count(-5000)), (178, 3033, 270));
    }

    #[test]
    fn single_node_instance() {
        let inst = generate_synthetic(&GeneratorSpec {
            graph_count: 1,
            nodes_per_graph: 1,
            resource_count: 2,
            ..GeneratorSpec::default()
        });
        assert_eq!(inst.nodes.len(), 1);
        assert!(inst.graphs[0].edges.is_empty());
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn apportion_sums_to_total() {
        assert_eq!(apportion(3481, &[178.0, 3033.0, 270.0]), vec![178, 3033, 270]);
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]).iter().sum::<usize>(), 10);
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = GeneratorSpec {
            interaction_density: 1.5,
            ..GeneratorSpec::default()
        };
        assert!(spec.check().is_err());
    }
}
