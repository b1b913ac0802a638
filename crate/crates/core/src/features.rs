//! Fixed-length numeric description of a (DFG, task library) pair.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dfg::{asap_alap_slack, graph_metrics, Dfg, DfgError};
use crate::library::{TaskLibrary, TaskTypeSpec};

/// Slots in the task-type frequency histogram.
pub const TYPE_FREQ_SLOTS: usize = 16;

const SCALAR_HEAD: [&str; 15] = [
    "nodes",
    "root_nodes",
    "internal_nodes",
    "leaf_nodes",
    "isolated_nodes",
    "edges",
    "edges_per_node",
    "max_parents",
    "max_children",
    "sharable_resources",
    "subgraphs",
    "critical_path_avg",
    "critical_path_min",
    "critical_path_longest",
    "task_type_count",
];

const SCALAR_MID: [&str; 4] = ["hw_task_types", "sw_task_types", "migratable_tasks", "avg_slack"];

const AGGREGATES: [&str; 7] = [
    "hw_latency",
    "sw_latency",
    "hw_exec_power",
    "sw_exec_power",
    "hw_config_time",
    "hw_config_power",
    "hw_area",
];

/// Ordered feature names. Stable for a build.
pub fn feature_schema() -> &'static [String] {
    static SCHEMA: OnceLock<Vec<String>> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let mut names: Vec<String> = SCALAR_HEAD.iter().map(|s| s.to_string()).collect();
        names.extend((1..=TYPE_FREQ_SLOTS).map(|k| format!("task_type_freq_{k}")));
        names.extend(SCALAR_MID.iter().map(|s| s.to_string()));
        for agg in AGGREGATES {
            for stat in ["avg", "min", "max"] {
                names.push(format!("{agg}_{stat}"));
            }
        }
        names
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_schema().iter().position(|n| n == name).map(|i| self.0[i])
    }
}

/// Computes the feature vector. Structural entries come from
/// [`graph_metrics`] and [`asap_alap_slack`]; per-type aggregates run over
/// the distinct task types present in the graph and default to zero when
/// no type qualifies.
///
/// * `sharable_resources`: nodes whose task type occurs at least twice.
/// * `task_type_freq_k`: node count of the k-th most frequent type.
/// * `hw_task_types` / `sw_task_types` / `migratable_tasks`: nodes whose
///   type is hardware-only / software-only / hybrid.
/// * `*_exec_power`: execution cycles x dynamic power of the type.
pub fn extract_features(dfg: &Dfg, lib: &TaskLibrary) -> Result<FeatureVector, DfgError> {
    let metrics = graph_metrics(dfg);
    let slack = asap_alap_slack(dfg, lib)?;

    let mut type_counts: BTreeMap<u32, usize> = BTreeMap::new();
    for n in dfg.nodes() {
        *type_counts.entry(n.task_type).or_default() += 1;
    }
    let specs: Vec<&TaskTypeSpec> = type_counts
        .keys()
        .map(|t| lib.get(*t).expect("types resolved by slack analysis"))
        .collect();

    let mut v = Vec::with_capacity(feature_schema().len());
    let paths = &metrics.per_subgraph_critical_paths;
    let cp_avg = if paths.is_empty() {
        0.0
    } else {
        paths.iter().sum::<usize>() as f64 / paths.len() as f64
    };
    v.extend([
        metrics.node_count as f64,
        metrics.root_count as f64,
        metrics.internal_count as f64,
        metrics.leaf_count as f64,
        metrics.isolated_count as f64,
        metrics.edge_count as f64,
        metrics.edges_per_node,
        metrics.max_parents as f64,
        metrics.max_children as f64,
        type_counts.values().filter(|&&c| c >= 2).sum::<usize>() as f64,
        metrics.subgraph_count as f64,
        cp_avg,
        paths.iter().copied().min().unwrap_or(0) as f64,
        metrics.critical_path_len_nodes as f64,
        type_counts.len() as f64,
    ]);

    let mut freqs: Vec<usize> = type_counts.values().copied().collect();
    freqs.sort_unstable_by(|a, b| b.cmp(a));
    freqs.resize(TYPE_FREQ_SLOTS.max(freqs.len()), 0);
    v.extend(freqs[..TYPE_FREQ_SLOTS].iter().map(|&c| c as f64));

    let nodes_with = |pred: fn(&TaskTypeSpec) -> bool| -> f64 {
        type_counts
            .iter()
            .zip(&specs)
            .filter(|(_, s)| pred(s))
            .map(|((_, &c), _)| c)
            .sum::<usize>() as f64
    };
    v.extend([
        nodes_with(|s| s.mode == crate::library::TaskMode::Hardware),
        nodes_with(|s| s.mode == crate::library::TaskMode::Software),
        nodes_with(|s| s.mode == crate::library::TaskMode::Hybrid),
        slack.avg_slack,
    ]);

    let hw: Vec<&&TaskTypeSpec> = specs.iter().filter(|s| s.mode.hw_capable()).collect();
    let sw: Vec<&&TaskTypeSpec> = specs.iter().filter(|s| s.mode.sw_capable()).collect();
    let stats = |vals: Vec<u64>, out: &mut Vec<f64>| {
        if vals.is_empty() {
            out.extend([0.0; 3]);
        } else {
            let sum: u64 = vals.iter().sum();
            out.push(sum as f64 / vals.len() as f64);
            out.push(*vals.iter().min().unwrap() as f64);
            out.push(*vals.iter().max().unwrap() as f64);
        }
    };
    stats(hw.iter().map(|s| s.hw_exec).collect(), &mut v);
    stats(sw.iter().map(|s| s.sw_exec).collect(), &mut v);
    stats(hw.iter().map(|s| s.hw_exec * s.hw_dyn_power).collect(), &mut v);
    stats(sw.iter().map(|s| s.sw_exec * s.sw_dyn_power).collect(), &mut v);
    stats(hw.iter().map(|s| s.reconfig_time).collect(), &mut v);
    stats(hw.iter().map(|s| s.reconfig_power).collect(), &mut v);
    stats(hw.iter().map(|s| s.hw_area).collect(), &mut v);

    debug_assert_eq!(v.len(), feature_schema().len());
    Ok(FeatureVector(v))
}

/// Comma-separated matrix: `dfg_id` then the schema, one row per graph.
pub fn feature_matrix_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a FeatureVector)>) -> String {
    let mut out = String::from("dfg_id");
    for name in feature_schema() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (id, fv) in rows {
        out.push_str(id);
        for x in fv.values() {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}
