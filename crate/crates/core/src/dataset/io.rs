//! Tabular dataset file plus a JSON sidecar manifest carrying everything
//! the table does not: the case, candidates, seed and winning runs.

use serde::{Deserialize, Serialize};

use super::{CaseSpec, Dataset, DatasetError, DatasetRecord, RunMetrics};
use crate::features::{feature_schema, FeatureVector};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Winner {
    pub dfg_id: String,
    pub candidate: usize,
    pub metrics: RunMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub case: CaseSpec,
    pub seed: u64,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub excluded: Vec<String>,
    pub winners: Vec<Winner>,
}

/// Renders `(csv, manifest_json)` for a dataset built from `case`.
pub fn write_dataset(ds: &Dataset, case: &CaseSpec, seed: u64) -> (String, String) {
    let mut csv = String::from("dfg_id");
    for name in feature_schema() {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push_str(",label\n");
    for r in &ds.records {
        csv.push_str(&r.dfg_id);
        for v in r.features.values() {
            csv.push(',');
            csv.push_str(&v.to_string());
        }
        csv.push(',');
        csv.push_str(&ds.class_names[r.label]);
        csv.push('\n');
    }
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        case: case.clone(),
        seed,
        class_names: ds.class_names.clone(),
        feature_names: feature_schema().to_vec(),
        excluded: ds.excluded.clone(),
        winners: ds
            .records
            .iter()
            .map(|r| Winner {
                dfg_id: r.dfg_id.clone(),
                candidate: r.winning_candidate,
                metrics: r.winning_metrics,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    (csv, json)
}

pub fn read_dataset(csv: &str, manifest_json: &str) -> Result<(Dataset, DatasetManifest), DatasetError> {
    let fmt_err = |m: String| DatasetError::Format(m);
    let manifest: DatasetManifest =
        serde_json::from_str(manifest_json).map_err(|e| fmt_err(format!("manifest: {e}")))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(fmt_err(format!("unsupported manifest version {}", manifest.version)));
    }
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| fmt_err("empty dataset file".into()))?.split(',').collect();
    let width = manifest.feature_names.len() + 2;
    if header.len() != width
        || header[0] != "dfg_id"
        || header[width - 1] != "label"
        || header[1..width - 1].iter().zip(&manifest.feature_names).any(|(a, b)| a != b)
    {
        return Err(fmt_err("header does not match the manifest's feature names".into()));
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(fmt_err(format!("row {}: expected {width} cells, got {}", n + 1, cells.len())));
        }
        let features = cells[1..width - 1]
            .iter()
            .map(|c| c.trim().parse::<f64>().map_err(|e| fmt_err(format!("row {}: {e}", n + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let label = manifest
            .class_names
            .iter()
            .position(|c| c == cells[width - 1].trim())
            .ok_or_else(|| fmt_err(format!("row {}: unknown label {}", n + 1, cells[width - 1])))?;
        let dfg_id = cells[0].to_string();
        let winner = manifest
            .winners
            .get(n)
            .filter(|w| w.dfg_id == dfg_id)
            .ok_or_else(|| fmt_err(format!("row {}: no manifest entry for {dfg_id}", n + 1)))?;
        records.push(DatasetRecord {
            dfg_id,
            features: FeatureVector(features),
            label,
            winning_candidate: winner.candidate,
            winning_metrics: winner.metrics,
        });
    }
    if records.len() != manifest.winners.len() {
        return Err(fmt_err("manifest and table disagree on record count".into()));
    }
    let ds = Dataset {
        case_id: manifest.case.case_id,
        class_names: manifest.class_names.clone(),
        records,
        excluded: manifest.excluded.clone(),
    };
    Ok((ds, manifest))
}
