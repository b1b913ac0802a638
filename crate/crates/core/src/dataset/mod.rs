//! Sweeps, fittest-configuration labelling and labelled datasets for the
//! five prediction cases.

mod case;
mod io;

use std::cmp::Ordering;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfg::{Dfg, DfgError};
use crate::features::{extract_features, FeatureVector};
use crate::library::TaskLibrary;
use crate::sim::{simulate, validate_schedule, SimError};

pub use case::{CaseId, CaseSpec, Objective, FLOORPLAN_FABRIC_AREA, SCHEDULER_FABRIC_AREA};
pub use io::{read_dataset, write_dataset, DatasetManifest, Winner, MANIFEST_VERSION};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Dfg(#[from] DfgError),
    #[error("dfg {dfg}: {source}")]
    Sim {
        dfg: String,
        #[source]
        source: SimError,
    },
    #[error("schedule of dfg {dfg} on candidate {candidate} failed validation: {details}")]
    InvalidSchedule {
        dfg: String,
        candidate: usize,
        details: String,
    },
    #[error("case has no candidate configurations")]
    EmptyCandidates,
    #[error("case needs at least two distinct classes, found {0}")]
    TooFewClasses(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("dataset file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub makespan: u64,
    pub total_energy: u64,
    pub fabric_area_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dfg_id: String,
    pub config_index: usize,
    /// `None` when the graph cannot run on the candidate.
    pub metrics: Option<RunMetrics>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepTable {
    pub candidate_count: usize,
    /// `candidate_count` consecutive rows per graph, in corpus order.
    pub rows: Vec<SweepRow>,
    /// Graphs infeasible under every candidate.
    pub excluded: Vec<String>,
}

impl SweepTable {
    /// Row groups, one per graph.
    pub fn per_dfg(&self) -> impl Iterator<Item = &[SweepRow]> {
        self.rows.chunks(self.candidate_count.max(1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dfg_id,config_index,makespan,total_energy,fabric_area_used\n");
        for r in &self.rows {
            match r.metrics {
                Some(m) => out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.dfg_id, r.config_index, m.makespan, m.total_energy, m.fabric_area_used
                )),
                None => out.push_str(&format!("{},{},infeasible,infeasible,infeasible\n", r.dfg_id, r.config_index)),
            }
        }
        out
    }
}

/// Simulates every graph on every candidate. Each run is checked with
/// [`validate_schedule`] before its metrics are recorded.
pub fn sweep(corpus: &[Dfg], lib: &TaskLibrary, case: &CaseSpec) -> Result<SweepTable, DatasetError> {
    if case.candidates.is_empty() {
        return Err(DatasetError::EmptyCandidates);
    }
    let jobs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|d| (0..case.candidates.len()).map(move |c| (d, c)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(d, c)| {
            let dfg = &corpus[d];
            let cfg = &case.candidates[c];
            let metrics = match simulate(dfg, lib, cfg) {
                Ok(r) => {
                    let report = validate_schedule(&r, dfg, lib, cfg);
                    if !report.is_valid() {
                        return Err(DatasetError::InvalidSchedule {
                            dfg: dfg.id().to_string(),
                            candidate: c,
                            details: format!("{:?}", report.violations),
                        });
                    }
                    Some(RunMetrics {
                        makespan: r.makespan,
                        total_energy: r.total_energy,
                        fabric_area_used: r.prr_area_used,
                    })
                }
                Err(SimError::Infeasible { .. }) => None,
                Err(source) => {
                    return Err(DatasetError::Sim {
                        dfg: dfg.id().to_string(),
                        source,
                    })
                }
            };
            Ok(SweepRow {
                dfg_id: dfg.id().to_string(),
                config_index: c,
                metrics,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let candidate_count = case.candidates.len();
    let excluded = rows
        .chunks(candidate_count)
        .filter(|g| g.iter().all(|r| r.metrics.is_none()))
        .map(|g| g[0].dfg_id.clone())
        .collect();
    Ok(SweepTable {
        candidate_count,
        rows,
        excluded,
    })
}

/// Winner of one graph's sweep rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub dfg_id: String,
    pub candidate: usize,
    pub label: usize,
    pub metrics: RunMetrics,
}

/// Objective values of one graph's feasible candidates, comparable with
/// `cmp_fitness`. Smaller is fitter.
///
/// * `MinPower`: total energy.
/// * `MinTime`: makespan.
/// * `MinTimePower`: min-max normalised makespan plus min-max normalised
///   energy, normalised over this graph's feasible candidates.
/// * `MinTimeArea`: makespan, then PRR area used.
pub fn fitness(rows: &[SweepRow], objective: Objective) -> Vec<Option<(Ratio<i128>, u64)>> {
    let feasible: Vec<RunMetrics> = rows.iter().filter_map(|r| r.metrics).collect();
    let range = |f: fn(&RunMetrics) -> u64| {
        let lo = feasible.iter().map(f).min().unwrap_or(0);
        let hi = feasible.iter().map(f).max().unwrap_or(0);
        (lo as i128, hi as i128)
    };
    let norm = |x: u64, (lo, hi): (i128, i128)| {
        if hi == lo {
            Ratio::from_integer(0)
        } else {
            Ratio::new(x as i128 - lo, hi - lo)
        }
    };
    let t_range = range(|m| m.makespan);
    let e_range = range(|m| m.total_energy);
    rows.iter()
        .map(|r| {
            r.metrics.map(|m| match objective {
                Objective::MinPower => (Ratio::from_integer(m.total_energy as i128), 0),
                Objective::MinTime => (Ratio::from_integer(m.makespan as i128), 0),
                Objective::MinTimePower => (norm(m.makespan, t_range) + norm(m.total_energy, e_range), 0),
                Objective::MinTimeArea => (Ratio::from_integer(m.makespan as i128), m.fabric_area_used),
            })
        })
        .collect()
}

/// Index of the fittest feasible row; ties go to the lowest index.
pub fn argmin_fitness(fit: &[Option<(Ratio<i128>, u64)>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, f) in fit.iter().enumerate() {
        let Some(f) = f else { continue };
        match best {
            Some(b) if fit[b].as_ref().expect("best is feasible").cmp(f) != Ordering::Greater => {}
            _ => best = Some(i),
        }
    }
    best
}

pub fn select_fittest(table: &SweepTable, case: &CaseSpec) -> Result<Vec<Selection>, DatasetError> {
    if case.candidates.is_empty() || table.candidate_count == 0 {
        return Err(DatasetError::EmptyCandidates);
    }
    Ok(table
        .per_dfg()
        .filter_map(|rows| {
            let best = argmin_fitness(&fitness(rows, case.objective))?;
            Some(Selection {
                dfg_id: rows[best].dfg_id.clone(),
                candidate: best,
                label: case.candidate_class[best],
                metrics: rows[best].metrics.expect("fittest row is feasible"),
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub dfg_id: String,
    pub features: FeatureVector,
    pub label: usize,
    pub winning_candidate: usize,
    pub winning_metrics: RunMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub case_id: CaseId,
    pub class_names: Vec<String>,
    pub records: Vec<DatasetRecord>,
    /// Graphs dropped because no candidate could run them.
    pub excluded: Vec<String>,
}

impl Dataset {
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for r in &self.records {
            counts[r.label] += 1;
        }
        counts
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.features.0.clone()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }
}

/// Sweep, fittest selection and feature extraction, joined by graph.
pub fn build_dataset(corpus: &[Dfg], lib: &TaskLibrary, case: &CaseSpec) -> Result<Dataset, DatasetError> {
    if corpus.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let table = sweep(corpus, lib, case)?;
    build_dataset_from_sweep(corpus, lib, case, &table)
}

pub fn build_dataset_from_sweep(
    corpus: &[Dfg],
    lib: &TaskLibrary,
    case: &CaseSpec,
    table: &SweepTable,
) -> Result<Dataset, DatasetError> {
    let selections = select_fittest(table, case)?;
    let by_id: std::collections::HashMap<&str, &Dfg> = corpus.iter().map(|d| (d.id(), d)).collect();
    let records = selections
        .par_iter()
        .map(|s| {
            let dfg = by_id
                .get(s.dfg_id.as_str())
                .ok_or_else(|| DatasetError::Format(format!("sweep names unknown dfg {}", s.dfg_id)))?;
            Ok(DatasetRecord {
                dfg_id: s.dfg_id.clone(),
                features: extract_features(dfg, lib)?,
                label: s.label,
                winning_candidate: s.candidate,
                winning_metrics: s.metrics,
            })
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    Ok(Dataset {
        case_id: case.case_id,
        class_names: case.class_names.clone(),
        records,
        excluded: table.excluded.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceReport {
    /// Majority count over minority count among represented classes;
    /// `None` when fewer than two classes are represented.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    /// Classes without any record.
    pub empty_classes: Vec<usize>,
    pub counts: Vec<usize>,
}

pub fn imbalance_ratio(ds: &Dataset) -> ImbalanceReport {
    let counts = ds.class_counts();
    let present: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    let empty_classes = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i)
        .collect();
    let degenerate = present.len() < 2;
    let ratio = (!degenerate).then(|| {
        *present.iter().max().unwrap() as f64 / *present.iter().min().unwrap() as f64
    });
    ImbalanceReport {
        ratio,
        degenerate,
        empty_classes,
        counts,
    }
}
