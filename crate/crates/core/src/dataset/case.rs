use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::sim::{enumerate_layouts, Layout, PlatformConfig, SchedulerKind};

pub const SCHEDULER_FABRIC_AREA: u64 = 200;
pub const FLOORPLAN_FABRIC_AREA: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    I,
    II,
    III,
    IV,
    V,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::I => "I",
            CaseId::II => "II",
            CaseId::III => "III",
            CaseId::IV => "IV",
            CaseId::V => "V",
        }
    }

    pub fn default_objective(self) -> Objective {
        match self {
            CaseId::I | CaseId::II => Objective::MinPower,
            CaseId::III => Objective::MinTime,
            CaseId::IV => Objective::MinTimePower,
            CaseId::V => Objective::MinTimeArea,
        }
    }

    /// Scheduler cases fix a floorplan roomy enough for every reference
    /// task type, so the scheduler is the only variable. Floorplan cases use
    /// a fabric on which region count and region size trade off.
    pub fn default_fabric_area(self) -> u64 {
        match self {
            CaseId::I | CaseId::II => SCHEDULER_FABRIC_AREA,
            _ => FLOORPLAN_FABRIC_AREA,
        }
    }

    /// Label of `cfg` under this case: the scheduler for I/II, the
    /// GPP/PRR-count combination for III/IV and the layout for V.
    pub fn class_of(self, cfg: &PlatformConfig) -> String {
        match self {
            CaseId::I | CaseId::II => cfg.scheduler.short_name().to_string(),
            CaseId::III | CaseId::IV => format!("gpp{}-prr{}", cfg.gpp_count, cfg.layout.prr_count()),
            CaseId::V => cfg.layout.name(),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("CASE").unwrap_or(&t).trim_start_matches(['-', '_', ' ']);
        match t {
            "I" | "1" => Ok(CaseId::I),
            "II" | "2" => Ok(CaseId::II),
            "III" | "3" => Ok(CaseId::III),
            "IV" | "4" => Ok(CaseId::IV),
            "V" | "5" => Ok(CaseId::V),
            _ => Err(format!("unknown case `{s}` (expected I..V)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinPower,
    MinTime,
    MinTimePower,
    MinTimeArea,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MinPower => "min_power",
            Objective::MinTime => "min_time",
            Objective::MinTimePower => "min_time_power",
            Objective::MinTimeArea => "min_time_area",
        })
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "min_power" => Ok(Objective::MinPower),
            "min_time" => Ok(Objective::MinTime),
            "min_time_power" => Ok(Objective::MinTimePower),
            "min_time_area" => Ok(Objective::MinTimeArea),
            _ => Err(format!("unknown objective `{s}`")),
        }
    }
}

/// Candidate platforms of one prediction case. Candidate order is fixed and
/// decides fitness ties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case_id: CaseId,
    pub objective: Objective,
    pub candidates: Vec<PlatformConfig>,
    /// Distinct labels in order of first appearance among the candidates.
    pub class_names: Vec<String>,
    /// Class index of each candidate.
    pub candidate_class: Vec<usize>,
}

impl CaseSpec {
    pub fn new(
        case_id: CaseId,
        objective: Objective,
        candidates: Vec<PlatformConfig>,
        class_of: impl Fn(&PlatformConfig) -> String,
    ) -> Result<Self, DatasetError> {
        if candidates.is_empty() {
            return Err(DatasetError::EmptyCandidates);
        }
        let mut class_names: Vec<String> = Vec::new();
        let mut candidate_class = Vec::with_capacity(candidates.len());
        for c in &candidates {
            let name = class_of(c);
            let idx = match class_names.iter().position(|n| *n == name) {
                Some(i) => i,
                None => {
                    class_names.push(name);
                    class_names.len() - 1
                }
            };
            candidate_class.push(idx);
        }
        if class_names.len() < 2 {
            return Err(DatasetError::TooFewClasses(class_names.len()));
        }
        Ok(CaseSpec {
            case_id,
            objective,
            candidates,
            class_names,
            candidate_class,
        })
    }

    /// Candidate set with the case's own objective and class projection.
    pub fn with_candidates(case_id: CaseId, candidates: Vec<PlatformConfig>) -> Result<Self, DatasetError> {
        Self::new(case_id, case_id.default_objective(), candidates, |c| case_id.class_of(c))
    }

    /// Built-in candidate set on the case's default fabric.
    pub fn default_for(case_id: CaseId) -> Result<Self, DatasetError> {
        Self::default_with_fabric(case_id, case_id.default_fabric_area())
    }

    /// Built-in candidate set over a fabric of `fabric_area` units.
    pub fn default_with_fabric(case_id: CaseId, fabric_area: u64) -> Result<Self, DatasetError> {
        let sim = |e| DatasetError::Format(format!("default layouts: {e}"));
        let layouts = enumerate_layouts(fabric_area, &[2, 4]).map_err(sim)?;
        let find = |n: usize, skewed: bool| -> Layout {
            layouts
                .iter()
                .find(|l| l.prr_count() == n && (l.shape == crate::sim::ShapeTag::Skewed) == skewed)
                .cloned()
                .expect("fabric large enough for default layouts")
        };
        let cfg = |layout: Layout, gpp, s| PlatformConfig::new(layout, gpp, s).map_err(sim);
        use SchedulerKind::{Reuse, ReuseMigrate};
        let candidates = match case_id {
            CaseId::I => vec![cfg(find(4, false), 1, Reuse)?, cfg(find(4, false), 1, ReuseMigrate)?],
            CaseId::II => vec![cfg(find(4, false), 0, Reuse)?, cfg(find(4, false), 0, ReuseMigrate)?],
            CaseId::III | CaseId::IV => vec![
                cfg(find(2, false), 0, ReuseMigrate)?,
                cfg(find(4, false), 0, ReuseMigrate)?,
                cfg(find(2, false), 1, ReuseMigrate)?,
                cfg(find(4, false), 1, ReuseMigrate)?,
            ],
            CaseId::V => vec![
                cfg(find(2, false), 1, ReuseMigrate)?,
                cfg(find(4, false), 1, ReuseMigrate)?,
                cfg(find(4, true), 1, ReuseMigrate)?,
            ],
        };
        Self::with_candidates(case_id, candidates)
    }
}
