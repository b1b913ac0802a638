//! Discrete-event simulation of a DFG on a partially reconfigurable
//! platform made of PRRs (one hardware task at a time each) and GPPs
//! (one software task at a time each), sharing a single reconfiguration
//! port.

mod engine;
mod files;
mod layouts;
mod validate;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfg::{NodeId, TaskTypeId};

pub use engine::simulate;
pub use files::{export_trace, parse_layout_file, parse_sim_settings, SimSettings};
pub use layouts::enumerate_layouts;
pub use validate::{validate_schedule, ValidationReport, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("node {node} (type {task_type}) fits no resource of the platform")]
    Infeasible { node: NodeId, task_type: TaskTypeId },
    #[error("node {node} has unknown task type {task_type}")]
    UnknownTaskType { node: NodeId, task_type: TaskTypeId },
    #[error("invalid platform: {0}")]
    InvalidPlatform(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeTag {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "skewed")]
    Skewed,
}

impl fmt::Display for ShapeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeTag::Uniform => "uniform",
            ShapeTag::Skewed => "skewed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    pub fabric_area: u64,
    pub prr_sizes: Vec<u64>,
    pub shape: ShapeTag,
}

impl Layout {
    pub fn new(fabric_area: u64, prr_sizes: Vec<u64>) -> Result<Self, SimError> {
        if prr_sizes.contains(&0) {
            return Err(SimError::InvalidPlatform("PRR sizes must be at least 1".into()));
        }
        if prr_sizes.iter().sum::<u64>() > fabric_area {
            return Err(SimError::InvalidPlatform(format!(
                "PRR sizes sum to more than the fabric area {fabric_area}"
            )));
        }
        let shape = if prr_sizes.windows(2).all(|w| w[0] == w[1]) {
            ShapeTag::Uniform
        } else {
            ShapeTag::Skewed
        };
        Ok(Layout {
            fabric_area,
            prr_sizes,
            shape,
        })
    }

    pub fn prr_count(&self) -> usize {
        self.prr_sizes.len()
    }

    /// Short name such as `prr4-uniform`.
    pub fn name(&self) -> String {
        format!("prr{}-{}", self.prr_count(), self.shape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchedulerKind {
    /// Always reconfigures; GPPs only run software-only tasks.
    #[serde(rename = "S1")]
    NoReuse,
    /// Reuses an idle PRR that already holds the task's configuration,
    /// otherwise reconfigures the least recently used idle PRR.
    #[serde(rename = "S2")]
    Reuse,
    /// Reuse plus hardware/software migration of hybrid tasks by earliest
    /// estimated finish time.
    #[serde(rename = "S3")]
    ReuseMigrate,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 3] = [SchedulerKind::NoReuse, SchedulerKind::Reuse, SchedulerKind::ReuseMigrate];

    pub fn short_name(self) -> &'static str {
        match self {
            SchedulerKind::NoReuse => "S1",
            SchedulerKind::Reuse => "S2",
            SchedulerKind::ReuseMigrate => "S3",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" | "S1-NOREUSE" | "NOREUSE" => Ok(SchedulerKind::NoReuse),
            "S2" | "S2-REUSE" | "REUSE" => Ok(SchedulerKind::Reuse),
            "S3" | "S3-REUSEMIGRATE" | "REUSEMIGRATE" => Ok(SchedulerKind::ReuseMigrate),
            _ => Err(format!("unknown scheduler `{s}` (expected S1, S2 or S3)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlatformConfig {
    pub layout: Layout,
    pub gpp_count: u32,
    pub scheduler: SchedulerKind,
}

impl PlatformConfig {
    pub fn new(layout: Layout, gpp_count: u32, scheduler: SchedulerKind) -> Result<Self, SimError> {
        if gpp_count == 0 && layout.prr_sizes.is_empty() {
            return Err(SimError::InvalidPlatform("platform has no PRR and no GPP".into()));
        }
        Ok(PlatformConfig {
            layout,
            gpp_count,
            scheduler,
        })
    }

    pub fn name(&self) -> String {
        format!("{}-gpp{}-{}", self.layout.name(), self.gpp_count, self.scheduler)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    Prr(usize),
    Gpp(usize),
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Prr(i) => write!(f, "prr{i}"),
            Resource::Gpp(i) => write!(f, "gpp{i}"),
        }
    }
}

/// One scheduled task. The reconfiguration interval, when present, is
/// `[reconfig_start, exec_start)`; execution is `[exec_start, finish)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub node: NodeId,
    pub resource: Resource,
    pub reconfig_start: Option<u64>,
    pub exec_start: u64,
    pub finish: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    pub makespan: u64,
    /// mW x cycles.
    pub total_energy: u64,
    /// Placements in the order the scheduler made them.
    pub schedule: Vec<Placement>,
    pub reconfigurations: u64,
    pub reuses: u64,
    pub migrations_to_sw: u64,
    /// Total size of the PRRs configured at least once.
    pub prr_area_used: u64,
}

impl SimResult {
    /// `total_energy / makespan` in mW, exact.
    pub fn avg_power(&self) -> Ratio<u64> {
        if self.makespan == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(self.total_energy, self.makespan)
        }
    }
}
