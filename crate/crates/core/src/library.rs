//! Task library: per-type execution, area, reconfiguration and power
//! parameters.
//!
//! File format, one row per type (`#` starts a comment):
//!
//! ```text
//! # type_id mode hw_exec sw_exec hw_area reconfig_time reconfig_power hw_dyn_power sw_dyn_power
//! 1 hybrid 40 160 12 30 90 25 8
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfg::TaskTypeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LibraryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate task type {0}")]
    DuplicateType(TaskTypeId),
    #[error("task type {type_id}: {message}")]
    InvalidType { type_id: TaskTypeId, message: String },
    #[error("task library is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    Hardware,
    Software,
    Hybrid,
}

impl TaskMode {
    pub fn hw_capable(self) -> bool {
        matches!(self, TaskMode::Hardware | TaskMode::Hybrid)
    }

    pub fn sw_capable(self) -> bool {
        matches!(self, TaskMode::Software | TaskMode::Hybrid)
    }
}

impl fmt::Display for TaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskMode::Hardware => "hardware",
            TaskMode::Software => "software",
            TaskMode::Hybrid => "hybrid",
        })
    }
}

impl FromStr for TaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hardware" | "hw" => Ok(TaskMode::Hardware),
            "software" | "sw" => Ok(TaskMode::Software),
            "hybrid" => Ok(TaskMode::Hybrid),
            _ => Err(format!("unknown task mode `{s}`")),
        }
    }
}

/// Cycles, area units and mW are all integers so that energies stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskTypeSpec {
    pub type_id: TaskTypeId,
    pub mode: TaskMode,
    pub hw_exec: u64,
    pub sw_exec: u64,
    pub hw_area: u64,
    pub reconfig_time: u64,
    pub reconfig_power: u64,
    pub hw_dyn_power: u64,
    pub sw_dyn_power: u64,
}

impl TaskTypeSpec {
    fn validate(&self) -> Result<(), LibraryError> {
        let bad = |message: &str| {
            Err(LibraryError::InvalidType {
                type_id: self.type_id,
                message: message.to_string(),
            })
        };
        if self.mode.hw_capable() {
            if self.hw_exec == 0 {
                return bad("hardware-capable type needs hw_exec >= 1");
            }
            if self.hw_area == 0 {
                return bad("hardware-capable type needs hw_area >= 1");
            }
        }
        if self.mode.sw_capable() && self.sw_exec == 0 {
            return bad("software-capable type needs sw_exec >= 1");
        }
        Ok(())
    }

    /// Execution cycles used as the node weight in slack analysis: the
    /// hardware time when the type can run in hardware, otherwise the
    /// software time.
    pub fn nominal_exec(&self) -> u64 {
        if self.mode.hw_capable() {
            self.hw_exec
        } else {
            self.sw_exec
        }
    }

    /// Fastest execution over the modes the type supports.
    pub fn min_exec(&self) -> u64 {
        match self.mode {
            TaskMode::Hardware => self.hw_exec,
            TaskMode::Software => self.sw_exec,
            TaskMode::Hybrid => self.hw_exec.min(self.sw_exec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskLibrary {
    types: BTreeMap<TaskTypeId, TaskTypeSpec>,
}

impl TaskLibrary {
    pub fn new(specs: impl IntoIterator<Item = TaskTypeSpec>) -> Result<Self, LibraryError> {
        let mut types = BTreeMap::new();
        for spec in specs {
            spec.validate()?;
            if types.insert(spec.type_id, spec).is_some() {
                return Err(LibraryError::DuplicateType(spec.type_id));
            }
        }
        if types.is_empty() {
            return Err(LibraryError::Empty);
        }
        Ok(TaskLibrary { types })
    }

    pub fn get(&self, id: TaskTypeId) -> Option<&TaskTypeSpec> {
        self.types.get(&id)
    }

    pub fn contains(&self, id: TaskTypeId) -> bool {
        self.types.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TaskTypeSpec> {
        self.types.values()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, LibraryError> {
        let mut specs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let syntax = |message: String| LibraryError::Syntax {
                line: lineno + 1,
                message,
            };
            if fields.len() != 9 {
                return Err(syntax(format!("expected 9 columns, found {}", fields.len())));
            }
            let num = |i: usize| {
                fields[i]
                    .parse::<u64>()
                    .map_err(|_| syntax(format!("column {}: expected an integer, found `{}`", i + 1, fields[i])))
            };
            let type_id = u32::try_from(num(0)?).map_err(|_| syntax("type id out of range".into()))?;
            specs.push(TaskTypeSpec {
                type_id,
                mode: fields[1].parse().map_err(syntax)?,
                hw_exec: num(2)?,
                sw_exec: num(3)?,
                hw_area: num(4)?,
                reconfig_time: num(5)?,
                reconfig_power: num(6)?,
                hw_dyn_power: num(7)?,
                sw_dyn_power: num(8)?,
            });
        }
        TaskLibrary::new(specs)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::from(
            "# type_id mode hw_exec sw_exec hw_area reconfig_time reconfig_power hw_dyn_power sw_dyn_power\n",
        );
        for t in self.iter() {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {}",
                t.type_id,
                t.mode,
                t.hw_exec,
                t.sw_exec,
                t.hw_area,
                t.reconfig_time,
                t.reconfig_power,
                t.hw_dyn_power,
                t.sw_dyn_power
            );
        }
        out
    }

    /// The built-in 16-type library used when no library file is given.
    pub fn reference() -> Self {
        TaskLibrary::parse(REFERENCE_LIBRARY).expect("reference library is valid")
    }
}

/// Mix of hardware-only and hybrid types. Reconfiguration time is three
/// cycles per area unit. Two hybrid types (areas 34 and 42) outgrow the
/// regions of a four-way split of a 100-unit fabric, so region count and
/// region size trade off; everything fits the 50-unit regions of a four-way
/// split of 200 units. Software energy ranges from 0.6x to 1.5x the energy
/// of reconfiguring and running in hardware, so migration pays off for some
/// types and not for others.
pub const REFERENCE_LIBRARY: &str = "\
# type_id mode hw_exec sw_exec hw_area reconfig_time reconfig_power hw_dyn_power sw_dyn_power
1 hybrid 20 60 6 18 60 30 20
2 hybrid 35 150 10 30 55 28 23
3 hardware 50 0 14 42 65 35 0
4 hybrid 15 40 5 15 50 20 24
5 hardware 80 0 22 66 75 45 0
6 hybrid 45 220 16 48 60 33 30
7 hybrid 25 90 8 24 52 22 16
8 hardware 60 0 18 54 70 40 0
9 hybrid 30 75 9 27 58 26 38
10 hybrid 70 400 42 126 72 42 30
11 hardware 40 0 12 36 60 30 0
12 hybrid 10 30 4 12 48 18 35
13 hybrid 55 180 20 60 68 38 21
14 hardware 35 0 11 33 55 27 0
15 hybrid 65 260 34 102 70 41 41
16 hybrid 28 100 7 21 50 24 22
";
