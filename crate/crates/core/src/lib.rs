//! Floorplan prediction for dynamically reconfigurable FPGA platforms.
//!
//! The crate covers the whole offline flow: random task graphs are
//! generated ([`gen`]), simulated on candidate platform configurations
//! ([`sim`]), labelled with their fittest configuration ([`dataset`]),
//! turned into fixed-length feature vectors ([`features`]) and used to
//! train and compare classifiers ([`ml`]).

pub mod dataset;
pub mod dfg;
pub mod features;
pub mod gen;
pub mod library;
pub mod ml;
pub mod sim;

pub use dataset::{CaseId, CaseSpec, Dataset, Objective, SweepTable};
pub use dfg::{Dfg, DfgError, GraphMetrics, Node, SlackTable};
pub use features::FeatureVector;
pub use gen::GenParams;
pub use library::{TaskLibrary, TaskMode, TaskTypeSpec};
pub use ml::{ClassifierKind, ClassifierSpec, TrainedModel};
pub use sim::{Layout, PlatformConfig, SchedulerKind, SimResult};
