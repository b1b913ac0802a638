use std::collections::HashMap;

use super::{PlatformConfig, Resource, SimResult};
use crate::dfg::{Dfg, NodeId};
use crate::library::TaskLibrary;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A node is missing from, or repeated in, the schedule.
    Coverage { node: NodeId, occurrences: usize },
    /// A placement names a node the DFG does not have.
    UnknownNode(NodeId),
    Precedence { parent: NodeId, child: NodeId },
    /// Two occupancy intervals overlap on the same resource.
    ResourceOverlap { resource: Resource, first: NodeId, second: NodeId },
    /// Two reconfigurations overlap on the single port.
    PortOverlap { first: NodeId, second: NodeId },
    Area { node: NodeId, prr: usize },
    /// The resource cannot run the task's mode, or does not exist.
    WrongResource { node: NodeId, resource: Resource },
    /// Execution or reconfiguration length differs from the task library.
    Duration { node: NodeId },
    Makespan { reported: u64, actual: u64 },
    Energy { reported: u64, actual: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks a schedule trace against the DFG, task library and platform
/// without trusting anything the simulator computed, including energy,
/// which is re-accumulated from the trace.
pub fn validate_schedule(
    result: &SimResult,
    dfg: &Dfg,
    lib: &TaskLibrary,
    cfg: &PlatformConfig,
) -> ValidationReport {
    let mut v = Vec::new();
    let index: HashMap<NodeId, usize> = dfg.nodes().iter().enumerate().map(|(i, n)| (n.id, i)).collect();

    let mut by_node: Vec<Vec<usize>> = vec![Vec::new(); dfg.node_count()];
    for (k, p) in result.schedule.iter().enumerate() {
        match index.get(&p.node) {
            Some(&i) => by_node[i].push(k),
            None => v.push(Violation::UnknownNode(p.node)),
        }
    }
    for (i, ks) in by_node.iter().enumerate() {
        if ks.len() != 1 {
            v.push(Violation::Coverage {
                node: dfg.nodes()[i].id,
                occurrences: ks.len(),
            });
        }
    }

    // (a) precedence
    for &(parent, child) in dfg.edges() {
        let (pi, ci) = (index[&parent], index[&child]);
        for &pk in &by_node[pi] {
            for &ck in &by_node[ci] {
                if result.schedule[ck].exec_start < result.schedule[pk].finish {
                    v.push(Violation::Precedence { parent, child });
                }
            }
        }
    }

    // (d) area, mode and duration; energy re-accumulation
    let mut energy = 0u64;
    for p in &result.schedule {
        let Some(&i) = index.get(&p.node) else { continue };
        let Some(spec) = lib.get(dfg.nodes()[i].task_type) else { continue };
        let exec = p.finish.saturating_sub(p.exec_start);
        let reconfig = p.reconfig_start.map(|s| p.exec_start.saturating_sub(s));
        match p.resource {
            Resource::Prr(r) => {
                match cfg.layout.prr_sizes.get(r) {
                    None => v.push(Violation::WrongResource { node: p.node, resource: p.resource }),
                    Some(&size) if size < spec.hw_area => v.push(Violation::Area { node: p.node, prr: r }),
                    _ => {}
                }
                if !spec.mode.hw_capable() {
                    v.push(Violation::WrongResource { node: p.node, resource: p.resource });
                }
                if exec != spec.hw_exec || reconfig.is_some_and(|r| r != spec.reconfig_time) {
                    v.push(Violation::Duration { node: p.node });
                }
                energy += exec * spec.hw_dyn_power + reconfig.unwrap_or(0) * spec.reconfig_power;
            }
            Resource::Gpp(g) => {
                if g >= cfg.gpp_count as usize || !spec.mode.sw_capable() || reconfig.is_some() {
                    v.push(Violation::WrongResource { node: p.node, resource: p.resource });
                }
                if exec != spec.sw_exec {
                    v.push(Violation::Duration { node: p.node });
                }
                energy += exec * spec.sw_dyn_power;
            }
        }
    }
    if energy != result.total_energy {
        v.push(Violation::Energy {
            reported: result.total_energy,
            actual: energy,
        });
    }

    // (b) resource exclusivity, reconfiguration included
    let mut occupancy: HashMap<Resource, Vec<(u64, u64, NodeId)>> = HashMap::new();
    let mut port = Vec::new();
    for p in &result.schedule {
        let start = p.reconfig_start.unwrap_or(p.exec_start);
        occupancy.entry(p.resource).or_default().push((start, p.finish, p.node));
        if let Some(s) = p.reconfig_start {
            port.push((s, p.exec_start, p.node));
        }
    }
    let mut resources: Vec<_> = occupancy.into_iter().collect();
    resources.sort_by_key(|(r, _)| *r);
    for (resource, mut intervals) in resources {
        for (first, second) in overlaps(&mut intervals) {
            v.push(Violation::ResourceOverlap { resource, first, second });
        }
    }
    // (c) single reconfiguration port
    for (first, second) in overlaps(&mut port) {
        v.push(Violation::PortOverlap { first, second });
    }

    // (e) makespan
    let actual = result.schedule.iter().map(|p| p.finish).max().unwrap_or(0);
    if actual != result.makespan {
        v.push(Violation::Makespan {
            reported: result.makespan,
            actual,
        });
    }

    ValidationReport { violations: v }
}

/// Adjacent overlapping pairs of half-open intervals; empty intervals
/// never overlap anything.
fn overlaps(intervals: &mut [(u64, u64, NodeId)]) -> Vec<(NodeId, NodeId)> {
    intervals.sort_unstable();
    let mut out = Vec::new();
    let mut reach: Option<(u64, NodeId)> = None;
    for &(s, e, node) in intervals.iter() {
        if s == e {
            continue;
        }
        if let Some((end, prev)) = reach {
            if s < end {
                out.push((prev, node));
            }
        }
        if reach.is_none_or(|(end, _)| e > end) {
            reach = Some((e, node));
        }
    }
    out
}
