use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{Placement, PlatformConfig, Resource, SchedulerKind, SimError, SimResult};
use crate::dfg::{Dfg, TaskTypeId};
use crate::library::{TaskLibrary, TaskMode, TaskTypeSpec};

#[derive(Debug, Clone)]
struct Prr {
    size: u64,
    config: Option<TaskTypeId>,
    busy: bool,
    free_at: u64,
    /// Time of the most recent assignment; `None` for a never-used region.
    last_used: Option<u64>,
}

/// Outcome of asking the scheduler to place one ready task.
enum Decision {
    Place(Placement, bool),
    Wait,
}

struct Platform {
    prrs: Vec<Prr>,
    gpp_busy: Vec<bool>,
    port_free_at: u64,
    scheduler: SchedulerKind,
}

impl Platform {
    fn fits(&self, i: usize, spec: &TaskTypeSpec) -> bool {
        self.prrs[i].size >= spec.hw_area
    }

    fn any_prr_fits(&self, spec: &TaskTypeSpec) -> bool {
        spec.mode.hw_capable() && (0..self.prrs.len()).any(|i| self.fits(i, spec))
    }

    fn idle_gpp(&self) -> Option<usize> {
        self.gpp_busy.iter().position(|b| !b)
    }

    fn idle_reuse_prr(&self, spec: &TaskTypeSpec) -> Option<usize> {
        (0..self.prrs.len()).find(|&i| {
            let p = &self.prrs[i];
            !p.busy && p.config == Some(spec.type_id) && self.fits(i, spec)
        })
    }

    /// Idle fitting PRR to reconfigure: lowest index under S1, least
    /// recently used (never-used first, then lowest index) otherwise.
    fn reconfig_target(&self, spec: &TaskTypeSpec) -> Option<usize> {
        let idle = (0..self.prrs.len()).filter(|&i| !self.prrs[i].busy && self.fits(i, spec));
        match self.scheduler {
            SchedulerKind::NoReuse => idle.min(),
            _ => idle.min_by_key(|&i| (self.prrs[i].last_used, i)),
        }
    }

    fn place_prr(&mut self, now: u64, i: usize, spec: &TaskTypeSpec, node: u32, reuse: bool) -> Placement {
        let (reconfig_start, exec_start) = if reuse {
            (None, now)
        } else {
            let start = now.max(self.port_free_at);
            self.port_free_at = start + spec.reconfig_time;
            (Some(start), start + spec.reconfig_time)
        };
        let finish = exec_start + spec.hw_exec;
        let p = &mut self.prrs[i];
        p.busy = true;
        p.free_at = finish;
        p.config = Some(spec.type_id);
        p.last_used = Some(now);
        Placement {
            node,
            resource: Resource::Prr(i),
            reconfig_start,
            exec_start,
            finish,
        }
    }

    fn place_gpp(&mut self, now: u64, g: usize, spec: &TaskTypeSpec, node: u32) -> Placement {
        self.gpp_busy[g] = true;
        Placement {
            node,
            resource: Resource::Gpp(g),
            reconfig_start: None,
            exec_start: now,
            finish: now + spec.sw_exec,
        }
    }

    /// Hardware placement shared by all schedulers: reuse first (except
    /// S1), otherwise reconfigure.
    fn decide_hardware(&mut self, now: u64, spec: &TaskTypeSpec, node: u32) -> Decision {
        if self.scheduler != SchedulerKind::NoReuse {
            if let Some(i) = self.idle_reuse_prr(spec) {
                return Decision::Place(self.place_prr(now, i, spec, node, true), true);
            }
        }
        match self.reconfig_target(spec) {
            Some(i) => Decision::Place(self.place_prr(now, i, spec, node, false), false),
            None => Decision::Wait,
        }
    }

    fn decide_software(&mut self, now: u64, spec: &TaskTypeSpec, node: u32) -> Decision {
        match self.idle_gpp() {
            Some(g) => Decision::Place(self.place_gpp(now, g, spec, node), false),
            None => Decision::Wait,
        }
    }

    /// S3 placement of a hybrid task: earliest estimated finish over idle
    /// reuse PRRs, idle PRRs needing reconfiguration, busy PRRs already
    /// holding the configuration (the task then waits for them) and idle
    /// GPPs. Ties go to hardware, in that order.
    fn decide_migrating(&mut self, now: u64, spec: &TaskTypeSpec, node: u32) -> Decision {
        // (estimated finish, preference rank, option)
        let mut best: Option<(u64, u8, Option<Resource>, bool)> = None;
        let mut consider = |finish: u64, rank: u8, res: Option<Resource>, reuse: bool| {
            if best.is_none_or(|(f, r, _, _)| (finish, rank) < (f, r)) {
                best = Some((finish, rank, res, reuse));
            }
        };
        if spec.mode.hw_capable() {
            if let Some(i) = self.idle_reuse_prr(spec) {
                consider(now + spec.hw_exec, 0, Some(Resource::Prr(i)), true);
            }
            if let Some(i) = self.reconfig_target(spec) {
                let start = now.max(self.port_free_at);
                consider(start + spec.reconfig_time + spec.hw_exec, 1, Some(Resource::Prr(i)), false);
            }
            let busy_reuse = (0..self.prrs.len())
                .filter(|&i| {
                    let p = &self.prrs[i];
                    p.busy && p.config == Some(spec.type_id) && self.fits(i, spec)
                })
                .map(|i| self.prrs[i].free_at)
                .min();
            if let Some(free_at) = busy_reuse {
                consider(free_at + spec.hw_exec, 2, None, true);
            }
        }
        if let Some(g) = self.idle_gpp() {
            consider(now + spec.sw_exec, 3, Some(Resource::Gpp(g)), false);
        }
        match best {
            Some((_, _, Some(Resource::Prr(i)), reuse)) => {
                Decision::Place(self.place_prr(now, i, spec, node, reuse), reuse)
            }
            Some((_, _, Some(Resource::Gpp(g)), _)) => Decision::Place(self.place_gpp(now, g, spec, node), false),
            _ => Decision::Wait,
        }
    }

    fn decide(&mut self, now: u64, spec: &TaskTypeSpec, node: u32) -> Decision {
        let hw_possible = self.any_prr_fits(spec);
        match spec.mode {
            TaskMode::Hardware => self.decide_hardware(now, spec, node),
            TaskMode::Software => self.decide_software(now, spec, node),
            TaskMode::Hybrid if !hw_possible => self.decide_software(now, spec, node),
            TaskMode::Hybrid if self.scheduler == SchedulerKind::ReuseMigrate => {
                self.decide_migrating(now, spec, node)
            }
            TaskMode::Hybrid => self.decide_hardware(now, spec, node),
        }
    }
}

/// Runs `dfg` on the platform described by `cfg`.
///
/// Ready tasks are served FIFO by `(ready time, node id)` at every event
/// time; a task that cannot be placed stays queued without blocking the
/// tasks behind it. Energy counts execution at the resource's dynamic
/// power plus reconfiguration at the type's reconfiguration power.
pub fn simulate(dfg: &Dfg, lib: &TaskLibrary, cfg: &PlatformConfig) -> Result<SimResult, SimError> {
    let specs: Vec<&TaskTypeSpec> = dfg
        .nodes()
        .iter()
        .map(|n| {
            lib.get(n.task_type).ok_or(SimError::UnknownTaskType {
                node: n.id,
                task_type: n.task_type,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut platform = Platform {
        prrs: cfg
            .layout
            .prr_sizes
            .iter()
            .map(|&size| Prr {
                size,
                config: None,
                busy: false,
                free_at: 0,
                last_used: None,
            })
            .collect(),
        gpp_busy: vec![false; cfg.gpp_count as usize],
        port_free_at: 0,
        scheduler: cfg.scheduler,
    };

    for (node, spec) in dfg.nodes().iter().zip(&specs) {
        let feasible = platform.any_prr_fits(spec) || (spec.mode.sw_capable() && cfg.gpp_count > 0);
        if !feasible {
            return Err(SimError::Infeasible {
                node: node.id,
                task_type: node.task_type,
            });
        }
    }

    let n = dfg.node_count();
    let mut waiting_parents: Vec<usize> = (0..n).map(|i| dfg.parents(i).len()).collect();
    let mut ready: BTreeSet<(u64, u32, usize)> = (0..n)
        .filter(|&i| waiting_parents[i] == 0)
        .map(|i| (0, dfg.nodes()[i].id, i))
        .collect();
    let mut running: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut resource_of = vec![Resource::Gpp(0); n];

    let mut result = SimResult {
        makespan: 0,
        total_energy: 0,
        schedule: Vec::with_capacity(n),
        reconfigurations: 0,
        reuses: 0,
        migrations_to_sw: 0,
        prr_area_used: 0,
    };
    let mut configured = vec![false; platform.prrs.len()];
    let mut now = 0;

    loop {
        let queued: Vec<(u64, u32, usize)> = ready.iter().copied().collect();
        for key in queued {
            let (_, node_id, i) = key;
            let spec = specs[i];
            let Decision::Place(placement, reused) = platform.decide(now, spec, node_id) else {
                continue;
            };
            ready.remove(&key);
            resource_of[i] = placement.resource;
            running.push(Reverse((placement.finish, i)));
            let exec = placement.finish - placement.exec_start;
            match placement.resource {
                Resource::Prr(p) => {
                    configured[p] = true;
                    result.total_energy += exec * spec.hw_dyn_power;
                    if reused {
                        result.reuses += 1;
                    } else {
                        result.reconfigurations += 1;
                        result.total_energy += spec.reconfig_time * spec.reconfig_power;
                    }
                }
                Resource::Gpp(_) => {
                    result.total_energy += exec * spec.sw_dyn_power;
                    if spec.mode == TaskMode::Hybrid {
                        result.migrations_to_sw += 1;
                    }
                }
            }
            result.makespan = result.makespan.max(placement.finish);
            result.schedule.push(placement);
        }

        let Some(&Reverse((t, _))) = running.peek() else {
            break;
        };
        now = t;
        while let Some(&Reverse((t, i))) = running.peek() {
            if t != now {
                break;
            }
            running.pop();
            match resource_of[i] {
                Resource::Prr(p) => platform.prrs[p].busy = false,
                Resource::Gpp(g) => platform.gpp_busy[g] = false,
            }
            for &c in dfg.children(i) {
                waiting_parents[c] -= 1;
                if waiting_parents[c] == 0 {
                    ready.insert((now, dfg.nodes()[c].id, c));
                }
            }
        }
    }

    // Feasibility was checked up front and something is always running
    // while tasks wait, so the queue drains.
    assert!(ready.is_empty(), "simulation stalled with ready tasks");
    debug_assert_eq!(result.schedule.len(), n);

    result.prr_area_used = configured
        .iter()
        .zip(&platform.prrs)
        .filter(|(c, _)| **c)
        .map(|(_, p)| p.size)
        .sum();
    Ok(result)
}
