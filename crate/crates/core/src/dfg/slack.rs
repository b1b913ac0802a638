use serde::{Deserialize, Serialize};

use super::{Dfg, DfgError};
use crate::library::TaskLibrary;

/// Cycle-weighted ASAP/ALAP start times. Node weight is
/// [`TaskTypeSpec::nominal_exec`](crate::library::TaskTypeSpec::nominal_exec).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackTable {
    pub asap_start: Vec<u64>,
    pub alap_start: Vec<u64>,
    pub slack: Vec<u64>,
    pub avg_slack: f64,
    /// Cycle-weighted critical path length (ASAP makespan).
    pub makespan: u64,
}

pub fn asap_alap_slack(dfg: &Dfg, lib: &TaskLibrary) -> Result<SlackTable, DfgError> {
    let weights = node_weights(dfg, lib, |t| t.nominal_exec())?;
    Ok(slack_with_weights(dfg, &weights))
}

pub(crate) fn node_weights(
    dfg: &Dfg,
    lib: &TaskLibrary,
    weight: impl Fn(&crate::library::TaskTypeSpec) -> u64,
) -> Result<Vec<u64>, DfgError> {
    dfg.nodes()
        .iter()
        .map(|n| {
            lib.get(n.task_type).map(&weight).ok_or(DfgError::UnknownTaskType {
                node: n.id,
                task_type: n.task_type,
            })
        })
        .collect()
}

pub(crate) fn slack_with_weights(dfg: &Dfg, weights: &[u64]) -> SlackTable {
    let n = dfg.node_count();
    let mut asap = vec![0u64; n];
    for &i in dfg.topo_order() {
        asap[i] = dfg
            .parents(i)
            .iter()
            .map(|&p| asap[p] + weights[p])
            .max()
            .unwrap_or(0);
    }
    let makespan = (0..n).map(|i| asap[i] + weights[i]).max().unwrap_or(0);

    let mut alap = vec![0u64; n];
    for &i in dfg.topo_order().iter().rev() {
        let latest_finish = dfg
            .children(i)
            .iter()
            .map(|&c| alap[c])
            .min()
            .unwrap_or(makespan);
        alap[i] = latest_finish - weights[i];
    }

    let slack: Vec<u64> = (0..n).map(|i| alap[i] - asap[i]).collect();
    let avg_slack = if n == 0 {
        0.0
    } else {
        slack.iter().sum::<u64>() as f64 / n as f64
    };
    SlackTable {
        asap_start: asap,
        alap_start: alap,
        slack,
        avg_slack,
        makespan,
    }
}
