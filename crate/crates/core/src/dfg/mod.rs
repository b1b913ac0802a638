//! Data-flow graphs: model, text format and structural analytics.

mod metrics;
mod parse;
mod slack;

use std::collections::HashMap;

use thiserror::Error;

pub use metrics::{graph_metrics, GraphMetrics};
pub use parse::{parse_dfg, serialize_dfg};
pub use slack::{asap_alap_slack, SlackTable};

pub type NodeId = u32;
pub type TaskTypeId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfgError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("edge {parent}->{child} names unknown node {missing}")]
    UnknownNode {
        parent: NodeId,
        child: NodeId,
        missing: NodeId,
    },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}->{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("cycle detected through edge {0}->{1}")]
    Cycle(NodeId, NodeId),
    #[error("unknown task type {task_type} on node {node}")]
    UnknownTaskType { node: NodeId, task_type: TaskTypeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: NodeId,
    pub task_type: TaskTypeId,
}

/// A validated, acyclic task graph.
///
/// Nodes and edges keep the order they were declared in, so a
/// serialize/parse round trip is structurally exact. Adjacency and a
/// topological order are derived once at construction; everything is
/// addressed internally by node *index* (position in `nodes`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfg {
    id: String,
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dfg {
    pub fn new(
        id: impl Into<String>,
        nodes: Vec<Node>,
        edges: Vec<(NodeId, NodeId)>,
    ) -> Result<Self, DfgError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(DfgError::DuplicateNode(n.id));
            }
        }

        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(p, c) in &edges {
            let pi = *index.get(&p).ok_or(DfgError::UnknownNode {
                parent: p,
                child: c,
                missing: p,
            })?;
            let ci = *index.get(&c).ok_or(DfgError::UnknownNode {
                parent: p,
                child: c,
                missing: c,
            })?;
            if p == c {
                return Err(DfgError::SelfLoop(p));
            }
            if !seen.insert((p, c)) {
                return Err(DfgError::DuplicateEdge(p, c));
            }
            children[pi].push(ci);
            parents[ci].push(pi);
        }

        let topo = topological_order(&nodes, &parents, &children)?;
        Ok(Dfg {
            id: id.into(),
            nodes,
            edges,
            parents,
            children,
            topo,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parent indices of the node at `index`.
    pub fn parents(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    /// Child indices of the node at `index`.
    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    /// Node indices in a topological order (Kahn's algorithm, smallest
    /// index first among ready nodes).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

fn topological_order(
    nodes: &[Node],
    parents: &[Vec<usize>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>, DfgError> {
    let n = nodes.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every node left over sits on or behind a cycle. Walk parent links
    // from one of them until a node repeats; the closing edge is reported.
    let mut visited = vec![false; n];
    let mut cur = (0..n).find(|&i| indeg[i] > 0).expect("leftover node");
    loop {
        visited[cur] = true;
        let p = *parents[cur]
            .iter()
            .find(|&&p| indeg[p] > 0)
            .expect("cyclic node has a cyclic parent");
        if visited[p] {
            return Err(DfgError::Cycle(nodes[p].id, nodes[cur].id));
        }
        cur = p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(ids: &[u32]) -> Vec<Node> {
        ids.iter().map(|&id| Node { id, task_type: 1 }).collect()
    }

    #[test]
    fn rejects_duplicate_node() {
        assert_eq!(
            Dfg::new("d", nodes(&[0, 0]), vec![]),
            Err(DfgError::DuplicateNode(0))
        );
    }

    #[test]
    fn rejects_unknown_endpoint() {
        let err = Dfg::new("d", nodes(&[0]), vec![(0, 7)]).unwrap_err();
        assert!(matches!(err, DfgError::UnknownNode { missing: 7, .. }));
    }

    #[test]
    fn rejects_duplicate_edge() {
        let err = Dfg::new("d", nodes(&[0, 1]), vec![(0, 1), (0, 1)]).unwrap_err();
        assert_eq!(err, DfgError::DuplicateEdge(0, 1));
    }

    #[test]
    fn detects_longer_cycle() {
        let err = Dfg::new("d", nodes(&[0, 1, 2, 3]), vec![(3, 0), (0, 1), (1, 2), (2, 0)])
            .unwrap_err();
        assert!(matches!(err, DfgError::Cycle(_, _)));
    }

    #[test]
    fn empty_graph_is_valid() {
        let d = Dfg::new("empty", vec![], vec![]).unwrap();
        assert!(d.is_empty());
        assert!(d.topo_order().is_empty());
    }

    #[test]
    fn topo_order_respects_edges() {
        let d = Dfg::new("d", nodes(&[5, 3, 9]), vec![(9, 3), (3, 5)]).unwrap();
        let pos: Vec<usize> = {
            let mut p = vec![0; 3];
            for (k, &i) in d.topo_order().iter().enumerate() {
                p[i] = k;
            }
            p
        };
        assert!(pos[2] < pos[1] && pos[1] < pos[0]);
    }
}
