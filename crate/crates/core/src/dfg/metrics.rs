use serde::{Deserialize, Serialize};

use super::Dfg;

/// Unit-weight structural statistics of a DFG.
///
/// Node classes partition the graph: a root has no parents and at least
/// one child, a leaf has no children and at least one parent, an isolated
/// node has neither, and everything else is internal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub node_count: usize,
    pub edge_count: usize,
    pub root_count: usize,
    pub internal_count: usize,
    pub leaf_count: usize,
    pub isolated_count: usize,
    pub subgraph_count: usize,
    pub max_parents: usize,
    pub max_children: usize,
    pub edges_per_node: f64,
    /// Longest path measured in nodes.
    pub critical_path_len_nodes: usize,
    /// Longest path of every weakly connected component, ordered by the
    /// component's first node.
    pub per_subgraph_critical_paths: Vec<usize>,
    pub parallelism: f64,
}

pub fn graph_metrics(dfg: &Dfg) -> GraphMetrics {
    let n = dfg.node_count();
    let (mut roots, mut internal, mut leaves, mut isolated) = (0, 0, 0, 0);
    let (mut max_parents, mut max_children) = (0, 0);
    for i in 0..n {
        let (np, nc) = (dfg.parents(i).len(), dfg.children(i).len());
        max_parents = max_parents.max(np);
        max_children = max_children.max(nc);
        match (np, nc) {
            (0, 0) => isolated += 1,
            (0, _) => roots += 1,
            (_, 0) => leaves += 1,
            _ => internal += 1,
        }
    }

    // Path length in nodes ending at each node.
    let mut depth = vec![0usize; n];
    for &i in dfg.topo_order() {
        depth[i] = 1 + dfg.parents(i).iter().map(|&p| depth[p]).max().unwrap_or(0);
    }

    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for &c in dfg.children(i) {
            uf.union(i, c);
        }
    }
    let mut component_of_root = vec![usize::MAX; n];
    let mut per_subgraph = Vec::new();
    for (i, &d) in depth.iter().enumerate() {
        let r = uf.find(i);
        if component_of_root[r] == usize::MAX {
            component_of_root[r] = per_subgraph.len();
            per_subgraph.push(0);
        }
        let c = component_of_root[r];
        per_subgraph[c] = per_subgraph[c].max(d);
    }

    let critical = depth.iter().copied().max().unwrap_or(0);
    GraphMetrics {
        node_count: n,
        edge_count: dfg.edge_count(),
        root_count: roots,
        internal_count: internal,
        leaf_count: leaves,
        isolated_count: isolated,
        subgraph_count: per_subgraph.len(),
        max_parents,
        max_children,
        edges_per_node: ratio(dfg.edge_count(), n),
        critical_path_len_nodes: critical,
        per_subgraph_critical_paths: per_subgraph,
        parallelism: ratio(n, critical),
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfg::{Dfg, Node};
    use proptest::prelude::*;

    fn dfg(n: u32, edges: &[(u32, u32)]) -> Dfg {
        let nodes = (0..n).map(|id| Node { id, task_type: 1 }).collect();
        Dfg::new("t", nodes, edges.to_vec()).unwrap()
    }

    #[test]
    fn chain_of_three() {
        let m = graph_metrics(&dfg(3, &[(0, 1), (1, 2)]));
        assert_eq!((m.root_count, m.internal_count, m.leaf_count, m.isolated_count), (1, 1, 1, 0));
        assert_eq!(m.critical_path_len_nodes, 3);
        assert_eq!(m.subgraph_count, 1);
    }

    #[test]
    fn three_isolated() {
        let m = graph_metrics(&dfg(3, &[]));
        assert_eq!(m.isolated_count, 3);
        assert_eq!((m.root_count, m.leaf_count, m.edge_count), (0, 0, 0));
        assert_eq!(m.subgraph_count, 3);
        assert_eq!(m.per_subgraph_critical_paths, vec![1, 1, 1]);
    }

    #[test]
    fn empty_graph() {
        let m = graph_metrics(&dfg(0, &[]));
        assert_eq!(m.node_count, 0);
        assert_eq!(m.critical_path_len_nodes, 0);
        assert_eq!(m.parallelism, 0.0);
        assert_eq!(m.edges_per_node, 0.0);
    }

    #[test]
    fn hal_like_parallelism() {
        // 11 nodes, longest path of 4 nodes, 8 edges (the HAL benchmark's shape).
        let m = graph_metrics(&dfg(
            11,
            &[(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (7, 8), (8, 9), (9, 10)],
        ));
        assert_eq!(m.critical_path_len_nodes, 4);
        assert_eq!(m.parallelism, 2.75);
    }

    /// Brute force: enumerate every path starting at every node.
    fn longest_path_brute(d: &Dfg) -> usize {
        fn walk(d: &Dfg, i: usize) -> usize {
            1 + d.children(i).iter().map(|&c| walk(d, c)).max().unwrap_or(0)
        }
        (0..d.node_count()).map(|i| walk(d, i)).max().unwrap_or(0)
    }

    fn small_dag() -> impl Strategy<Value = Dfg> {
        (0u32..=10).prop_flat_map(|n| {
            proptest::collection::vec((0..n.max(1), 0..n.max(1)), 0..25).prop_map(move |raw| {
                let mut edges = Vec::new();
                for (a, b) in raw {
                    if a < b && !edges.contains(&(a, b)) && b < n {
                        edges.push((a, b));
                    }
                }
                dfg(n, &edges)
            })
        })
    }

    proptest! {
        #[test]
        fn classes_partition_nodes(d in small_dag()) {
            let m = graph_metrics(&d);
            prop_assert_eq!(m.root_count + m.internal_count + m.leaf_count + m.isolated_count, m.node_count);
            if m.node_count > 0 {
                prop_assert!(m.critical_path_len_nodes >= 1);
            }
            prop_assert_eq!(m.per_subgraph_critical_paths.len(), m.subgraph_count);
        }

        #[test]
        fn critical_path_matches_brute_force(d in small_dag()) {
            prop_assert_eq!(graph_metrics(&d).critical_path_len_nodes, longest_path_brute(&d));
        }
    }
}
