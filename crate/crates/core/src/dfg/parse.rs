use std::fmt::Write as _;

use super::{Dfg, DfgError, Node, NodeId};

/// Parses the line-oriented DFG text format:
///
/// ```text
/// # comment
/// dfg jpeg-smooth
/// node 0 3
/// node 1 5
/// edge 0 1
/// ```
///
/// The header must come before any node or edge line. Trailing `#`
/// comments are allowed on every line.
pub fn parse_dfg(text: &str) -> Result<Dfg, DfgError> {
    let mut id: Option<String> = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = line.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let rest: Vec<&str> = tokens.collect();
        let syntax = |message: String| DfgError::Syntax {
            line: line_no,
            message,
        };
        match keyword {
            "dfg" => {
                if id.is_some() {
                    return Err(syntax("second `dfg` header".into()));
                }
                match rest.as_slice() {
                    [name] => id = Some((*name).to_string()),
                    _ => return Err(syntax("expected `dfg <id>`".into())),
                }
            }
            "node" | "edge" if id.is_none() => {
                return Err(syntax(format!("`{keyword}` before `dfg` header")));
            }
            "node" => match rest.as_slice() {
                [nid, ty] => nodes.push(Node {
                    id: parse_u32(nid).map_err(syntax)?,
                    task_type: parse_u32(ty).map_err(syntax)?,
                }),
                _ => return Err(syntax("expected `node <id> <task_type_id>`".into())),
            },
            "edge" => match rest.as_slice() {
                [p, c] => edges.push((parse_u32(p).map_err(syntax)?, parse_u32(c).map_err(syntax)?)),
                _ => return Err(syntax("expected `edge <parent> <child>`".into())),
            },
            other => return Err(syntax(format!("unknown keyword `{other}`"))),
        }
    }

    let id = id.ok_or(DfgError::Syntax {
        line: text.lines().count().max(1),
        message: "missing `dfg <id>` header".into(),
    })?;
    Dfg::new(id, nodes, edges)
}

fn parse_u32(tok: &str) -> Result<NodeId, String> {
    tok.parse::<u32>()
        .map_err(|_| format!("expected a non-negative integer, found `{tok}`"))
}

pub fn serialize_dfg(dfg: &Dfg) -> String {
    let mut out = String::with_capacity(16 * (dfg.node_count() + dfg.edge_count()) + 32);
    let _ = writeln!(out, "dfg {}", dfg.id());
    for n in dfg.nodes() {
        let _ = writeln!(out, "node {} {}", n.id, n.task_type);
    }
    for (p, c) in dfg.edges() {
        let _ = writeln!(out, "edge {p} {c}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_node_chain() {
        let d = parse_dfg("dfg chain\nnode 0 1\nnode 1 2\nedge 0 1\n").unwrap();
        assert_eq!(d.node_count(), 2);
        assert_eq!(d.edge_count(), 1);
        assert_eq!(d.id(), "chain");
    }

    #[test]
    fn self_loop_rejected() {
        let err = parse_dfg("dfg x\nnode 0 1\nedge 0 0\n").unwrap_err();
        assert_eq!(err, DfgError::SelfLoop(0));
    }

    #[test]
    fn two_cycle_rejected() {
        let err = parse_dfg("dfg x\nnode 0 1\nnode 1 1\nedge 0 1\nedge 1 0\n").unwrap_err();
        assert!(matches!(err, DfgError::Cycle(_, _)));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_dfg("dfg x\n# fine\nnode 0 one\n").unwrap_err();
        assert!(matches!(err, DfgError::Syntax { line: 3, .. }), "{err:?}");
        let err = parse_dfg("node 0 1\n").unwrap_err();
        assert!(matches!(err, DfgError::Syntax { line: 1, .. }));
        let err = parse_dfg("dfg x\nvertex 1 2\n").unwrap_err();
        assert!(matches!(err, DfgError::Syntax { line: 2, .. }));
    }

    #[test]
    fn duplicate_node_rejected() {
        let err = parse_dfg("dfg x\nnode 4 1\nnode 4 2\n").unwrap_err();
        assert_eq!(err, DfgError::DuplicateNode(4));
    }

    #[test]
    fn comments_and_blank_lines() {
        let d = parse_dfg("# header\n\ndfg c # trailing\nnode 0 1 # x\n").unwrap();
        assert_eq!(d.node_count(), 1);
    }

    fn arb_dfg() -> impl Strategy<Value = Dfg> {
        (1usize..30).prop_flat_map(|n| {
            let types = proptest::collection::vec(1u32..17, n);
            let ids = Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle();
            let edges = proptest::collection::vec((0..n, 0..n), 0..(2 * n));
            (types, ids, edges).prop_map(|(types, ids, raw)| {
                let nodes: Vec<Node> = ids
                    .iter()
                    .zip(&types)
                    .map(|(&id, &task_type)| Node { id: id * 3 + 1, task_type })
                    .collect();
                let mut edges = Vec::new();
                for (a, b) in raw {
                    let (lo, hi) = (a.min(b), a.max(b));
                    let e = (nodes[lo].id, nodes[hi].id);
                    if lo != hi && !edges.contains(&e) {
                        edges.push(e);
                    }
                }
                Dfg::new("prop", nodes, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip(d in arb_dfg()) {
            let text = serialize_dfg(&d);
            prop_assert_eq!(parse_dfg(&text).unwrap(), d);
        }
    }
}
