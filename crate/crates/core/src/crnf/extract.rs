//! Path reconstruction from the edge variables of a solution.

use crate::error::SolverError;
use crate::netgen::Network;
use crate::rainbow::{Color, DescriptionSet, FlowPath, RainbowFlow};

use super::{IlpSolution, VarLayout};

/// Builds an explicit flow whose edge spectra are `{k : x[e][k] = 1}`.
///
/// For each description, every reached node keeps one tree edge (its
/// lowest-indexed carrying in-edge from a reached tail). Each carrying edge
/// `(u, v)` yields the path "tree path to `u`, then `(u, v)`", except a tree
/// edge into a node that forwards the description further: the forwarded
/// paths already cover it.
pub fn extract_flow(
    solution: &IlpSolution,
    net: &Network,
    desc: &DescriptionSet,
) -> Result<RainbowFlow, SolverError> {
    let a = solution
        .assignment
        .as_ref()
        .ok_or(SolverError::NoSolution("no assignment to extract from"))?;
    let layout = VarLayout::new(net, desc);
    let k = desc.count();
    if a.len() < (layout.edges + layout.nodes) * k {
        return Err(SolverError::Inconsistent(format!(
            "assignment has {} variables, network needs at least {}",
            a.len(),
            (layout.edges + layout.nodes) * k
        )));
    }

    let mut flow = RainbowFlow::empty(k);
    for c in 0..k {
        let carries = |e: usize| a[layout.edge_var(e, c)];
        let mut tree: Vec<Option<usize>> = vec![None; net.node_count()];
        let mut reached = vec![false; net.node_count()];
        for &v in net.topo_order() {
            if net.is_source_at(v) {
                reached[v] = true;
                continue;
            }
            for &e in net.in_edges(v) {
                if !carries(e) {
                    continue;
                }
                let (u, _) = net.endpoints(e);
                if !reached[u] {
                    return Err(SolverError::Inconsistent(format!(
                        "description {} leaves node {} which never receives it",
                        c + 1,
                        net.nodes()[u]
                    )));
                }
                if tree[v].is_none_or(|t| e < t) {
                    tree[v] = Some(e);
                }
                reached[v] = true;
            }
            if a[layout.node_var(v, c)] && !reached[v] {
                return Err(SolverError::Inconsistent(format!(
                    "node {} holds description {} without receiving it",
                    net.nodes()[v],
                    c + 1
                )));
            }
        }

        let forwards = |v: usize| net.out_edges(v).iter().any(|&e| carries(e));
        for e in 0..net.edge_count() {
            if !carries(e) {
                continue;
            }
            let (u, v) = net.endpoints(e);
            if tree[v] == Some(e) && forwards(v) {
                continue;
            }
            let mut edges = vec![e];
            let mut at = u;
            while let Some(t) = tree[at] {
                edges.push(t);
                at = net.endpoints(t).0;
            }
            edges.reverse();
            let ids = edges
                .iter()
                .map(|&e| {
                    let edge = &net.edges()[e];
                    (edge.from, edge.to)
                })
                .collect();
            flow.push((c + 1) as Color, FlowPath::from_edges(ids));
        }
    }
    Ok(flow)
}
