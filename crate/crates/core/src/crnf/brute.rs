//! Exhaustive enumeration of edge-variable assignments, used as ground
//! truth for the solvers on small instances.
//!
//! Edges are visited with their tails in topological order, so a tail's
//! description set is known when its out-edges are enumerated. Assignments
//! with `x[e][k] = 1` for a description the tail lacks violate duplication
//! and are skipped rather than generated; node variables are the union of
//! what arrives, which is the largest set in-flow allows.

use std::collections::BTreeMap;

use crate::error::SolverError;
use crate::netgen::{Network, NodeId};
use crate::rainbow::{DescriptionSet, DistortionModel};

/// Largest `K·|E|` accepted by the enumerators.
pub const BRUTE_FORCE_LIMIT: usize = 24;

struct Enumerator<'a> {
    net: &'a Network,
    rate: f64,
    edges: Vec<usize>,
    held: Vec<u64>,
    score: &'a dyn Fn(&[u64]) -> f64,
    best: f64,
}

impl Enumerator<'_> {
    fn run(&mut self, i: usize) {
        if i == self.edges.len() {
            let s = (self.score)(&self.held);
            if s > self.best {
                self.best = s;
            }
            return;
        }
        let e = self.edges[i];
        let (u, v) = self.net.endpoints(e);
        let cap = self.net.edges()[e].capacity;
        let avail = self.held[u];
        let before = self.held[v];
        // every subset of the tail's descriptions, including the empty one
        let mut sub = avail;
        loop {
            let load = self.rate * sub.count_ones() as f64;
            if load <= cap + 1e-9 {
                if !self.net.is_source_at(v) {
                    self.held[v] = before | sub;
                }
                self.run(i + 1);
                self.held[v] = before;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & avail;
        }
    }
}

fn enumerate(
    net: &Network,
    desc: &DescriptionSet,
    score: &dyn Fn(&[u64]) -> f64,
) -> Result<f64, SolverError> {
    let k = desc.count();
    let vars = k * net.edge_count();
    if vars > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge {
            vars,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let full = if k == 0 { 0 } else { u64::MAX >> (64 - k) };
    let mut position = vec![0usize; net.node_count()];
    for (i, &v) in net.topo_order().iter().enumerate() {
        position[v] = i;
    }
    let mut edges: Vec<usize> = (0..net.edge_count()).collect();
    edges.sort_by_key(|&e| (position[net.endpoints(e).0], e));
    let held = (0..net.node_count())
        .map(|v| if net.is_source_at(v) { full } else { 0 })
        .collect();
    let mut en = Enumerator {
        net,
        rate: desc.rate(),
        edges,
        held,
        score,
        best: f64::NEG_INFINITY,
    };
    en.run(0);
    Ok(en.best)
}

/// Maximum of `Σ_{t∈T} Σ_k y[t][k]` over all admissible assignments.
pub fn brute_force(net: &Network, desc: &DescriptionSet) -> Result<i64, SolverError> {
    let sinks: Vec<usize> = net
        .sinks()
        .iter()
        .map(|&t| net.node_index(t).expect("sink is a node"))
        .collect();
    let score = |held: &[u64]| -> f64 { sinks.iter().map(|&v| held[v].count_ones() as f64).sum() };
    enumerate(net, desc, &score).map(|b| b as i64)
}

/// Maximum of `Σ_t p_t (δ(0) - δ(q_t))` over all admissible assignments,
/// with `p_t` defaulting to 1.
pub fn brute_force_weighted(
    net: &Network,
    desc: &DescriptionSet,
    model: &DistortionModel,
    weights: &BTreeMap<NodeId, f64>,
) -> Result<f64, SolverError> {
    let sinks: Vec<(usize, f64)> = net
        .sinks()
        .iter()
        .map(|&t| {
            (
                net.node_index(t).expect("sink is a node"),
                weights.get(&t).copied().unwrap_or(1.0),
            )
        })
        .collect();
    let score = |held: &[u64]| -> f64 {
        sinks
            .iter()
            .map(|&(v, p)| p * (model.delta(0) - model.delta(held[v].count_ones() as usize)))
            .sum()
    };
    enumerate(net, desc, &score)
}
