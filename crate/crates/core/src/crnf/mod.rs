//! The 0-1 integer program for cardinality rainbow network flow on DAGs,
//! its weighted-distortion extension, and the solvers that work on it.
//!
//! Variable layout for a network with `E` edges, `V` nodes and `K`
//! descriptions (colors are `1..=K`, stored 0-based as `k`):
//!
//! * `x[e][k]` at `e * K + k`: description `k` crosses edge `e`;
//! * `y[v][k]` at `E*K + v * K + k`: description `k` is available at `v`;
//! * weighted models only: `z[t][j]` at `(E+V)*K + t * K + (j-1)` for the
//!   `t`-th sink and level `j = 1..=K`.

mod bnb;
mod brute;
mod extract;
pub mod lp;
mod spectrum;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::netgen::{Network, NodeId};
use crate::rainbow::{DescriptionSet, DistortionModel};

pub use brute::{brute_force, brute_force_weighted, BRUTE_FORCE_LIMIT};
pub use extract::extract_flow;

/// What a model variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Edge { edge: usize, color: usize },
    Node { node: usize, color: usize },
    Level { sink: usize, level: usize },
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    InFlow,
    Duplication,
    Capacity,
    LevelOrder,
    LevelCount,
    Symmetry,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

/// `Σ terms (sense) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn le(family: Family, terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            family,
            terms,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn eq(family: Family, terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            family,
            terms,
            sense: Sense::Eq,
            rhs,
        }
    }

    fn lhs(&self, assignment: &[bool]) -> f64 {
        self.terms
            .iter()
            .filter(|(j, _)| assignment[*j])
            .map(|(_, a)| a)
            .sum()
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        let lhs = self.lhs(assignment);
        let tol = 1e-9 * self.rhs.abs().max(1.0);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Index arithmetic for the variable layout described in the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub edges: usize,
    pub nodes: usize,
    pub colors: usize,
    pub level_sinks: usize,
}

impl VarLayout {
    pub fn new(net: &Network, desc: &DescriptionSet) -> Self {
        Self {
            edges: net.edge_count(),
            nodes: net.node_count(),
            colors: desc.count(),
            level_sinks: 0,
        }
    }

    pub fn edge_var(&self, edge: usize, color: usize) -> usize {
        edge * self.colors + color
    }

    pub fn node_var(&self, node: usize, color: usize) -> usize {
        (self.edges + node) * self.colors + color
    }

    /// `level` is 1-based.
    pub fn level_var(&self, sink: usize, level: usize) -> usize {
        (self.edges + self.nodes + sink) * self.colors + level - 1
    }

    pub fn num_vars(&self) -> usize {
        (self.edges + self.nodes + self.level_sinks) * self.colors
    }
}

/// The network-level view of a model, kept so that structure-aware solvers
/// and flow extraction can work without re-deriving it from the rows.
#[derive(Debug, Clone)]
pub struct RnfStructure {
    pub net: Network,
    pub desc: DescriptionSet,
    pub layout: VarLayout,
    /// `gains[v][q]`: objective contribution of node `v` holding `q`
    /// distinct descriptions.
    pub gains: Vec<Vec<f64>>,
    pub symmetry_breaking: bool,
}

/// A binary linear program `max objective·x` over the listed constraints.
#[derive(Debug, Clone)]
pub struct IlpModel {
    vars: Vec<VarKind>,
    fixed: Vec<Option<bool>>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    structure: Option<RnfStructure>,
}

impl IlpModel {
    /// A model with no network structure; solved by LP-based branch and
    /// bound.
    pub fn generic(
        objective: Vec<f64>,
        constraints: Vec<Constraint>,
        fixed: Vec<Option<bool>>,
    ) -> Self {
        assert_eq!(objective.len(), fixed.len());
        Self {
            vars: vec![VarKind::Free; objective.len()],
            fixed,
            constraints,
            objective,
            structure: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarKind] {
        &self.vars
    }

    pub fn fixed(&self) -> &[Option<bool>] {
        &self.fixed
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn structure(&self) -> Option<&RnfStructure> {
        self.structure.as_ref()
    }

    pub fn count_vars(&self, pred: impl Fn(&VarKind) -> bool) -> usize {
        self.vars.iter().filter(|v| pred(v)).count()
    }

    pub fn count_constraints(&self, family: Family) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn evaluate(&self, assignment: &[bool]) -> f64 {
        self.objective
            .iter()
            .zip(assignment)
            .filter(|(_, &on)| on)
            .map(|(c, _)| c)
            .sum()
    }

    /// Indices of violated constraints, plus `usize::MAX` if a fixed
    /// variable deviates from its fixing.
    pub fn violations(&self, assignment: &[bool]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied(assignment))
            .map(|(i, _)| i)
            .collect();
        if self
            .fixed
            .iter()
            .zip(assignment)
            .any(|(f, &a)| f.is_some_and(|f| f != a))
        {
            out.push(usize::MAX);
        }
        out
    }

    pub fn is_feasible(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.num_vars() && self.violations(assignment).is_empty()
    }

    /// True when every feasible objective value is an integer.
    pub fn integral_objective(&self) -> bool {
        self.objective.iter().all(|c| c.fract() == 0.0)
    }
}

/// Options for model construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Adds `Σ_v y[v][k] >= Σ_v y[v][k+1]` so that color relabelings of one
    /// flow are not all feasible.
    pub symmetry_breaking: bool,
}

/// The cardinality model: maximise the number of distinct descriptions
/// summed over all sinks.
pub fn build_crnf_ilp(net: &Network, desc: &DescriptionSet) -> IlpModel {
    build_crnf_ilp_with(net, desc, BuildOptions::default())
}

pub fn build_crnf_ilp_with(
    net: &Network,
    desc: &DescriptionSet,
    options: BuildOptions,
) -> IlpModel {
    let k = desc.count();
    let gains = (0..net.node_count())
        .map(|v| {
            (0..=k)
                .map(|q| if net.is_sink_at(v) { q as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut model = base_model(net, desc, VarLayout::new(net, desc), gains, options);
    let layout = model.structure.as_ref().unwrap().layout;
    for (v, _) in net.nodes().iter().enumerate() {
        if net.is_sink_at(v) {
            for c in 0..k {
                model.objective[layout.node_var(v, c)] = 1.0;
            }
        }
    }
    model
}

/// Weighted extension: level indicators `z[t][j]` linearise
/// `Σ_t p_t (δ(0) - δ(q_t))`, so maximising the objective minimises the
/// weighted average distortion exactly.
pub fn build_weighted_rnf_ilp(
    net: &Network,
    desc: &DescriptionSet,
    model: &DistortionModel,
    weights: &BTreeMap<NodeId, f64>,
) -> IlpModel {
    build_weighted_rnf_ilp_with(net, desc, model, weights, BuildOptions::default())
}

pub fn build_weighted_rnf_ilp_with(
    net: &Network,
    desc: &DescriptionSet,
    dm: &DistortionModel,
    weights: &BTreeMap<NodeId, f64>,
    options: BuildOptions,
) -> IlpModel {
    let k = desc.count();
    let mut layout = VarLayout::new(net, desc);
    layout.level_sinks = net.sinks().len();
    let weight = |t: NodeId| weights.get(&t).copied().unwrap_or(1.0);
    let gains = (0..net.node_count())
        .map(|v| {
            let id = net.nodes()[v];
            (0..=k)
                .map(|q| {
                    if net.is_sink_at(v) {
                        weight(id) * (dm.delta(0) - dm.delta(q))
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut m = base_model(net, desc, layout, gains, options);
    for (ti, &t) in net.sinks().iter().enumerate() {
        let v = net.node_index(t).expect("sink is a node");
        for j in 1..=k {
            let z = layout.level_var(ti, j);
            m.vars[z] = VarKind::Level { sink: ti, level: j };
            m.objective[z] = weight(t) * (dm.delta(j - 1) - dm.delta(j));
            if j < k {
                m.constraints.push(Constraint::le(
                    Family::LevelOrder,
                    vec![(layout.level_var(ti, j + 1), 1.0), (z, -1.0)],
                    0.0,
                ));
            }
        }
        let mut terms: Vec<(usize, f64)> = (1..=k).map(|j| (layout.level_var(ti, j), 1.0)).collect();
        terms.extend((0..k).map(|c| (layout.node_var(v, c), -1.0)));
        m.constraints.push(Constraint::eq(Family::LevelCount, terms, 0.0));
    }
    m
}

fn base_model(
    net: &Network,
    desc: &DescriptionSet,
    layout: VarLayout,
    gains: Vec<Vec<f64>>,
    options: BuildOptions,
) -> IlpModel {
    let k = desc.count();
    let n_vars = layout.num_vars();
    let mut vars = vec![VarKind::Free; n_vars];
    let mut fixed = vec![None; n_vars];
    for e in 0..net.edge_count() {
        for c in 0..k {
            vars[layout.edge_var(e, c)] = VarKind::Edge { edge: e, color: c };
        }
    }
    for v in 0..net.node_count() {
        for c in 0..k {
            let y = layout.node_var(v, c);
            vars[y] = VarKind::Node { node: v, color: c };
            if net.is_source_at(v) {
                fixed[y] = Some(true);
            }
        }
    }

    let mut constraints = Vec::new();
    // in-flow: y[v][k] <= Σ_{(u,v)} x[(u,v)][k] for non-source v
    for v in 0..net.node_count() {
        if net.is_source_at(v) {
            continue;
        }
        for c in 0..k {
            let mut terms = vec![(layout.node_var(v, c), 1.0)];
            terms.extend(net.in_edges(v).iter().map(|&e| (layout.edge_var(e, c), -1.0)));
            constraints.push(Constraint::le(Family::InFlow, terms, 0.0));
        }
    }
    // duplication: x[(u,w)][k] <= y[u][k]
    for e in 0..net.edge_count() {
        let (u, _) = net.endpoints(e);
        for c in 0..k {
            constraints.push(Constraint::le(
                Family::Duplication,
                vec![(layout.edge_var(e, c), 1.0), (layout.node_var(u, c), -1.0)],
                0.0,
            ));
        }
    }
    // capacity: r Σ_k x[e][k] <= R(e)
    for (e, edge) in net.edges().iter().enumerate() {
        let terms = (0..k).map(|c| (layout.edge_var(e, c), desc.rate())).collect();
        constraints.push(Constraint::le(Family::Capacity, terms, edge.capacity));
    }
    if options.symmetry_breaking {
        for c in 0..k.saturating_sub(1) {
            let mut terms = Vec::with_capacity(2 * net.node_count());
            for v in 0..net.node_count() {
                terms.push((layout.node_var(v, c + 1), 1.0));
                terms.push((layout.node_var(v, c), -1.0));
            }
            constraints.push(Constraint::le(Family::Symmetry, terms, 0.0));
        }
    }

    IlpModel {
        vars,
        fixed,
        constraints,
        objective: vec![0.0; n_vars],
        structure: Some(RnfStructure {
            net: net.clone(),
            desc: *desc,
            layout,
            gains,
            symmetry_breaking: options.symmetry_breaking,
        }),
    }
}

/// Per-node upper bound on the number of distinct descriptions:
/// `ub(v) = min(K, Σ_{(u,v)} min(slots(u,v), ub(u)))`, with `ub(s) = K` at
/// sources.
pub fn node_count_bounds(net: &Network, desc: &DescriptionSet) -> Vec<usize> {
    let k = desc.count();
    let mut ub = vec![0usize; net.node_count()];
    for &v in net.topo_order() {
        ub[v] = if net.is_source_at(v) {
            k
        } else {
            let s: usize = net
                .in_edges(v)
                .iter()
                .map(|&e| {
                    let (u, _) = net.endpoints(e);
                    desc.slots(net.edges()[e].capacity).min(ub[u])
                })
                .sum();
            s.min(k)
        };
    }
    ub
}

/// Combinatorial upper bound on the optimum of a structured model.
pub fn combinatorial_bound(model: &IlpModel) -> Option<f64> {
    let s = model.structure()?;
    let ub = node_count_bounds(&s.net, &s.desc);
    Some(ub.iter().enumerate().map(|(v, &q)| s.gains[v][q]).sum())
}

/// Optimum of the linear relaxation, if it can be computed.
pub fn lp_relaxation_bound(model: &IlpModel) -> Option<f64> {
    bnb::root_relaxation(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimedOut,
}

/// Result of a solve. `assignment` is `None` only when no feasible point
/// was found (then `objective_value` is `-inf`).
#[derive(Debug, Clone, PartialEq)]
pub struct IlpSolution {
    pub assignment: Option<Vec<bool>>,
    pub objective_value: f64,
    pub upper_bound: f64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
}

impl IlpSolution {
    /// Distance between the proven bound and the incumbent.
    pub fn gap(&self) -> f64 {
        if self.assignment.is_none() {
            f64::INFINITY
        } else {
            (self.upper_bound - self.objective_value).max(0.0)
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Spectrum search when the model carries network structure, LP-based
    /// branch and bound otherwise.
    #[default]
    Auto,
    LpBranchAndBound,
    SpectrumSearch,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    pub engine: Engine,
    /// Feasible starting point; the solver never returns anything worse.
    pub warm_start: Option<Vec<bool>>,
}

/// Solves `model` to optimality, or returns the best incumbent and the
/// proven bound when `time_limit` expires.
pub fn solve(model: &IlpModel, time_limit: Option<Duration>) -> IlpSolution {
    solve_with(
        model,
        &SolveOptions {
            time_limit,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_with(model: &IlpModel, options: &SolveOptions) -> IlpSolution {
    let warm = options
        .warm_start
        .as_ref()
        .filter(|w| model.is_feasible(w))
        .cloned();
    match (options.engine, model.structure()) {
        (Engine::LpBranchAndBound, _) | (Engine::Auto, None) => {
            let mut sol = bnb::solve(model, options.time_limit, warm);
            if let (Some(a), Some(_)) = (sol.assignment.as_mut(), model.structure()) {
                drop_undelivered(model, a);
            }
            sol
        }
        (Engine::SpectrumSearch, None) => IlpSolution {
            assignment: None,
            objective_value: f64::NEG_INFINITY,
            upper_bound: f64::INFINITY,
            status: SolveStatus::Infeasible,
            nodes_explored: 0,
        },
        (_, Some(structure)) => spectrum::solve(model, structure, options.time_limit, warm),
    }
}

/// Clears `x[(u,v)][k]` wherever `y[v][k] = 0`. Such edges feed nothing the
/// model counts; removing them keeps every constraint and the objective, and
/// makes node spectra of the extracted flow equal the `y` variables.
fn drop_undelivered(model: &IlpModel, a: &mut [bool]) {
    let Some(s) = model.structure() else {
        return;
    };
    for e in 0..s.net.edge_count() {
        let (_, v) = s.net.endpoints(e);
        if s.net.is_source_at(v) {
            continue;
        }
        for c in 0..s.desc.count() {
            if !a[s.layout.node_var(v, c)] {
                a[s.layout.edge_var(e, c)] = false;
            }
        }
    }
}

/// Builds a full assignment from per-node description masks: `y` follows
/// the masks, each non-source node's descriptions are routed over its
/// in-edges by a capacity-respecting matching, and level indicators follow
/// the counts. Returns `None` if some mask cannot be delivered.
pub fn assignment_from_spectra(model: &IlpModel, spectra: &[u64]) -> Option<Vec<bool>> {
    let s = model.structure()?;
    let net = &s.net;
    let k = s.desc.count();
    let layout = s.layout;
    let full = full_mask(k);
    let mut a = vec![false; model.num_vars()];
    for v in 0..net.node_count() {
        let mask = if net.is_source_at(v) { full } else { spectra[v] };
        for c in 0..k {
            if mask >> c & 1 == 1 {
                a[layout.node_var(v, c)] = true;
            }
        }
        if net.is_source_at(v) || mask == 0 {
            continue;
        }
        let parents: Vec<(usize, u64, usize)> = net
            .in_edges(v)
            .iter()
            .map(|&e| {
                let (u, _) = net.endpoints(e);
                let avail = if net.is_source_at(u) { full } else { spectra[u] };
                (e, avail, s.desc.slots(net.edges()[e].capacity))
            })
            .collect();
        let routes = spectrum::route(mask, &parents)?;
        for (e, carried) in routes {
            for c in 0..k {
                if carried >> c & 1 == 1 {
                    a[layout.edge_var(e, c)] = true;
                }
            }
        }
    }
    if layout.level_sinks > 0 {
        for (ti, &t) in net.sinks().iter().enumerate() {
            let v = net.node_index(t).unwrap();
            let q = if net.is_source_at(v) {
                k
            } else {
                spectra[v].count_ones() as usize
            };
            for j in 1..=q {
                a[layout.level_var(ti, j)] = true;
            }
        }
    }
    Some(a)
}

/// Per-node description masks read from the `y` variables.
pub fn spectra_of(model: &IlpModel, assignment: &[bool]) -> Option<Vec<u64>> {
    let s = model.structure()?;
    let k = s.desc.count();
    Some(
        (0..s.net.node_count())
            .map(|v| {
                (0..k)
                    .filter(|&c| assignment[s.layout.node_var(v, c)])
                    .fold(0u64, |m, c| m | 1 << c)
            })
            .collect(),
    )
}

/// Per-sink `Σ_k y[t][k]` of an assignment, keyed by sink id.
pub fn sink_counts(
    net: &Network,
    desc: &DescriptionSet,
    assignment: &[bool],
) -> BTreeMap<NodeId, usize> {
    let layout = VarLayout::new(net, desc);
    net.sinks()
        .iter()
        .map(|&t| {
            let v = net.node_index(t).unwrap();
            let q = (0..desc.count())
                .filter(|&c| assignment[layout.node_var(v, c)])
                .count();
            (t, q)
        })
        .collect()
}

pub(crate) fn full_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{fig1_network, Edge};

    fn desc(k: usize, r: f64) -> DescriptionSet {
        DescriptionSet::new(k, r).unwrap()
    }

    #[test]
    fn fixture_model_shape() {
        let net = fig1_network(1.0);
        let m = build_crnf_ilp(&net, &desc(2, 1.0));
        assert_eq!(m.count_vars(|v| matches!(v, VarKind::Edge { .. })), 12);
        assert_eq!(m.count_vars(|v| matches!(v, VarKind::Node { .. })), 10);
        let layout = m.structure().unwrap().layout;
        let src = net.node_index(1).unwrap();
        assert_eq!(m.fixed()[layout.node_var(src, 0)], Some(true));
        assert_eq!(m.fixed()[layout.node_var(src, 1)], Some(true));
        assert_eq!(m.count_constraints(Family::InFlow), 4 * 2);
        assert_eq!(m.count_constraints(Family::Duplication), 6 * 2);
        assert_eq!(m.count_constraints(Family::Capacity), 6);
        assert_eq!(m.count_constraints(Family::Symmetry), 0);
    }

    #[test]
    fn single_node_model() {
        let net = Network::new(vec![0], vec![], vec![0], vec![], None).unwrap();
        let m = build_crnf_ilp(&net, &desc(3, 1.0));
        assert!(m.constraints().is_empty());
        assert_eq!(m.fixed().iter().filter(|f| f.is_some()).count(), 3);
        let sol = solve(&m, None);
        assert_eq!(sol.objective_value, 0.0);
        assert!(sol.is_optimal());
    }

    #[test]
    fn zero_capacity_forces_zero() {
        let edges = vec![
            Edge { from: 0, to: 1, capacity: 0.0 },
            Edge { from: 1, to: 2, capacity: 0.0 },
            Edge { from: 0, to: 2, capacity: 0.0 },
        ];
        let net = Network::new(vec![0, 1, 2], edges, vec![0], vec![1, 2], None).unwrap();
        let m = build_crnf_ilp(&net, &desc(2, 1.0));
        for engine in [Engine::LpBranchAndBound, Engine::SpectrumSearch] {
            let sol = solve_with(&m, &SolveOptions { engine, ..Default::default() });
            assert_eq!(sol.objective_value, 0.0);
            let a = sol.assignment.unwrap();
            let layout = m.structure().unwrap().layout;
            for e in 0..3 {
                for c in 0..2 {
                    assert!(!a[layout.edge_var(e, c)]);
                }
            }
        }
    }

    #[test]
    fn weighted_model_with_linear_levels_scales_crnf() {
        let net = fig1_network(1.0);
        let d = desc(2, 1.0);
        let card = DistortionModel::cardinality(2);
        let w = build_weighted_rnf_ilp(&net, &d, &card, net.sink_weights());
        let c = build_crnf_ilp(&net, &d);
        let sw = solve(&w, None);
        let sc = solve(&c, None);
        assert!((sw.objective_value - sc.objective_value / 2.0).abs() < 1e-12);
        assert_eq!(w.count_constraints(Family::LevelOrder), 4);
        assert_eq!(w.count_constraints(Family::LevelCount), 4);
    }

    #[test]
    fn symmetry_rows_keep_optimum() {
        let net = fig1_network(1.0);
        let d = desc(2, 1.0);
        let m = build_crnf_ilp_with(&net, &d, BuildOptions { symmetry_breaking: true });
        assert_eq!(m.count_constraints(Family::Symmetry), 1);
        for engine in [Engine::LpBranchAndBound, Engine::SpectrumSearch] {
            let sol = solve_with(&m, &SolveOptions { engine, ..Default::default() });
            assert_eq!(sol.objective_value, 6.0);
            assert!(m.is_feasible(sol.assignment.as_ref().unwrap()));
        }
    }

    #[test]
    fn bounds_on_fixture() {
        let net = fig1_network(1.0);
        let m = build_crnf_ilp(&net, &desc(2, 1.0));
        assert_eq!(node_count_bounds(&net, &desc(2, 1.0)), vec![2, 1, 1, 2, 2]);
        assert_eq!(combinatorial_bound(&m), Some(6.0));
        let lp = lp_relaxation_bound(&m).unwrap();
        assert!((lp - 6.0).abs() < 1e-7);
    }
}
