//! Rainbow network flows: colored flow paths, edge and node spectra,
//! admissibility under link capacities, and the distortion seen at sinks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::FlowError;
use crate::netgen::{Network, NodeId};

/// Description identifier, `1..=K`.
pub type Color = u32;

/// The balanced description set: `count` descriptions of `rate` bits per
/// source symbol each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptionSet {
    count: usize,
    rate: f64,
}

impl DescriptionSet {
    pub fn new(count: usize, rate: f64) -> Result<Self, FlowError> {
        if count == 0 {
            return Err(FlowError::InvalidDescriptions("count must be at least 1"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(FlowError::InvalidDescriptions("rate must be positive"));
        }
        if count > 64 {
            return Err(FlowError::InvalidDescriptions("at most 64 descriptions are supported"));
        }
        Ok(Self { count, rate })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// How many distinct descriptions fit on a link of `capacity`.
    pub fn slots(&self, capacity: f64) -> usize {
        let s = (capacity / self.rate + 1e-9).floor();
        if s <= 0.0 {
            0
        } else {
            (s as usize).min(self.count)
        }
    }
}

/// A walk along network edges, stored as its edge list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowPath {
    edges: Vec<(NodeId, NodeId)>,
}

impl FlowPath {
    /// Path through consecutive `nodes`.
    pub fn through(nodes: &[NodeId]) -> Self {
        Self {
            edges: nodes.windows(2).map(|w| (w[0], w[1])).collect(),
        }
    }

    /// Path from an explicit edge list; connectivity is checked by
    /// [`validate_flow`], not here.
    pub fn from_edges(edges: Vec<(NodeId, NodeId)>) -> Self {
        Self { edges }
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn origin(&self) -> Option<NodeId> {
        self.edges.first().map(|e| e.0)
    }

    pub fn terminus(&self) -> Option<NodeId> {
        self.edges.last().map(|e| e.1)
    }

    pub fn contains_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.edges.iter().any(|&(a, b)| a == v || b == v)
    }

    /// Node sequence, assuming the path is connected.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        if let Some(&(a, _)) = self.edges.first() {
            out.push(a);
        }
        out.extend(self.edges.iter().map(|e| e.1));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColoredPath {
    pub color: Color,
    pub path: FlowPath,
}

/// A set of flow paths together with their coloring, over `K` descriptions
/// hosted by every source.
#[derive(Debug, Clone, PartialEq)]
pub struct RainbowFlow {
    descriptions: usize,
    paths: Vec<ColoredPath>,
}

impl RainbowFlow {
    pub fn new(descriptions: usize, paths: Vec<ColoredPath>) -> Self {
        Self {
            descriptions,
            paths,
        }
    }

    pub fn empty(descriptions: usize) -> Self {
        Self::new(descriptions, Vec::new())
    }

    pub fn descriptions(&self) -> usize {
        self.descriptions
    }

    pub fn paths(&self) -> &[ColoredPath] {
        &self.paths
    }

    pub fn push(&mut self, color: Color, path: FlowPath) {
        self.paths.push(ColoredPath { color, path });
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Edge spectrum for every edge of `net`, indexed like `net.edges()`.
    /// Path edges that are not in the network are ignored.
    pub fn edge_spectra(&self, net: &Network) -> Vec<BTreeSet<Color>> {
        let mut out = vec![BTreeSet::new(); net.edge_count()];
        for cp in &self.paths {
            for &(a, b) in cp.path.edges() {
                if let Some(e) = net.edge_index(a, b) {
                    out[e].insert(cp.color);
                }
            }
        }
        out
    }

    /// Node spectrum for every node of `net`, indexed like `net.nodes()`.
    pub fn node_spectra(&self, net: &Network) -> Vec<BTreeSet<Color>> {
        let mut out = vec![BTreeSet::new(); net.node_count()];
        for cp in &self.paths {
            for v in cp.path.edges().iter().flat_map(|&(a, b)| [a, b]) {
                if let Some(i) = net.node_index(v) {
                    out[i].insert(cp.color);
                }
            }
        }
        let all: BTreeSet<Color> = (1..=self.descriptions as Color).collect();
        for &s in net.sources() {
            let i = net.node_index(s).expect("source is a node");
            out[i].extend(all.iter().copied());
        }
        out
    }

    pub fn to_document(&self) -> Vec<FlowEntry> {
        self.paths
            .iter()
            .map(|cp| FlowEntry {
                color: cp.color,
                path: cp.path.nodes(),
            })
            .collect()
    }

    pub fn from_document(descriptions: usize, doc: Vec<FlowEntry>) -> Self {
        let paths = doc
            .into_iter()
            .map(|e| ColoredPath {
                color: e.color,
                path: FlowPath::through(&e.path),
            })
            .collect();
        Self::new(descriptions, paths)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("flow document serializes")
    }

    pub fn from_json(descriptions: usize, text: &str) -> Result<Self, FlowError> {
        let doc: Vec<FlowEntry> =
            serde_json::from_str(text).map_err(|e| FlowError::Parse(e.to_string()))?;
        Ok(Self::from_document(descriptions, doc))
    }
}

/// One entry of the flow document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEntry {
    pub color: Color,
    pub path: Vec<NodeId>,
}

/// Ψ_E: the descriptions carried on edge `(from, to)`.
pub fn edge_spectrum(
    flow: &RainbowFlow,
    net: &Network,
    from: NodeId,
    to: NodeId,
) -> Result<BTreeSet<Color>, FlowError> {
    if net.edge_index(from, to).is_none() {
        return Err(FlowError::UnknownEdge(from, to));
    }
    Ok(flow
        .paths
        .iter()
        .filter(|cp| cp.path.contains_edge(from, to))
        .map(|cp| cp.color)
        .collect())
}

/// Ψ_V: the descriptions available at node `v`. Sources hold all `K`.
pub fn node_spectrum(
    flow: &RainbowFlow,
    net: &Network,
    v: NodeId,
) -> Result<BTreeSet<Color>, FlowError> {
    let i = net.node_index(v).ok_or(FlowError::UnknownNode(v))?;
    if net.is_source_at(i) {
        return Ok((1..=flow.descriptions as Color).collect());
    }
    Ok(flow
        .paths
        .iter()
        .filter(|cp| cp.path.contains_node(v))
        .map(|cp| cp.color)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityViolation {
    pub from: NodeId,
    pub to: NodeId,
    pub spectrum_size: usize,
    pub load: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub violations: Vec<CapacityViolation>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `r * |Ψ_E(e)| <= R(e)` on every edge. Copies of one description
/// on a link count once.
pub fn is_admissible(
    flow: &RainbowFlow,
    net: &Network,
    desc: &DescriptionSet,
) -> AdmissibilityReport {
    let spectra = flow.edge_spectra(net);
    let violations = net
        .edges()
        .iter()
        .zip(&spectra)
        .filter_map(|(e, spec)| {
            let load = desc.rate() * spec.len() as f64;
            (load > e.capacity * (1.0 + 1e-12) + 1e-12).then_some(CapacityViolation {
                from: e.from,
                to: e.to,
                spectrum_size: spec.len(),
                load,
                capacity: e.capacity,
            })
        })
        .collect();
    AdmissibilityReport { violations }
}

/// Per-sink count of distinct descriptions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RainbowFlowVector {
    q: BTreeMap<NodeId, usize>,
}

impl RainbowFlowVector {
    pub fn new(q: BTreeMap<NodeId, usize>) -> Self {
        Self { q }
    }

    /// Builds a vector over anonymous sinks `0..values.len()`.
    pub fn from_counts(values: &[usize]) -> Self {
        Self {
            q: values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as NodeId, v))
                .collect(),
        }
    }

    pub fn get(&self, t: NodeId) -> Option<usize> {
        self.q.get(&t).copied()
    }

    pub fn as_map(&self) -> &BTreeMap<NodeId, usize> {
        &self.q
    }

    /// Counts in sink-id order.
    pub fn counts(&self) -> Vec<usize> {
        self.q.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn max(&self) -> usize {
        self.q.values().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.q.values().sum()
    }

    /// Number of sinks receiving exactly `k` descriptions, for `k = 0..=K`.
    pub fn histogram(&self, k_max: usize) -> Vec<usize> {
        let mut h = vec![0; k_max + 1];
        for &v in self.q.values() {
            h[v.min(k_max)] += 1;
        }
        h
    }
}

/// q_t = |Ψ_V(t)| for every sink.
pub fn rainbow_flow_vector(flow: &RainbowFlow, net: &Network) -> RainbowFlowVector {
    let spectra = flow.node_spectra(net);
    let q = net
        .sinks()
        .iter()
        .map(|&t| (t, spectra[net.node_index(t).expect("sink is a node")].len()))
        .collect();
    RainbowFlowVector { q }
}

/// A distortion-rate function `D_X(R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drf {
    /// `variance * 2^(-2R)`: memoryless Gaussian source under squared error.
    Gaussian { variance: f64 },
    /// Linear interpolation through `(rate, distortion)` points, constant
    /// beyond the last point.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

impl Default for Drf {
    fn default() -> Self {
        Drf::Gaussian { variance: 1.0 }
    }
}

impl Drf {
    pub fn unit_gaussian() -> Self {
        Drf::default()
    }

    pub fn eval(&self, rate: f64) -> f64 {
        match self {
            Drf::Gaussian { variance } => variance * (-2.0 * rate).exp2(),
            Drf::PiecewiseLinear { points } => {
                let (i, t) = locate(points, rate);
                match i {
                    None => points.last().map_or(0.0, |p| p.1),
                    Some(i) => points[i].1 + t * (points[i + 1].1 - points[i].1),
                }
            }
        }
    }

    /// dD/dR. Piecewise-linear curves return the right-hand slope.
    pub fn derivative(&self, rate: f64) -> f64 {
        match self {
            Drf::Gaussian { .. } => -2.0 * std::f64::consts::LN_2 * self.eval(rate),
            Drf::PiecewiseLinear { points } => match locate(points, rate) {
                (None, _) => 0.0,
                (Some(i), _) => (points[i + 1].1 - points[i].1) / (points[i + 1].0 - points[i].0),
            },
        }
    }

    /// Scans `[0, r_max]` on `steps` intervals for monotonicity and
    /// midpoint convexity. Returns the first offending rate.
    pub fn check_convex_nonincreasing(&self, r_max: f64, steps: usize) -> Result<(), f64> {
        let h = r_max / steps as f64;
        let tol = 1e-12;
        let vals: Vec<f64> = (0..=steps).map(|i| self.eval(i as f64 * h)).collect();
        for i in 0..steps {
            if vals[i + 1] > vals[i] + tol {
                return Err(i as f64 * h);
            }
        }
        for i in 1..steps {
            if vals[i - 1] + vals[i + 1] - 2.0 * vals[i] < -tol {
                return Err(i as f64 * h);
            }
        }
        Ok(())
    }
}

fn locate(points: &[(f64, f64)], rate: f64) -> (Option<usize>, f64) {
    for i in 0..points.len().saturating_sub(1) {
        let (r0, r1) = (points[i].0, points[i + 1].0);
        if rate >= r0 && rate < r1 {
            return (Some(i), (rate - r0) / (r1 - r0));
        }
    }
    (None, 0.0)
}

/// A balanced-MDC distortion model: δ(k) for `k = 0..=K` together with the
/// source's distortion-rate function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionModel {
    levels: Vec<f64>,
    drf: Drf,
}

impl DistortionModel {
    /// Validates that δ is non-negative and non-increasing, that
    /// `δ(0) = D_X(0)`, and that `D_X` is convex non-increasing.
    pub fn new(levels: Vec<f64>, drf: Drf) -> Result<Self, FlowError> {
        if levels.len() < 2 {
            return Err(FlowError::InvalidModel("need δ(0) and at least δ(1)".into()));
        }
        if levels.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(FlowError::InvalidModel("δ must be finite and non-negative".into()));
        }
        if let Some(k) = levels.windows(2).position(|w| w[1] > w[0] + 1e-12) {
            return Err(FlowError::InvalidModel(format!(
                "δ increases from level {k} to {}",
                k + 1
            )));
        }
        let d0 = drf.eval(0.0);
        if (levels[0] - d0).abs() > 1e-9 * d0.max(1.0) {
            return Err(FlowError::InvalidModel(format!(
                "δ(0) = {} differs from D_X(0) = {d0}",
                levels[0]
            )));
        }
        if let Err(r) = drf.check_convex_nonincreasing(16.0, 1600) {
            return Err(FlowError::InvalidModel(format!(
                "distortion-rate function is not convex non-increasing near R={r}"
            )));
        }
        Ok(Self { levels, drf })
    }

    /// δ(k) = 1 - k/K, the cardinality model, over the unit Gaussian.
    pub fn cardinality(k: usize) -> Self {
        let levels = (0..=k).map(|i| 1.0 - i as f64 / k as f64).collect();
        Self::new(levels, Drf::unit_gaussian()).expect("cardinality model is valid")
    }

    /// Model with δ(k) = `f(k)` for `k >= 1` and δ(0) = D_X(0).
    pub fn from_fn(k: usize, drf: Drf, f: impl Fn(usize) -> f64) -> Result<Self, FlowError> {
        let mut levels = vec![drf.eval(0.0)];
        levels.extend((1..=k).map(f));
        Self::new(levels, drf)
    }

    /// Number of descriptions `K` the model covers.
    pub fn descriptions(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn drf(&self) -> &Drf {
        &self.drf
    }

    /// δ(k). Counts above `K` saturate at δ(K).
    pub fn delta(&self, k: usize) -> f64 {
        self.levels[k.min(self.levels.len() - 1)]
    }
}

/// δ(|Ψ_V(t)|) at sink `t`.
pub fn sink_distortion(
    flow: &RainbowFlow,
    net: &Network,
    t: NodeId,
    model: &DistortionModel,
) -> Result<f64, FlowError> {
    let i = net.node_index(t).ok_or(FlowError::UnknownNode(t))?;
    if !net.is_sink_at(i) {
        return Err(FlowError::InvalidFlow(format!("node {t} is not a sink")));
    }
    Ok(model.delta(node_spectrum(flow, net, t)?.len()))
}

/// |T|⁻¹ Σ_t p_t δ(|Ψ_V(t)|); zero when there are no sinks.
pub fn average_distortion(flow: &RainbowFlow, net: &Network, model: &DistortionModel) -> f64 {
    let q = rainbow_flow_vector(flow, net);
    average_distortion_of(&q, net, model)
}

/// Weighted average distortion for a given flow vector.
pub fn average_distortion_of(
    q: &RainbowFlowVector,
    net: &Network,
    model: &DistortionModel,
) -> f64 {
    if net.sinks().is_empty() {
        return 0.0;
    }
    let total: f64 = net
        .sinks()
        .iter()
        .map(|&t| {
            let p = net.sink_weight(t).expect("sink has a weight");
            p * model.delta(q.get(t).unwrap_or(0))
        })
        .sum();
    total / net.sinks().len() as f64
}

/// Structural problems with a flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowViolation {
    EmptyPath { path: usize },
    Gap { path: usize, position: usize },
    UnknownEdge { path: usize, from: NodeId, to: NodeId },
    NotFromSource { path: usize, node: NodeId },
    ColorOutOfRange { path: usize, color: Color },
}

/// Lists every structural violation; empty iff the flow is valid in `net`.
pub fn validate_flow(flow: &RainbowFlow, net: &Network) -> Vec<FlowViolation> {
    let mut out = Vec::new();
    for (i, cp) in flow.paths.iter().enumerate() {
        if cp.color == 0 || cp.color as usize > flow.descriptions {
            out.push(FlowViolation::ColorOutOfRange {
                path: i,
                color: cp.color,
            });
        }
        let edges = cp.path.edges();
        if edges.is_empty() {
            out.push(FlowViolation::EmptyPath { path: i });
            continue;
        }
        for (j, w) in edges.windows(2).enumerate() {
            if w[0].1 != w[1].0 {
                out.push(FlowViolation::Gap {
                    path: i,
                    position: j + 1,
                });
            }
        }
        for &(a, b) in edges {
            if net.edge_index(a, b).is_none() {
                out.push(FlowViolation::UnknownEdge {
                    path: i,
                    from: a,
                    to: b,
                });
            }
        }
        let origin = edges[0].0;
        if !net.sources().contains(&origin) {
            out.push(FlowViolation::NotFromSource {
                path: i,
                node: origin,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::fig1_network;

    pub(crate) fn fig1_flow() -> RainbowFlow {
        let mut f = RainbowFlow::empty(2);
        f.push(1, FlowPath::through(&[1, 2, 4]));
        f.push(1, FlowPath::through(&[1, 2, 5]));
        f.push(2, FlowPath::through(&[1, 3, 4]));
        f.push(2, FlowPath::through(&[1, 3, 5]));
        f
    }

    fn set(xs: &[Color]) -> BTreeSet<Color> {
        xs.iter().copied().collect()
    }

    #[test]
    fn fixture_edge_spectra() {
        let net = fig1_network(1.0);
        let f = fig1_flow();
        for (a, b) in [(1, 2), (2, 4), (2, 5)] {
            assert_eq!(edge_spectrum(&f, &net, a, b).unwrap(), set(&[1]));
        }
        for (a, b) in [(1, 3), (3, 4), (3, 5)] {
            assert_eq!(edge_spectrum(&f, &net, a, b).unwrap(), set(&[2]));
        }
        assert_eq!(
            edge_spectrum(&RainbowFlow::empty(2), &net, 1, 2).unwrap(),
            set(&[])
        );
        assert_eq!(
            edge_spectrum(&f, &net, 4, 5),
            Err(FlowError::UnknownEdge(4, 5))
        );
    }

    #[test]
    fn duplicated_color_is_singleton() {
        let net = fig1_network(1.0);
        let mut f = RainbowFlow::empty(2);
        f.push(1, FlowPath::through(&[1, 2, 4]));
        f.push(1, FlowPath::through(&[1, 2, 5]));
        assert_eq!(edge_spectrum(&f, &net, 1, 2).unwrap(), set(&[1]));
    }

    #[test]
    fn fixture_node_spectra() {
        let net = fig1_network(1.0);
        let f = fig1_flow();
        assert_eq!(node_spectrum(&f, &net, 4).unwrap(), set(&[1, 2]));
        assert_eq!(node_spectrum(&f, &net, 5).unwrap(), set(&[1, 2]));
        assert_eq!(node_spectrum(&f, &net, 2).unwrap(), set(&[1]));
        assert_eq!(node_spectrum(&f, &net, 3).unwrap(), set(&[2]));
        assert_eq!(node_spectrum(&f, &net, 1).unwrap(), set(&[1, 2]));
        let mut partial = RainbowFlow::empty(2);
        partial.push(1, FlowPath::through(&[1, 2]));
        assert_eq!(node_spectrum(&partial, &net, 4).unwrap(), set(&[]));
        assert_eq!(node_spectrum(&f, &net, 9), Err(FlowError::UnknownNode(9)));
    }

    #[test]
    fn admissibility() {
        let net = fig1_network(1.0);
        let desc = DescriptionSet::new(2, 1.0).unwrap();
        assert!(is_admissible(&fig1_flow(), &net, &desc).is_admissible());
        assert!(is_admissible(&RainbowFlow::empty(2), &net, &desc).is_admissible());

        let mut f = fig1_flow();
        f.push(2, FlowPath::through(&[1, 2]));
        let rep = is_admissible(&f, &net, &desc);
        assert!(!rep.is_admissible());
        assert_eq!(rep.violations.len(), 1);
        let v = &rep.violations[0];
        assert_eq!((v.from, v.to, v.spectrum_size), (1, 2, 2));
    }

    #[test]
    fn flow_vector() {
        let net = fig1_network(1.0);
        let q = rainbow_flow_vector(&fig1_flow(), &net);
        assert_eq!(q.counts(), vec![1, 1, 2, 2]);
        let q0 = rainbow_flow_vector(&RainbowFlow::empty(2), &net);
        assert_eq!(q0.counts(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn distortions() {
        let net = fig1_network(1.0);
        let f = fig1_flow();
        let (d, d12) = (0.4, 0.1);
        let model = DistortionModel::new(vec![1.0, d, d12], Drf::unit_gaussian()).unwrap();
        assert_eq!(sink_distortion(&f, &net, 4, &model).unwrap(), d12);
        assert_eq!(sink_distortion(&f, &net, 2, &model).unwrap(), d);
        assert_eq!(
            sink_distortion(&RainbowFlow::empty(2), &net, 2, &model).unwrap(),
            1.0
        );
        let avg = average_distortion(&f, &net, &model);
        assert!((avg - (2.0 * d12 + 2.0 * d) / 4.0).abs() < 1e-15);

        let card = DistortionModel::cardinality(2);
        assert!((average_distortion(&f, &net, &card) - 0.25).abs() < 1e-15);

        let flat = DistortionModel::new(vec![1.0, 1.0, 1.0], Drf::unit_gaussian()).unwrap();
        assert_eq!(average_distortion(&f, &net, &flat), 1.0);
        assert_eq!(average_distortion(&RainbowFlow::empty(2), &net, &flat), 1.0);
    }

    #[test]
    fn single_sink_average_matches_sink() {
        let net = Network::new(
            vec![1, 2],
            vec![crate::netgen::Edge {
                from: 1,
                to: 2,
                capacity: 1.0,
            }],
            vec![1],
            vec![2],
            None,
        )
        .unwrap();
        let mut f = RainbowFlow::empty(2);
        f.push(2, FlowPath::through(&[1, 2]));
        let model = DistortionModel::cardinality(2);
        assert_eq!(
            average_distortion(&f, &net, &model),
            sink_distortion(&f, &net, 2, &model).unwrap()
        );
    }

    #[test]
    fn model_validation() {
        let g = Drf::unit_gaussian();
        assert!(DistortionModel::new(vec![1.0, 0.5, 0.6], g.clone()).is_err());
        assert!(DistortionModel::new(vec![0.9, 0.5], g.clone()).is_err());
        assert!(DistortionModel::new(vec![1.0, -0.1], g.clone()).is_err());
        let bumpy = Drf::PiecewiseLinear {
            points: vec![(0.0, 1.0), (1.0, 0.9), (2.0, 0.2)],
        };
        assert!(DistortionModel::new(vec![1.0, 0.5], bumpy).is_err());
        assert!(g.check_convex_nonincreasing(10.0, 1000).is_ok());
        assert_eq!(g.eval(3.0), 2f64.powi(-6));
    }

    #[test]
    fn validation_findings() {
        let net = fig1_network(1.0);
        assert!(validate_flow(&fig1_flow(), &net).is_empty());

        let mut gap = RainbowFlow::empty(2);
        gap.push(1, FlowPath::from_edges(vec![(1, 2), (3, 4)]));
        assert!(validate_flow(&gap, &net)
            .iter()
            .any(|v| matches!(v, FlowViolation::Gap { path: 0, position: 1 })));

        let mut origin = RainbowFlow::empty(2);
        origin.push(1, FlowPath::through(&[2, 4]));
        assert_eq!(
            validate_flow(&origin, &net),
            vec![FlowViolation::NotFromSource { path: 0, node: 2 }]
        );

        let mut color = RainbowFlow::empty(2);
        color.push(3, FlowPath::through(&[1, 2]));
        color.push(1, FlowPath::through(&[1, 4]));
        let v = validate_flow(&color, &net);
        assert!(v.contains(&FlowViolation::ColorOutOfRange { path: 0, color: 3 }));
        assert!(v.contains(&FlowViolation::UnknownEdge {
            path: 1,
            from: 1,
            to: 4
        }));
    }

    #[test]
    fn flow_document_round_trip() {
        let f = fig1_flow();
        let back = RainbowFlow::from_json(2, &f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(RainbowFlow::from_json(2, r#"[{"color":1,"path":[1,2],"x":0}]"#).is_err());
    }
}
