//! Network instances: the capacitated DAG model, the random growth family
//! used in the experiments, the two-description fixture, and the JSON
//! document format.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NetworkError;

pub type NodeId = u32;

/// A directed link with a capacity in bits per source symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

/// A capacitated directed acyclic graph with designated sources and
/// weighted sinks.
///
/// Construction validates every structural invariant, so a `Network` value
/// is always acyclic, free of parallel edges and self-loops, and every sink
/// is reachable from some source.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    sources: Vec<NodeId>,
    sinks: Vec<NodeId>,
    sink_weights: BTreeMap<NodeId, f64>,

    index: HashMap<NodeId, usize>,
    edge_index: HashMap<(NodeId, NodeId), usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    topo: Vec<usize>,
    is_source: Vec<bool>,
    is_sink: Vec<bool>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.sources == other.sources
            && self.sinks == other.sinks
            && self.sink_weights == other.sink_weights
    }
}

impl Network {
    /// Builds and validates a network. Sources and sinks are stored sorted.
    /// Missing sink weights default to 1.
    pub fn new(
        nodes: Vec<NodeId>,
        edges: Vec<Edge>,
        mut sources: Vec<NodeId>,
        mut sinks: Vec<NodeId>,
        weights: Option<BTreeMap<NodeId, f64>>,
    ) -> Result<Self, NetworkError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, &v) in nodes.iter().enumerate() {
            if index.insert(v, i).is_some() {
                return Err(NetworkError::DuplicateNode(v));
            }
        }

        let n = nodes.len();
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            for end in [e.from, e.to] {
                if !index.contains_key(&end) {
                    return Err(NetworkError::UnknownNode {
                        from: e.from,
                        to: e.to,
                        missing: end,
                    });
                }
            }
            if e.from == e.to {
                return Err(NetworkError::SelfLoop(e.from));
            }
            if !(e.capacity >= 0.0 && e.capacity.is_finite()) {
                return Err(NetworkError::InvalidCapacity {
                    from: e.from,
                    to: e.to,
                    capacity: e.capacity,
                });
            }
            if edge_index.insert((e.from, e.to), i).is_some() {
                return Err(NetworkError::ParallelEdge(e.from, e.to));
            }
            out_edges[index[&e.from]].push(i);
            in_edges[index[&e.to]].push(i);
        }

        sources.sort_unstable();
        sinks.sort_unstable();
        for (role, set) in [("source", &sources), ("sink", &sinks)] {
            for w in set.windows(2) {
                if w[0] == w[1] {
                    return Err(NetworkError::DuplicateNode(w[0]));
                }
            }
            for v in set.iter() {
                if !index.contains_key(v) {
                    return Err(NetworkError::UnknownEndpoint { role, node: *v });
                }
            }
        }

        let mut sink_weights: BTreeMap<NodeId, f64> = sinks.iter().map(|&t| (t, 1.0)).collect();
        if let Some(w) = weights {
            for (t, p) in w {
                match sink_weights.get_mut(&t) {
                    None => return Err(NetworkError::WeightForNonSink(t)),
                    Some(slot) => {
                        if !(p > 0.0 && p.is_finite()) {
                            return Err(NetworkError::InvalidWeight(t, p));
                        }
                        *slot = p;
                    }
                }
            }
        }

        let topo = topological_order(&nodes, &edges, &index, &in_edges, &out_edges)?;

        let mut is_source = vec![false; n];
        for s in &sources {
            is_source[index[s]] = true;
        }
        let mut is_sink = vec![false; n];
        for t in &sinks {
            is_sink[index[t]] = true;
        }

        // every sink must be reachable from some source
        let mut seen = is_source.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| is_source[i]).collect();
        while let Some(u) = queue.pop_front() {
            for &ei in &out_edges[u] {
                let w = index[&edges[ei].to];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(&t) = sinks.iter().find(|t| !seen[index[t]]) {
            return Err(NetworkError::UnreachableSink(t));
        }

        Ok(Self {
            nodes,
            edges,
            sources,
            sinks,
            sink_weights,
            index,
            edge_index,
            in_edges,
            out_edges,
            topo,
            is_source,
            is_sink,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    pub fn sink_weights(&self) -> &BTreeMap<NodeId, f64> {
        &self.sink_weights
    }

    /// Weight of sink `t`, or `None` if `t` is not a sink.
    pub fn sink_weight(&self, t: NodeId) -> Option<f64> {
        self.sink_weights.get(&t).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Position of node `v` in [`Network::nodes`].
    pub fn node_index(&self, v: NodeId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Position of edge `(from, to)` in [`Network::edges`].
    pub fn edge_index(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.edge_index.get(&(from, to)).copied()
    }

    /// Indices of edges entering the node at position `v`.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    /// Indices of edges leaving the node at position `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    /// Node positions in a deterministic topological order (smallest
    /// position first among ready nodes).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn is_source_at(&self, v: usize) -> bool {
        self.is_source[v]
    }

    pub fn is_sink_at(&self, v: usize) -> bool {
        self.is_sink[v]
    }

    /// Node positions of the two endpoints of edge `e`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let edge = &self.edges[e];
        (self.index[&edge.from], self.index[&edge.to])
    }

    pub fn in_degree(&self, v: NodeId) -> Option<usize> {
        self.node_index(v).map(|i| self.in_edges[i].len())
    }

    /// Returns a copy of this network with `capacity` on edge `e`.
    pub fn with_capacity(&self, e: usize, capacity: f64) -> Result<Self, NetworkError> {
        let mut edges = self.edges.clone();
        edges[e].capacity = capacity;
        Network::new(
            self.nodes.clone(),
            edges,
            self.sources.clone(),
            self.sinks.clone(),
            Some(self.sink_weights.clone()),
        )
    }

    pub fn to_document(&self) -> NetworkDoc {
        NetworkDoc {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            sources: self.sources.clone(),
            sinks: self.sinks.clone(),
            sink_weights: Some(self.sink_weights.clone()),
        }
    }

    pub fn from_document(doc: NetworkDoc) -> Result<Self, NetworkError> {
        Network::new(doc.nodes, doc.edges, doc.sources, doc.sinks, doc.sink_weights)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDoc =
            serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
        Network::from_document(doc)
    }
}

fn topological_order(
    nodes: &[NodeId],
    edges: &[Edge],
    index: &HashMap<NodeId, usize>,
    in_edges: &[Vec<usize>],
    out_edges: &[Vec<usize>],
) -> Result<Vec<usize>, NetworkError> {
    let n = nodes.len();
    let mut indeg: Vec<usize> = in_edges.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &ei in &out_edges[u] {
            let w = index[&edges[ei].to];
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n)
            .filter(|&i| indeg[i] > 0)
            .map(|i| nodes[i])
            .min()
            .expect("some node is left over");
        return Err(NetworkError::Cycle(stuck));
    }
    Ok(order)
}

/// On-disk representation of a [`Network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
    pub sources: Vec<NodeId>,
    pub sinks: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink_weights: Option<BTreeMap<NodeId, f64>>,
}

pub fn save_network(net: &Network, path: impl AsRef<Path>) -> Result<(), NetworkError> {
    let path = path.as_ref();
    fs::write(path, net.to_json()).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Network::from_json(&text)
}

/// Parameters of the random growth model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGrowthParams", into = "RawGrowthParams")]
pub struct GrowthParams {
    n_nodes: usize,
    in_degree_draws: usize,
    c_max: u32,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrowthParams {
    n_nodes: usize,
    in_degree_draws: usize,
    c_max: u32,
    seed: u64,
}

impl TryFrom<RawGrowthParams> for GrowthParams {
    type Error = NetworkError;

    fn try_from(raw: RawGrowthParams) -> Result<Self, Self::Error> {
        GrowthParams::new(raw.n_nodes, raw.in_degree_draws, raw.c_max, raw.seed)
    }
}

impl From<GrowthParams> for RawGrowthParams {
    fn from(p: GrowthParams) -> Self {
        RawGrowthParams {
            n_nodes: p.n_nodes,
            in_degree_draws: p.in_degree_draws,
            c_max: p.c_max,
            seed: p.seed,
        }
    }
}

impl GrowthParams {
    pub fn new(
        n_nodes: usize,
        in_degree_draws: usize,
        c_max: u32,
        seed: u64,
    ) -> Result<Self, NetworkError> {
        if n_nodes == 0 {
            return Err(NetworkError::InvalidParams("n_nodes must be at least 1"));
        }
        if in_degree_draws == 0 {
            return Err(NetworkError::InvalidParams("in_degree_draws must be at least 1"));
        }
        if c_max == 0 {
            return Err(NetworkError::InvalidParams("c_max must be at least 1"));
        }
        if n_nodes > NodeId::MAX as usize {
            return Err(NetworkError::InvalidParams("n_nodes exceeds the node id range"));
        }
        Ok(Self {
            n_nodes,
            in_degree_draws,
            c_max,
            seed,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn in_degree_draws(&self) -> usize {
        self.in_degree_draws
    }

    pub fn c_max(&self) -> u32 {
        self.c_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_nodes(self, n_nodes: usize) -> Result<Self, NetworkError> {
        GrowthParams::new(n_nodes, self.in_degree_draws, self.c_max, self.seed)
    }
}

/// Grows a random DAG: node `i` draws `m` parents uniformly with
/// replacement among nodes `0..i` (duplicates collapse to one edge), then
/// every edge receives a capacity drawn uniformly from `1..=c_max`.
///
/// Node 0 is the only source; every other node is a sink of weight 1. The
/// generator is ChaCha8 seeded from `params.seed`, and both draws reduce a
/// 64-bit output modulo the range size, so results are identical across
/// platforms.
pub fn grow_dag(params: &GrowthParams) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_nodes;
    let mut edges = Vec::new();
    for i in 1..n {
        let mut parents: Vec<usize> = (0..params.in_degree_draws)
            .map(|_| (rng.next_u64() % i as u64) as usize)
            .collect();
        parents.sort_unstable();
        parents.dedup();
        for p in parents {
            edges.push(Edge {
                from: p as NodeId,
                to: i as NodeId,
                capacity: 0.0,
            });
        }
    }
    for e in &mut edges {
        e.capacity = (1 + rng.next_u64() % u64::from(params.c_max)) as f64;
    }
    let nodes: Vec<NodeId> = (0..n as NodeId).collect();
    let sinks: Vec<NodeId> = (1..n as NodeId).collect();
    Network::new(nodes, edges, vec![0], sinks, None).expect("growth model yields a valid DAG")
}

/// The five-node two-description example: source 1 feeds relays 2 and 3,
/// each of which feeds nodes 4 and 5. All links have capacity `capacity`.
pub fn fig1_network(capacity: f64) -> Network {
    assert!(capacity > 0.0, "fixture capacity must be positive");
    let edges = [(1, 2), (1, 3), (2, 4), (2, 5), (3, 4), (3, 5)]
        .into_iter()
        .map(|(from, to)| Edge { from, to, capacity })
        .collect();
    Network::new(vec![1, 2, 3, 4, 5], edges, vec![1], vec![2, 3, 4, 5], None)
        .expect("fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_growth() {
        let net = grow_dag(&GrowthParams::new(1, 3, 3, 7).unwrap());
        assert_eq!(net.node_count(), 1);
        assert_eq!(net.edge_count(), 0);
        assert!(net.sinks().is_empty());
        assert_eq!(net.sources(), &[0]);
    }

    #[test]
    fn two_nodes_collapse_duplicate_draws() {
        for seed in 0..5 {
            let net = grow_dag(&GrowthParams::new(2, 3, 3, seed).unwrap());
            assert_eq!(net.edge_count(), 1);
            assert_eq!((net.edges()[0].from, net.edges()[0].to), (0, 1));
        }
    }

    #[test]
    fn structural_scan_of_generated_dag() {
        let params = GrowthParams::new(50, 3, 3, 2024).unwrap();
        let net = grow_dag(&params);
        assert_eq!(net.node_count(), 50);
        for v in 1..50 {
            let d = net.in_degree(v).unwrap();
            assert!((1..=3).contains(&d), "node {v} has in-degree {d}");
        }
        assert_eq!(net.in_degree(0), Some(0));
        for e in net.edges() {
            assert!(e.from < e.to);
            assert!([1.0, 2.0, 3.0].contains(&e.capacity));
        }
        assert_eq!(net.topo_order().len(), 50);
        assert!(net.sink_weights().values().all(|&p| p == 1.0));
    }

    #[test]
    fn growth_is_deterministic_per_seed() {
        let p = GrowthParams::new(40, 3, 3, 11).unwrap();
        assert_eq!(grow_dag(&p), grow_dag(&p));
        let nets: Vec<Network> = (0..10).map(|s| grow_dag(&p.with_seed(s))).collect();
        for i in 0..nets.len() {
            for j in i + 1..nets.len() {
                assert_ne!(nets[i], nets[j], "seeds {i} and {j} collide");
            }
        }
    }

    #[test]
    fn invalid_growth_params() {
        assert!(GrowthParams::new(0, 3, 3, 0).is_err());
        assert!(GrowthParams::new(5, 0, 3, 0).is_err());
        assert!(GrowthParams::new(5, 3, 0, 0).is_err());
    }

    #[test]
    fn fixture_shape() {
        let net = fig1_network(1.0);
        assert_eq!(net.edge_count(), 6);
        assert!(net.edges().iter().all(|e| e.capacity == 1.0));
        let i4 = net.node_index(4).unwrap();
        let mut parents: Vec<NodeId> = net
            .in_edges(i4)
            .iter()
            .map(|&e| net.edges()[e].from)
            .collect();
        parents.sort_unstable();
        assert_eq!(parents, vec![2, 3]);
        let order: Vec<NodeId> = net.topo_order().iter().map(|&i| net.nodes()[i]).collect();
        assert_eq!(order, vec![1, 2, 3, 4, 5]);
        let net = fig1_network(2.5);
        assert!(net.edges().iter().all(|e| e.capacity == 2.5));
    }

    #[test]
    fn round_trip_fixture() {
        let net = fig1_network(1.0);
        let back = Network::from_json(&net.to_json()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn unknown_node_rejected() {
        let doc = r#"{"nodes":[1,2],"edges":[{"from":1,"to":3,"capacity":1.0}],"sources":[1],"sinks":[2]}"#;
        assert!(matches!(
            Network::from_json(doc),
            Err(NetworkError::UnknownNode { missing: 3, .. })
        ));
    }

    #[test]
    fn two_cycle_rejected() {
        let doc = r#"{"nodes":[1,2,3],"edges":[
            {"from":1,"to":2,"capacity":1.0},
            {"from":2,"to":3,"capacity":1.0},
            {"from":3,"to":2,"capacity":1.0}],"sources":[1],"sinks":[3]}"#;
        assert!(matches!(Network::from_json(doc), Err(NetworkError::Cycle(_))));
    }

    #[test]
    fn unknown_field_named_in_error() {
        let doc = r#"{"nodes":[1],"edges":[],"sources":[1],"sinks":[],"colour":3}"#;
        match Network::from_json(doc) {
            Err(NetworkError::Parse(msg)) => assert!(msg.contains("colour"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let doc = r#"{"nodes":[1,2],"edges":[{"from":1,"to":2}],"sources":[1],"sinks":[2]}"#;
        match Network::from_json(doc) {
            Err(NetworkError::Parse(msg)) => assert!(msg.contains("capacity"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_violations() {
        let e = |from, to, capacity| Edge { from, to, capacity };
        assert_eq!(
            Network::new(vec![1, 2], vec![e(1, 1, 1.0)], vec![1], vec![], None),
            Err(NetworkError::SelfLoop(1))
        );
        assert_eq!(
            Network::new(vec![1, 2], vec![e(1, 2, 1.0), e(1, 2, 2.0)], vec![1], vec![2], None),
            Err(NetworkError::ParallelEdge(1, 2))
        );
        assert!(matches!(
            Network::new(vec![1, 2], vec![e(1, 2, -1.0)], vec![1], vec![2], None),
            Err(NetworkError::InvalidCapacity { .. })
        ));
        assert_eq!(
            Network::new(vec![1, 2, 3], vec![e(1, 2, 1.0)], vec![1], vec![3], None),
            Err(NetworkError::UnreachableSink(3))
        );
        let mut w = BTreeMap::new();
        w.insert(2, 0.0);
        assert_eq!(
            Network::new(vec![1, 2], vec![e(1, 2, 1.0)], vec![1], vec![2], Some(w)),
            Err(NetworkError::InvalidWeight(2, 0.0))
        );
        let mut w = BTreeMap::new();
        w.insert(1, 2.0);
        assert_eq!(
            Network::new(vec![1, 2], vec![e(1, 2, 1.0)], vec![1], vec![2], Some(w)),
            Err(NetworkError::WeightForNonSink(1))
        );
    }

    #[test]
    fn weights_override_default() {
        let doc = r#"{"nodes":[1,2,3],"edges":[{"from":1,"to":2,"capacity":1},{"from":1,"to":3,"capacity":1}],
            "sources":[1],"sinks":[2,3],"sink_weights":{"3":2.5}}"#;
        let net = Network::from_json(doc).unwrap();
        assert_eq!(net.sink_weight(2), Some(1.0));
        assert_eq!(net.sink_weight(3), Some(2.5));
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("jnsc-netgen-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.json");
        let net = grow_dag(&GrowthParams::new(30, 3, 3, 5).unwrap());
        save_network(&net, &path).unwrap();
        assert_eq!(load_network(&path).unwrap(), net);
        fs::remove_dir_all(&dir).ok();
    }
}
