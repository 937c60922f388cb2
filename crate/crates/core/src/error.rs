use thiserror::Error;

use crate::netgen::NodeId;

/// Problems found while building or loading a [`Network`](crate::netgen::Network).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("failed to parse network document: {0}")]
    Parse(String),
    #[error("node {0} is listed more than once")]
    DuplicateNode(NodeId),
    #[error("edge ({from}, {to}) references unknown node {missing}")]
    UnknownNode {
        from: NodeId,
        to: NodeId,
        missing: NodeId,
    },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) is listed more than once")]
    ParallelEdge(NodeId, NodeId),
    #[error("edge ({from}, {to}) has invalid capacity {capacity}")]
    InvalidCapacity {
        from: NodeId,
        to: NodeId,
        capacity: f64,
    },
    #[error("graph contains a cycle through node {0}")]
    Cycle(NodeId),
    #[error("{role} {node} is not a node of the network")]
    UnknownEndpoint { role: &'static str, node: NodeId },
    #[error("sink {0} has non-positive weight {1}")]
    InvalidWeight(NodeId, f64),
    #[error("weight given for node {0}, which is not a sink")]
    WeightForNonSink(NodeId),
    #[error("sink {0} is not reachable from any source")]
    UnreachableSink(NodeId),
    #[error("invalid growth parameters: {0}")]
    InvalidParams(&'static str),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Errors raised by the rainbow-flow machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(NodeId, NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid description set: {0}")]
    InvalidDescriptions(&'static str),
    #[error("invalid distortion model: {0}")]
    InvalidModel(String),
    #[error("flow is invalid: {0}")]
    InvalidFlow(String),
    #[error("failed to parse flow document: {0}")]
    Parse(String),
}

/// Errors from the integer-programming layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("instance too large for enumeration: {vars} edge variables (limit {limit})")]
    TooLarge { vars: usize, limit: usize },
    #[error("solution is not usable: {0}")]
    NoSolution(&'static str),
    #[error("inconsistent assignment: {0}")]
    Inconsistent(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Errors from the PET codec and its erasure-code layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PetError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("block length times rate must be an integer, got {0}")]
    NonIntegralColumns(f64),
    #[error("need at least {needed} source bits, got {got}")]
    InsufficientBits { needed: usize, got: usize },
    #[error("description {index} has {got} bits, expected {expected}")]
    PayloadLength {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("description index {0} is out of range")]
    BadIndex(usize),
    #[error("description index {0} supplied twice")]
    DuplicateIndex(usize),
    #[error("need {needed} shares to decode, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("invalid code parameters k={k}, n={n}")]
    InvalidCode { k: usize, n: usize },
    #[error("rows have unequal lengths")]
    RaggedRows,
    #[error("level {level} is {width} bits wide; no MDS code over {descriptions} rows has symbols that small")]
    SegmentTooNarrow {
        level: usize,
        width: usize,
        descriptions: usize,
    },
}

/// Errors from the code-profile optimizer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("distortion-rate function is not convex non-increasing near R={0}")]
    NonConvexDrf(f64),
    #[error("side distortion {d} is below 2^(-2C) = {floor} for C={capacity}")]
    Domain { d: f64, capacity: f64, floor: f64 },
}

/// Crate-level error for the experiment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Pet(#[from] PetError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
