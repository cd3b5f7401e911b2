use thiserror::Error;

use crate::graph::{Edge, VertexId};

/// Errors raised by the rigidlab library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("edge {0:?} is not in the graph")]
    UnknownEdge(Edge),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("rotation system is not symmetric at edge {0:?}")]
    AsymmetricRotation(Edge),
    #[error("vertex {vertex} lists neighbour {neighbor} more than once")]
    RepeatedNeighbor { vertex: VertexId, neighbor: VertexId },
    #[error("rotation system is not planar: V - E + F = {euler} (expected 2)")]
    NonPlanar { euler: i64 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("face {0:?} is not bounded by a proper cycle")]
    ImproperFace(Vec<VertexId>),
    #[error("labelled face {0:?} does not match any traced face")]
    NoSuchFace(Vec<VertexId>),
    #[error("face {0:?} carries more than one label")]
    DuplicateLabel(Vec<VertexId>),
    #[error("non-triangular face {0:?} has no label")]
    UnlabelledFace(Vec<VertexId>),
    #[error("sequence {0:?} is not a proper cycle of the graph")]
    NotACycle(Vec<VertexId>),
    #[error("contracting {edge:?} would create a parallel edge through {shared}")]
    ParallelEdge { edge: Edge, shared: VertexId },
    #[error("contracting {edge:?} would pinch labelled face {face:?}")]
    PinchedFace { edge: Edge, face: Vec<VertexId> },
    #[error("edge {0:?} is not contractible")]
    NotContractible(Edge),
    #[error("graph has {actual} vertices, need at least {required}")]
    TooSmall { actual: usize, required: usize },
    #[error("graph has {actual} vertices, oracle bound is {bound}")]
    TooLarge { actual: usize, bound: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("simplicial discs overlap on face {0:?}")]
    OverlappingDiscs(Vec<VertexId>),
    #[error("face set is not a simplicial disc: {0}")]
    NotADisc(String),
    #[error("block-and-hole graph is not simple; parallel edges {0:?}")]
    Multigraph(Vec<Edge>),
    #[error("block attachment does not match face boundary {0:?}")]
    AttachmentMismatch(Vec<VertexId>),
    #[error("replacement block has chord {0:?} between boundary vertices outside the face graph")]
    ChordViolation(Edge),
    #[error("block is not minimally 3-rigid ({0})")]
    NonIsostaticBlock(String),
    #[error("face graph is not of type {expected}: found ({blocks},{holes})")]
    WrongType {
        expected: String,
        blocks: usize,
        holes: usize,
    },
    #[error("discus-and-hole graph is not (3,6)-tight")]
    NotTight,
    #[error("girth inequalities fail")]
    GirthFailed,
    #[error("not a triangulated sphere: {0}")]
    NotASphere(String),
    #[error("cycle {0:?} is not a critical separating cycle")]
    NotCritical(Vec<VertexId>),
    #[error("invalid vertex split: {0}")]
    InvalidSplit(String),
    #[error("degenerate placement: {0}")]
    DegeneratePlacement(String),
    #[error("certificate rejected at node {node}: {reason}")]
    Rejected { node: usize, reason: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
