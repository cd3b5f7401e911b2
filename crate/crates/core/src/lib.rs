//! Rigidity workbench for block-and-hole graphs.

pub mod constructions;
pub mod error;
pub mod exec;
pub mod flow;
pub mod girth;
pub mod graph;
pub mod planar;
pub mod reduction;
pub mod rigidity;
pub mod sparsity;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{edge, Edge, Graph, VertexId, POLE_BASE};
pub use planar::{EdgeType, EmbeddedGraph, FaceGraph, Label, ProperCycle};
