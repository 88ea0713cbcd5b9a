//! Bipartite graphs, four-graph systems, paths and string algebras.

mod graph;
mod strings;
mod system;

pub use graph::{BipartiteGraph, Parity, Vertex};
pub use strings::{
    canonical_signature, enumerate_paths, jones_projection_string, string_algebra, trace_on_strings, Direction,
    Path, PathBlock, PathSpace, StringAlgebra, DEFAULT_MAX_DEPTH,
};
pub use system::{FourGraphSystem, StartVertexSet, Step, BOTTOM, LEFT, RIGHT, TOP};
