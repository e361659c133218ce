//! Combinatorial engine for independently even (iocr-0) drawings of graphs
//! on the sphere and torus: parity schemes and their homology calculus, the
//! redrawing-move calculus, GF(2) feasibility solvers with certificates, and
//! exact small-graph genus via rotation systems.

pub mod embed;
pub mod gf2;
pub mod graph;
pub mod moves;
pub mod scheme;
pub mod solver;

pub use graph::{Bracer, EdgeId, EdgePair, Graph, VertexId};
pub use scheme::{Cycle, DrawingScheme, Hom2, ParityMatrix, RotationSystem};
