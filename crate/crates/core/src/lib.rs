//! Dimer coverings of the radial graph of the square lattice with
//! impurities on the unit edges.
//!
//! Everything here works without `std`; the `dimer` crate adds file
//! formats, parallel drivers and the command-line tool.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chain;
pub mod covering;
pub mod forest;
pub mod geometry;
pub mod graph;
pub mod lattice;
pub mod linalg;
pub mod moves;
pub mod spanning;
pub mod spectral;

pub use geometry::{Coord, EdgeClass, VertexClass};
pub use lattice::{
    build_bowtie, build_cell_rectangle, build_cell_region, build_rectangle, build_triangular,
    class_graph, rooted_class_graph, ClassEdge, ClassGraph, Edge, EdgeId, Family, Lattice,
    LatticeError, OuterEdge, RootedClassGraph, VertexId,
};
