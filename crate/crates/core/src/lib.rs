//! Heteroclinic networks of inhibitory-coupled logistic maps on directed
//! graphs: fixed-point enumeration, connection combinatorics, transition
//! matrix stability and direct simulation.

pub mod dynamics;
pub mod error;
pub mod export;
pub mod graph;
pub mod linalg;
pub mod network;
pub mod stability;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{make_ring, ActiveSet, CouplingGraph, GraphSpec};
pub use network::{build_network, enumerate_cycles, CycleDescriptor, FixedPoint, HetNetwork};
