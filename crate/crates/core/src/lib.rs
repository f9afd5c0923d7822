//! Random walks, loop-erased walks, Wilson's algorithm, Green's functions and
//! electrical quantities on the drifted lattice `Z x Z^d`, where the edge
//! between `(n, x)` and a neighbour `(n', x')` has conductance
//! `exp(lambda * max(n, n'))`.

pub mod electrical;
pub mod error;
pub mod experiments;
pub mod finite_box;
pub mod green;
pub mod lattice;
pub mod loop_erase;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod walk;
pub mod wilson;

pub use electrical::{EdgeFlow, FiniteNetwork, Sink, VertexFunction};
pub use error::{Error, Result};
pub use experiments::{EstimateRow, ExperimentConfig, OutputFormat};
pub use finite_box::FiniteBox;
pub use green::{GreenEstimate, GreenTable, LatticeGreen};
pub use lattice::{LatticeParams, Step, StepDistribution, Vertex};
pub use walk::Path;
pub use wilson::{Forest, Parent, TreeRoot};
