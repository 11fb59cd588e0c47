//! Multirate space-time Galerkin solvers for coupled evolution problems.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod problems;
pub mod quadrature;
pub mod slab_system;
pub mod spatial_fem;
pub mod temporal_mesh;

pub use error::{Error, Result};
pub use linalg::{CsrMatrix, SparseLu};
pub use slab_system::{march, MarchSummary, Observer, ProblemSpec, SlabSolution};
pub use temporal_mesh::{DgOrder, TemporalHierarchy, TemporalKind};
