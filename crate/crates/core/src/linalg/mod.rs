//! Sparse storage, Kronecker products, block layouts and the direct solver.

mod kron;
mod layout;
mod lu;
mod sparse;

pub use kron::kron;
pub use layout::{Block, BlockLayout};
pub use lu::{inf_norm, lu_solve, SparseLu, RESIDUAL_TOL};
pub use sparse::{CsrMatrix, TripletBuilder};
