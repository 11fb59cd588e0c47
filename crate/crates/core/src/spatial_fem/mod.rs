//! Structured meshes, continuous Lagrange spaces and spatial assembly.

mod assembly;
mod mesh;
mod space;

pub use assembly::{
    assemble_boundary_functional, assemble_load_vector, assemble_operator, assemble_traction_vector, Operator,
};
pub use mesh::{build_mesh, match_interface, Facet, MeshSpec, Side, SpatialMesh};
pub use space::{lagrange_1d, FunctionSpace, ShapeEval};
