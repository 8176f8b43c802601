//! Grids, fields, residual/Jacobian assembly and the radial reduction.

pub mod assemble;
pub mod coloring;
pub mod field;
pub mod grid;
pub mod local;
pub mod radial;
pub mod sparse;

pub use assemble::{assemble_jacobian, assemble_jacobian_with, assemble_residual, assemble_residual_with, node_residual, ResidualSystem};
pub use field::Field;
pub use grid::{Grid, Layout};
pub use local::{graph_geometry, node_jet, sup_gradient, NodeJet};
pub use radial::{radial_reduce, RadialODE};
pub use sparse::SparseMatrix;
