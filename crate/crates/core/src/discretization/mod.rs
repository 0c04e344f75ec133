//! Quadrature grids, kernel assembly and their CSV exchange format.

mod csv_io;
mod grid;
mod kernel;
pub(crate) mod rules;

pub use csv_io::{read_grid_csv, read_kernel_csv, read_weights, write_grid_csv, write_kernel_csv};
pub use grid::{
    cylinder_grid, cylinder_volume, sphere_grid, CylinderResolution, GridKind, Nodes,
    QuadratureGrid, Spacing, SphereResolution,
};
pub use kernel::{assemble_kernel, assemble_orbit_kernel, KernelMatrix, KernelSpec};
