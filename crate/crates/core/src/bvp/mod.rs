//! Voxel boundary-value layer: Teodorescu and Cauchy transforms, Bergman projection and
//! the Stokes solver, for `D = Σ e_(k+1) ∂_k` on `R^d`.

mod bergman;
mod domain;
mod field;
mod kernel;
mod ops;
mod stokes;

pub use bergman::{bergman_projection, BergmanOptions, BergmanProjector};
pub use domain::{Facet, Shape, VoxelDomain};
pub use field::{BoundaryTrace, Field};
pub use kernel::{sphere_area, CauchyKernel, FlatKernel, TorusKernel};
pub use ops::{
    borel_pompeiu_residual, borel_pompeiu_residual_at, cauchy_row, cauchy_transform, cauchy_transform_at, dirac_fd,
    divergence_fd, teodorescu, teodorescu_at, teodorescu_on, teodorescu_row,
    BorelPompeiuReport, CellQuadrature, BP_MIN_DEPTH,
};
pub use stokes::{stokes_solve, ManufacturedStokes, StokesDiagnostics, StokesOptions, StokesSolution};
