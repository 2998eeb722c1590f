//! Lattice and orbit series with truncation bounds.

mod eisenstein;
mod export;
mod hyperbolic;
mod lattice;
mod sum;

pub use eisenstein::{
    eisenstein_epsilon, eisenstein_twisted, torus_cauchy_kernel, BundleCharacter, POLE_TOL,
};
pub use export::{write_series_csv, SeriesRow};
pub use hyperbolic::{
    hecke_extrapolate, hyperbolic_cauchy_kernel, hyperbolic_eisenstein, poincare_series,
    q0_clifford, translation_lattice, HeckeExtrapolation, OrbitOptions, HECKE_SIGMAS,
};
pub use lattice::{Lattice, LatticePoint, GRAM_TOL};
pub use sum::{lattice_sum, CompensatedSum, SeriesResult, TailModel};
