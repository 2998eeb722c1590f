//! Computational Clifford analysis.
//!
//! The crate is organised bottom-up:
//!
//! - [`clifford`]: dense multivectors over `Cl_n`, involutions, Pin/Spin actions and
//!   finite-difference Dirac operators.
//! - [`moebius`]: Vahlen matrices, Möbius actions, the hypercomplex modular group
//!   and bounded orbit/coset enumeration.
//! - [`kernels`]: exact rational representation of the monogenic Cauchy kernel and
//!   its derivatives, with symbolic Dirac application.
//! - [`series`]: lattice Eisenstein series with certified tails, twisted variants,
//!   hyperbolic Eisenstein/Poincaré series and manifold Cauchy kernels.
//! - [`bvp`]: voxel domains, Teodorescu/Cauchy transforms, the Bergman projection and
//!   the stationary Stokes pipeline.
//! - [`verify`]: the invariant suites exposed by the command line tool.

pub mod bvp;
pub mod clifford;
mod error;
pub mod kernels;
pub mod moebius;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
