//! Clifford algebra `Cl_n` with `e_i e_j + e_j e_i = -2 δ_ij`.

mod dirac;
mod multivector;
mod paravector;
mod spin;

pub use dirac::{dirac_apply_fd, laplacian_fd, DiracVariant};
pub use multivector::{blade_sign, grade, set_product_sign_mutation, Multivector, MAX_GENERATORS};
pub use paravector::Paravector;
pub use spin::SpinElement;
