//! Vahlen matrices, Möbius actions on paravectors, the hypercomplex modular group
//! `Γ_p`, its congruence subgroups `Γ_p[N]`, and bounded enumeration.

mod group;
mod lattice_action;
mod vahlen;

pub use group::{
    enumerate_coset_reps, enumerate_group, extended_generators, gamma_p_generators,
    in_congruence_subgroup, EnumerationOptions, GroupWord, NormBound,
};
pub use lattice_action::LatticeAction;
pub use vahlen::{VahlenMatrix, VAHLEN_TOL};
