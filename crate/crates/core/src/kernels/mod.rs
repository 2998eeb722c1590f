//! Exact rational Cauchy kernels and their derivatives.

mod poly;
mod rational;

pub use poly::{Exponents, Poly};
pub use rational::{
    cauchy_kernel_q0, dirac_apply_symbolic, q_m, symbolic_partial, CompiledFunction,
    FunctionDocument, MultiIndex, RationalVectorFunction,
};
