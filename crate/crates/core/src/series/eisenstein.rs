use serde::{Deserialize, Serialize};

use super::lattice::{dot, Lattice};
use super::sum::{lattice_sum, SeriesResult, TailModel};
use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::kernels::{cauchy_kernel_q0, q_m, CompiledFunction, MultiIndex};

/// Points closer than this to a singularity are rejected.
pub const POLE_TOL: f64 = 1e-9;

/// Sign character `ω = Σ k_i ω_i -> (-1)^(Σ_{i in mask} k_i)` selecting a spinor bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BundleCharacter {
    pub mask: u64,
}

impl BundleCharacter {
    /// Twist on the first `l + 1` lattice coordinates.
    pub fn split(l: usize) -> Self {
        Self {
            mask: (1u64 << (l + 1)) - 1,
        }
    }

    pub fn from_mask(mask: u64) -> Self {
        Self { mask }
    }

    pub fn trivial() -> Self {
        Self { mask: 0 }
    }

    /// All `2^rank` characters of a rank-`rank` lattice.
    pub fn all(rank: usize) -> Vec<Self> {
        (0..1u64 << rank).map(Self::from_mask).collect()
    }

    pub fn is_twisted(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub fn sign(&self, k: &[i64]) -> f64 {
        let s: i64 = k
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_twisted(*i))
            .map(|(_, v)| v.rem_euclid(2))
            .sum();
        if s % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn check(&self, rank: usize) -> Result<()> {
        if rank < 64 && self.mask >> rank != 0 {
            return Err(Error::Domain(format!(
                "character mask {:#b} exceeds lattice rank {rank}",
                self.mask
            )));
        }
        Ok(())
    }
}

fn shifted(x: &[f64], w: &[f64]) -> Vec<f64> {
    x.iter().zip(w).map(|(a, b)| a + b).collect()
}

fn kernel_term(kernel: &CompiledFunction, y: &[f64]) -> Result<Multivector> {
    if dot(y, y).sqrt() < POLE_TOL {
        return Err(Error::Pole(format!("evaluation point {y:?} hits a lattice pole")));
    }
    kernel.evaluate(y)
}

fn check_point(lattice: &Lattice, x: &[f64]) -> Result<()> {
    if x.len() != lattice.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.ambient_dim(),
            found: x.len(),
        });
    }
    Ok(())
}

fn twisted_series(
    m: &MultiIndex,
    lattice: &Lattice,
    character: BundleCharacter,
    x: &[f64],
    radius: f64,
) -> Result<SeriesResult> {
    check_point(lattice, x)?;
    let dim = lattice.ambient_dim();
    let r = lattice.rank();
    character.check(r)?;
    if r > 0 && (m.order() as usize) < r + 1 {
        return Err(Error::Domain(format!(
            "series needs |m| >= {} on a rank-{r} lattice, got |m| = {}",
            r + 1,
            m.order()
        )));
    }
    let q = q_m(m, dim)?;
    let decay = -q.homogeneity_degree().unwrap_or(-((dim - 1) as i64 + m.order() as i64)) as f64;
    let tail = TailModel {
        constant: q.unit_sphere_bound(),
        decay,
        x_norm: dot(x, x).sqrt(),
    };
    let kernel = q.compile();
    lattice_sum(lattice, q.n(), radius, Some(tail), |p| {
        let t = kernel_term(&kernel, &shifted(x, &p.point))?;
        Ok(t.scale(character.sign(&p.coeffs)))
    })
}

/// `ε_m(x) = Σ_ω q_m(x + ω)` truncated at `|ω| <= radius`.
pub fn eisenstein_epsilon(
    m: &MultiIndex,
    lattice: &Lattice,
    x: &[f64],
    radius: f64,
) -> Result<SeriesResult> {
    twisted_series(m, lattice, BundleCharacter::trivial(), x, radius)
}

/// `Σ_ω χ(ω) q_m(x + ω)` for a sign character `χ`.
pub fn eisenstein_twisted(
    m: &MultiIndex,
    lattice: &Lattice,
    character: BundleCharacter,
    x: &[f64],
    radius: f64,
) -> Result<SeriesResult> {
    twisted_series(m, lattice, character, x, radius)
}

/// `Σ_ω q_0(x - y + ω)`, the Cauchy kernel of the torus `R^(n+1) / Λ`.
pub fn torus_cauchy_kernel(
    lattice: &Lattice,
    x: &[f64],
    y: &[f64],
    radius: f64,
) -> Result<SeriesResult> {
    check_point(lattice, x)?;
    check_point(lattice, y)?;
    let dim = lattice.ambient_dim();
    let n = dim - 1;
    let r = lattice.rank();
    if r + 1 > n {
        return Err(Error::Unsupported(format!(
            "torus kernel series diverges for rank {r} >= n = {n}"
        )));
    }
    let kernel = cauchy_kernel_q0(dim)?.compile();
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    // |q_0(u)| = |u|^-n exactly
    let tail = TailModel {
        constant: 1.0,
        decay: n as f64,
        x_norm: dot(&z, &z).sqrt(),
    };
    lattice_sum(lattice, n, radius, Some(tail), |p| {
        kernel_term(&kernel, &shifted(&z, &p.point))
    })
}
