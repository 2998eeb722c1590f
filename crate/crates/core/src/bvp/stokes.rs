use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bergman::{BergmanOptions, BergmanProjector};
use super::domain::VoxelDomain;
use super::field::Field;
use super::kernel::CauchyKernel;
use super::ops::{dirac_fd, divergence_fd, teodorescu, teodorescu_at, CellQuadrature};
use crate::clifford::Multivector;
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StokesOptions {
    pub bergman: BergmanOptions,
    /// Interior residuals are taken on cells at least this far from the boundary.
    pub interior_margin: f64,
    /// Relative singular-value cutoff of the gauged pressure system.
    pub pressure_cutoff_rel: f64,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            bergman: BergmanOptions {
                cutoff_rel: 1e-4,
                ..BergmanOptions::default()
            },
            interior_margin: 0.25,
            pressure_cutoff_rel: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesDiagnostics {
    pub h: f64,
    pub cells: usize,
    pub facets: usize,
    pub interior_cells: usize,
    pub condition: f64,
    /// `max |D_fd D_fd u + (1/η) D_fd p - F|` on interior cells.
    pub momentum: f64,
    /// `max |div_fd u|` on interior cells.
    pub divergence: f64,
    /// `max |u|` at facet centres, re-evaluated with sub-cell quadrature.
    pub boundary: f64,
    /// Largest non-vector part discarded from `T g`.
    pub non_vector: f64,
    /// Residual of the gauged pressure system.
    pub pressure_residual: f64,
    pub velocity_error: Option<f64>,
    pub pressure_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub u: Field,
    pub p: Field,
    pub diagnostics: StokesDiagnostics,
}

/// Solves `-Δu + (1/η) D p = F`, `div u = 0`, `u|_Γ = 0`.
///
/// The pressure solves `Re(Q p) = η Re(Q T F)` with zero mean; then
/// `u = T (Q T F - (1/η) Q p)`, of which the vector part is kept.
pub fn stokes_solve<K: CauchyKernel + ?Sized>(
    domain: &VoxelDomain,
    forcing: &Field,
    eta: f64,
    kernel: &K,
    opts: &StokesOptions,
) -> Result<StokesSolution> {
    check_dim(domain.dim(), kernel.dim())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("viscosity parameter must be positive, got {eta}")));
    }
    if forcing.len() != domain.cell_count() {
        return Err(Error::DimensionMismatch {
            expected: domain.cell_count(),
            found: forcing.len(),
        });
    }
    let projector = BergmanProjector::new(domain, kernel, opts.bergman)?;
    let n = domain.cell_count();

    let tf = teodorescu(domain, forcing, kernel)?;
    let qtf = projector.complement(&tf)?;

    let mut m = -projector.scalar_block();
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    let mut sys = DMatrix::zeros(n + 1, n);
    sys.view_mut((0, 0), (n, n)).copy_from(&m);
    sys.row_mut(n).fill(1.0 / n as f64);
    let mut rhs = DVector::zeros(n + 1);
    for (i, v) in qtf.values.iter().enumerate() {
        rhs[i] = eta * v.scalar_part();
    }
    let svd = sys.clone().svd(true, true);
    let eps = opts.pressure_cutoff_rel * svd.singular_values.max();
    let sol = svd.solve(&rhs, eps).map_err(|e| Error::Conditioning {
        condition: if e.is_empty() { f64::INFINITY } else { f64::NAN },
    })?;
    let pressure_residual = (&sys * &sol - &rhs).amax();
    let dim = domain.dim();
    let p = Field {
        values: sol.iter().map(|&v| Multivector::scalar(dim, v)).collect(),
        scalar: true,
    };

    let qp = projector.complement(&p)?;
    let g = qtf.sub(&qp.scale(1.0 / eta));
    let tg = teodorescu(domain, &g, kernel)?;
    let u = tg.grade_part(1);
    let interior = domain.cells_at_distance(opts.interior_margin);

    let du = dirac_fd(domain, &u);
    let ddu = dirac_fd(domain, &du);
    let dp = dirac_fd(domain, &p);
    let momentum = ddu.add(&dp.scale(1.0 / eta)).sub(forcing).max_norm_on(&interior);
    let divergence = divergence_fd(domain, &u).max_norm_on(&interior);
    let centres: Vec<Vec<f64>> = domain.facets().iter().map(|f| f.center.clone()).collect();
    let boundary = teodorescu_at(domain, &g, kernel, &centres, CellQuadrature::REFINED)?
        .iter()
        .map(|v| v.grade_part(1).norm())
        .fold(0.0, f64::max);
    let non_vector = tg.sub(&u).max_norm();

    Ok(StokesSolution {
        u,
        p,
        diagnostics: StokesDiagnostics {
            h: domain.h(),
            cells: n,
            facets: domain.facets().len(),
            interior_cells: interior.len(),
            condition: projector.condition(),
            momentum,
            divergence,
            boundary,
            non_vector,
            pressure_residual,
            velocity_error: None,
            pressure_error: None,
        },
    })
}

/// Divergence-free test flow on a box in the plane: stream function
/// `ψ = q_x(x)^2 q_y(y)^2` with `q(t) = (t - a)(b - t)`, velocity `(∂_y ψ, -∂_x ψ)`,
/// pressure `(x - x_m)^3 (y - y_m)` about the box centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedStokes {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

/// `q, q', q'', q'''` of `X = ((t - a)(b - t))^2`, returned as `[X, X', X'', X''']`.
fn profile(t: f64, a: f64, b: f64) -> [f64; 4] {
    let q = (t - a) * (b - t);
    let dq = a + b - 2.0 * t;
    [q * q, 2.0 * q * dq, 2.0 * dq * dq - 4.0 * q, -12.0 * dq]
}

impl ManufacturedStokes {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi }
    }

    fn centre(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }

    pub fn velocity(&self, x: &[f64]) -> Multivector {
        let px = profile(x[0], self.lo[0], self.hi[0]);
        let py = profile(x[1], self.lo[1], self.hi[1]);
        Multivector::vector(2, &[px[0] * py[1], -px[1] * py[0]]).expect("two components")
    }

    pub fn pressure(&self, x: &[f64]) -> f64 {
        let c = self.centre();
        (x[0] - c[0]).powi(3) * (x[1] - c[1])
    }

    /// `F = -Δu + (1/η) ∇p` as a vector.
    pub fn forcing(&self, x: &[f64], eta: f64) -> Multivector {
        let px = profile(x[0], self.lo[0], self.hi[0]);
        let py = profile(x[1], self.lo[1], self.hi[1]);
        let c = self.centre();
        let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
        let lap0 = px[2] * py[1] + px[0] * py[3];
        let lap1 = -(px[3] * py[0] + px[1] * py[2]);
        Multivector::vector(2, &[-lap0 + 3.0 * dx * dx * dy / eta, -lap1 + dx * dx * dx / eta])
            .expect("two components")
    }

    /// Fills the error fields of `sol.diagnostics` on cells at least `margin` inside.
    pub fn score(&self, domain: &VoxelDomain, sol: &mut StokesSolution, margin: f64) {
        let interior = domain.cells_at_distance(margin);
        let exact_u = Field::from_fn(domain, |x| self.velocity(x));
        let exact_p = Field::scalar_from_fn(domain, |x| self.pressure(x));
        let shift = &exact_p.mean() - &sol.p.mean();
        let shifted: Vec<Multivector> = sol.p.values.iter().map(|v| v + &shift).collect();
        let p = Field {
            values: shifted,
            scalar: true,
        };
        sol.diagnostics.velocity_error = Some(sol.u.sub(&exact_u).max_norm_on(&interior));
        sol.diagnostics.pressure_error = Some(p.sub(&exact_p).max_norm_on(&interior));
    }
}
