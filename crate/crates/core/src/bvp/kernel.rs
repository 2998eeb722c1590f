use statrs::function::gamma::gamma;

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::series::Lattice;

/// Area of the unit sphere `S^(d-1)`.
pub fn sphere_area(d: usize) -> f64 {
    let df = d as f64;
    2.0 * std::f64::consts::PI.powf(df / 2.0) / gamma(df / 2.0)
}

/// A Cauchy kernel `C(x, y)` for the operator `D = Σ e_(k+1) ∂_k` on `R^d`, valued in `Cl_d`.
pub trait CauchyKernel: Sync {
    fn dim(&self) -> usize;

    /// Writes the `2^d` coefficients of `C(x, y)` into `out`.
    fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]);

    fn eval(&self, x: &[f64], y: &[f64]) -> Multivector {
        let d = self.dim();
        let mut out = vec![0.0; 1 << d];
        self.eval_into(x, y, &mut out);
        Multivector::from_coeffs(d, out).expect("kernel writes 2^d coefficients")
    }

    /// Principal-value integral of `C(x, ·)` over the cube of side `h` centred at `x`.
    fn self_cell_integral(&self, _x: &[f64], _h: f64) -> Multivector {
        Multivector::zero(self.dim())
    }

    /// Bound on the truncation error of one evaluation.
    fn tail_bound(&self, _x: &[f64], _y: &[f64]) -> f64 {
        0.0
    }
}

/// `C(x, y) = E(y - x)` with `E(z) = -z / (ω_d |z|^d)`, so that `D E = δ`.
#[derive(Debug, Clone, Copy)]
pub struct FlatKernel {
    dim: usize,
    scale: f64,
}

impl FlatKernel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("flat kernel needs dimension >= 2, got {dim}")));
        }
        Ok(Self {
            dim,
            scale: -1.0 / sphere_area(dim),
        })
    }

    /// Adds `E(z)` to `out`.
    #[inline]
    fn add_e(&self, z: &[f64], out: &mut [f64]) {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let mut rd = r2.powi(self.dim as i32 / 2);
        if self.dim % 2 == 1 {
            rd *= r2.sqrt();
        }
        let f = self.scale / rd;
        for (k, zk) in z.iter().enumerate() {
            out[1 << k] += f * zk;
        }
    }
}

impl CauchyKernel for FlatKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut z = [0.0; 16];
        for k in 0..self.dim {
            z[k] = y[k] - x[k];
        }
        self.add_e(&z[..self.dim], out);
    }
}

/// Periodized kernel `Σ_ω E(y - x + ω)` over a lattice of rank at most `d - 2`,
/// summed over the ball `|ω| <= radius`.
#[derive(Debug, Clone)]
pub struct TorusKernel {
    flat: FlatKernel,
    points: Vec<Vec<f64>>,
    lattice: Lattice,
    radius: f64,
}

impl TorusKernel {
    pub fn new(lattice: Lattice, radius: f64) -> Result<Self> {
        let d = lattice.ambient_dim();
        if lattice.rank() + 2 > d {
            return Err(Error::Unsupported(format!(
                "periodized kernel needs lattice rank <= d - 2, got rank {} in dimension {d}",
                lattice.rank()
            )));
        }
        let points = lattice
            .points_in_ball(radius)?
            .into_iter()
            .map(|p| p.point)
            .collect();
        Ok(Self {
            flat: FlatKernel::new(d)?,
            points,
            lattice,
            radius,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn terms(&self) -> usize {
        self.points.len()
    }
}

impl CauchyKernel for TorusKernel {
    fn dim(&self) -> usize {
        self.flat.dim
    }

    fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let d = self.flat.dim;
        let mut z = [0.0; 16];
        for w in &self.points {
            for k in 0..d {
                z[k] = y[k] - x[k] + w[k];
            }
            self.flat.add_e(&z[..d], out);
        }
    }

    /// Terms `ω, -ω` pair up: `|E(z + ω) + E(z - ω)| <= 2 |z| (d + 1) / (ω_d (|ω| - |z|)^d)`,
    /// so the omitted pairs are bounded by the lattice comparison integral with decay `d`.
    fn tail_bound(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.flat.dim;
        let zn = x.iter().zip(y).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
        let k = zn * (d as f64 + 1.0) / sphere_area(d);
        self.lattice.tail_bound(self.radius, k, d as f64, zn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{dirac_apply_fd, DiracVariant};

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn flat_kernel_values() {
        let k = FlatKernel::new(3).unwrap();
        let v = k.eval(&[0.0; 3], &[2.0, 0.0, 0.0]);
        assert!((v.coeff(1) + 2.0 / (4.0 * std::f64::consts::PI * 8.0)).abs() < 1e-15);
        let k2 = FlatKernel::new(2).unwrap();
        let v2 = k2.eval(&[0.0; 2], &[0.0, 0.5]);
        assert!((v2.coeff(2) + 0.5 / (2.0 * std::f64::consts::PI * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn flat_kernel_is_monogenic_off_the_diagonal() {
        for d in 2..=4 {
            let k = FlatKernel::new(d).unwrap();
            let x = vec![0.0; d];
            let y: Vec<f64> = (0..d).map(|i| 0.3 + 0.1 * i as f64).collect();
            let r = dirac_apply_fd(|p| k.eval(&x, p), &y, 1e-4, DiracVariant::Dirac);
            assert!(r.max_abs() < 1e-6, "d = {d}: {r:?}");
        }
    }

    #[test]
    fn torus_kernel_is_periodic() {
        let l = Lattice::new(3, vec![vec![3.0, 0.0, 0.0]]).unwrap();
        let k = TorusKernel::new(l, 300.0).unwrap();
        let x = [0.1, 0.2, -0.3];
        let y = [0.5, -0.4, 0.2];
        let y2 = [3.5, -0.4, 0.2];
        let a = k.eval(&x, &y);
        let b = k.eval(&x, &y2);
        assert!(a.distance(&b) <= 2.0 * k.tail_bound(&x, &y2) + 1e-12);
        assert!(k.tail_bound(&x, &y) < 1e-3);
    }

    #[test]
    fn torus_rank_limit() {
        let l = Lattice::coordinate(3, &[0, 1], 1.0).unwrap();
        assert!(matches!(TorusKernel::new(l, 10.0), Err(Error::Unsupported(_))));
    }
}
