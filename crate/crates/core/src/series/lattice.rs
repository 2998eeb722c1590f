use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Smallest admissible Gram determinant.
pub const GRAM_TOL: f64 = 1e-12;

/// `Z ω_0 + ... + Z ω_(r-1)` in `R^(n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    ambient_dim: usize,
    generators: Vec<Vec<f64>>,
}

/// A lattice point with its integer coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub point: Vec<f64>,
    pub norm: f64,
}

impl Lattice {
    pub fn new(ambient_dim: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.len() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: g.len(),
            });
        }
        let lattice = Self {
            ambient_dim,
            generators,
        };
        if lattice.rank() > 0 {
            let det = lattice.gram().determinant();
            if det <= GRAM_TOL {
                return Err(Error::Domain(format!(
                    "lattice generators are linearly dependent (Gram determinant {det:e})"
                )));
            }
        }
        Ok(lattice)
    }

    /// Rank-0 lattice `{0}`.
    pub fn trivial(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            generators: Vec::new(),
        }
    }

    /// `scale * e_{axis}` for each listed coordinate axis.
    pub fn coordinate(ambient_dim: usize, axes: &[usize], scale: f64) -> Result<Self> {
        let generators = axes
            .iter()
            .map(|&a| {
                if a >= ambient_dim {
                    return Err(Error::Domain(format!("axis {a} out of range")));
                }
                let mut g = vec![0.0; ambient_dim];
                g[a] = scale;
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient_dim, generators)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let r = self.rank();
        DMatrix::from_fn(r, r, |i, j| dot(&self.generators[i], &self.generators[j]))
    }

    /// `r`-dimensional volume of a fundamental cell.
    pub fn covolume(&self) -> f64 {
        if self.rank() == 0 {
            return 1.0;
        }
        self.gram().determinant().sqrt()
    }

    /// `Σ k_i ω_i`.
    pub fn point(&self, k: &[i64]) -> Vec<f64> {
        let mut p = vec![0.0; self.ambient_dim];
        for (ki, g) in k.iter().zip(&self.generators) {
            for (pj, gj) in p.iter_mut().zip(g) {
                *pj += *ki as f64 * gj;
            }
        }
        p
    }

    /// All points of norm at most `radius`, sorted by norm and then by coordinates.
    pub fn points_in_ball(&self, radius: f64) -> Result<Vec<LatticePoint>> {
        if !(radius >= 0.0) {
            return Err(Error::Domain(format!("radius must be non-negative, got {radius}")));
        }
        let r = self.rank();
        let origin = LatticePoint {
            coeffs: vec![0; r],
            point: vec![0.0; self.ambient_dim],
            norm: 0.0,
        };
        if r == 0 {
            return Ok(vec![origin]);
        }
        let ginv = self
            .gram()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular Gram matrix".into()))?;
        // |k_i| <= R sqrt((G^-1)_ii) for every point of norm <= R
        let bounds: Vec<i64> = (0..r)
            .map(|i| (radius * ginv[(i, i)].sqrt() + 1e-9).floor() as i64)
            .collect();
        let limit = radius * radius * (1.0 + 1e-12) + 1e-300;
        let mut out = Vec::new();
        let mut k: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let p = self.point(&k);
            let n2 = dot(&p, &p);
            if n2 <= limit {
                out.push(LatticePoint {
                    coeffs: k.clone(),
                    point: p,
                    norm: n2.sqrt(),
                });
            }
            let mut i = 0;
            loop {
                if i == r {
                    out.sort_by(|a, b| a.norm.total_cmp(&b.norm).then_with(|| a.coeffs.cmp(&b.coeffs)));
                    return Ok(out);
                }
                if k[i] < bounds[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = -bounds[i];
                i += 1;
            }
        }
    }

    /// Sum of generator lengths; every point of a centred fundamental cell lies within
    /// half of it from the cell's lattice point.
    pub fn cell_diameter(&self) -> f64 {
        self.generators.iter().map(|g| dot(g, g).sqrt()).sum()
    }

    /// Upper bound for `Σ_{|ω| > R} K |x + ω|^(-s)`.
    ///
    /// Each lattice point owns its centred cell; on that cell `|x + ω| >= |z| - c`
    /// with `c = δ/2 + |x|`, so the sum is dominated by
    /// `K S_(r-1) / covol ∫_(R - δ/2)^∞ t^(r-1) (t - c)^(-s) dt`.
    /// Returns infinity when the radius is too small for the comparison to apply.
    pub fn tail_bound(&self, radius: f64, constant: f64, decay: f64, x_norm: f64) -> f64 {
        let r = self.rank();
        if r == 0 || constant == 0.0 {
            return 0.0;
        }
        if decay <= r as f64 {
            return f64::INFINITY;
        }
        let delta = self.cell_diameter();
        let c = 0.5 * delta + x_norm;
        let lower = radius - delta - x_norm;
        if lower <= 0.0 {
            return f64::INFINITY;
        }
        let rf = r as f64;
        let sphere = 2.0 * std::f64::consts::PI.powf(rf / 2.0) / gamma(rf / 2.0);
        let mut integral = 0.0;
        let mut binom = 1.0;
        for j in 0..r {
            let jf = j as f64;
            integral += binom * c.powi((r - 1 - j) as i32) * lower.powf(jf - decay + 1.0)
                / (decay - jf - 1.0);
            binom = binom * (rf - 1.0 - jf) / (jf + 1.0);
        }
        constant * sphere / self.covolume() * integral
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_ball_counts() {
        let z2 = Lattice::coordinate(2, &[0, 1], 1.0).unwrap();
        assert_eq!(z2.points_in_ball(0.0).unwrap().len(), 1);
        assert_eq!(z2.points_in_ball(1.5).unwrap().len(), 9);
        let brute = (-6i64..=6)
            .flat_map(|a| (-6i64..=6).map(move |b| (a, b)))
            .filter(|(a, b)| a * a + b * b <= 25)
            .count();
        assert_eq!(z2.points_in_ball(5.0).unwrap().len(), brute);
    }

    #[test]
    fn dependent_generators_rejected() {
        let r = Lattice::new(3, vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn tail_bound_shrinks_with_radius() {
        let l = Lattice::coordinate(3, &[0, 1], 1.0).unwrap();
        let a = l.tail_bound(10.0, 1.0, 6.0, 0.5);
        let b = l.tail_bound(20.0, 1.0, 6.0, 0.5);
        assert!(a.is_finite() && b < a);
        assert!(l.tail_bound(1.0, 1.0, 6.0, 0.5).is_infinite());
        assert!(l.tail_bound(10.0, 1.0, 2.0, 0.5).is_infinite());
    }

    #[test]
    fn tail_bound_dominates_brute_force_tail() {
        let l = Lattice::new(3, vec![vec![1.0, 0.2, 0.0], vec![0.0, 1.0, 0.3]]).unwrap();
        let x = [0.3, 0.1, 0.4];
        let xn = dot(&x, &x).sqrt();
        let s = 5.0;
        let r = 6.0;
        let tail: f64 = l
            .points_in_ball(200.0)
            .unwrap()
            .iter()
            .filter(|p| p.norm > r)
            .map(|p| {
                let y: Vec<f64> = p.point.iter().zip(&x).map(|(a, b)| a + b).collect();
                dot(&y, &y).sqrt().powf(-s)
            })
            .sum();
        let bound = l.tail_bound(r, 1.0, s, xn);
        assert!(tail <= bound, "{tail} > {bound}");
    }
}
