use rayon::prelude::*;

use super::domain::{Facet, VoxelDomain};
use super::field::{BoundaryTrace, Field};
use super::kernel::CauchyKernel;
use crate::clifford::{blade_sign, dirac_apply_fd, DiracVariant, Multivector};
use crate::error::{check_dim, Result};

/// Cells at least this deep are used for Borel-Pompeiu residuals.
pub const BP_MIN_DEPTH: usize = 3;

/// Dense blade-product table for `Cl_n`.
#[derive(Debug, Clone)]
pub(crate) struct BladeTable {
    blades: usize,
    signs: Vec<f64>,
}

impl BladeTable {
    pub(crate) fn new(n: usize) -> Self {
        let blades = 1 << n;
        let signs = (0..blades * blades)
            .map(|k| blade_sign(k / blades, k % blades))
            .collect();
        Self { blades, signs }
    }

    /// `out += s · a · b`.
    #[inline]
    pub(crate) fn mul_add(&self, a: &[f64], b: &[f64], s: f64, out: &mut [f64]) {
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            let row = &self.signs[i * self.blades..(i + 1) * self.blades];
            for (j, &bj) in b.iter().enumerate() {
                out[i ^ j] += s * row[j] * ai * bj;
            }
        }
    }

    /// Real matrix of `v -> a v`, row `c`, column `b`.
    pub(crate) fn left_matrix(&self, a: &[f64]) -> Vec<f64> {
        let n = self.blades;
        let mut m = vec![0.0; n * n];
        for b in 0..n {
            for c in 0..n {
                let ai = c ^ b;
                m[c * n + b] = self.signs[ai * n + b] * a[ai];
            }
        }
        m
    }
}

/// Sub-cell refinement for the Teodorescu transform at off-grid points.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellQuadrature {
    /// Cells whose centre lies within `near * h` of the target are subdivided.
    pub near: f64,
    /// Subdivisions per axis for near cells.
    pub sub: usize,
    /// Subdivide near cells towards the target instead of uniformly.
    pub adaptive: bool,
}

impl CellQuadrature {
    pub const MIDPOINT: Self = Self {
        near: 0.0,
        sub: 1,
        adaptive: false,
    };
    pub const REFINED: Self = Self {
        near: 3.0,
        sub: 4,
        adaptive: false,
    };
    pub const ADAPTIVE: Self = Self {
        near: 3.0,
        sub: 2,
        adaptive: true,
    };
}

/// Deepest bisection level of the adaptive cell rule.
const ADAPTIVE_LEVELS: u32 = 10;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `(T f)(x_i) = -Σ_(j != i) C(x_i, y_j) f(y_j) h^d` minus the self-cell term, at the listed cells.
pub fn teodorescu_on<K: CauchyKernel + ?Sized>(
    domain: &VoxelDomain,
    f: &Field,
    kernel: &K,
    targets: &[usize],
) -> Result<Vec<Multivector>> {
    check_dim(domain.dim(), kernel.dim())?;
    let n = domain.dim();
    let table = BladeTable::new(n);
    let vol = domain.cell_volume();
    let h = domain.h();
    Ok(targets
        .par_iter()
        .map(|&i| {
            let x = domain.center(i);
            let mut acc = vec![0.0; 1 << n];
            let mut buf = vec![0.0; 1 << n];
            for (j, y) in domain.centers().iter().enumerate() {
                if j == i {
                    continue;
                }
                kernel.eval_into(x, y, &mut buf);
                table.mul_add(&buf, f.values[j].coeffs(), -vol, &mut acc);
            }
            let own = kernel.self_cell_integral(x, h);
            table.mul_add(own.coeffs(), f.values[i].coeffs(), -1.0, &mut acc);
            Multivector::from_coeffs(n, acc).expect("2^n coefficients")
        })
        .collect())
}

/// `T f` at every cell centre.
pub fn teodorescu<K: CauchyKernel + ?Sized>(domain: &VoxelDomain, f: &Field, kernel: &K) -> Result<Field> {
    let all: Vec<usize> = (0..domain.cell_count()).collect();
    Ok(Field {
        values: teodorescu_on(domain, f, kernel, &all)?,
        scalar: false,
    })
}

/// Quadrature nodes and weights for one cell, `f` taken constant on the cell.
fn cell_nodes(center: &[f64], h: f64, x: &[f64], q: CellQuadrature) -> Vec<(Vec<f64>, f64)> {
    let d = center.len();
    if q.sub <= 1 || dist(center, x) > q.near * h {
        return vec![(center.to_vec(), h.powi(d as i32))];
    }
    if q.adaptive {
        return adaptive_nodes(center, h, x);
    }
    let s = h / q.sub as f64;
    let total = q.sub.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let p = center
                .iter()
                .map(|c| {
                    let i = k % q.sub;
                    k /= q.sub;
                    c - 0.5 * h + (i as f64 + 0.5) * s
                })
                .collect();
            (p, s.powi(d as i32))
        })
        .collect()
}

/// Tensor 2-point Gauss on sub-cubes bisected while `side / distance > 1/2`.
fn adaptive_nodes(center: &[f64], h: f64, x: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let d = center.len();
    let (node, _) = GAUSS[1][1];
    let mut out = Vec::new();
    let mut stack = vec![(center.to_vec(), h, 0u32)];
    while let Some((c, s, level)) = stack.pop() {
        // distance from x to the sub-cube, zero if inside or on it
        let gap = c
            .iter()
            .zip(x)
            .map(|(ci, xi)| ((ci - xi).abs() - 0.5 * s).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt();
        if gap < s && level < ADAPTIVE_LEVELS {
            for k in 0..1usize << d {
                let cc = c
                    .iter()
                    .enumerate()
                    .map(|(i, ci)| ci + if k >> i & 1 == 1 { 0.25 * s } else { -0.25 * s })
                    .collect();
                stack.push((cc, 0.5 * s, level + 1));
            }
            continue;
        }
        let w = (0.5 * s).powi(d as i32);
        for k in 0..1usize << d {
            let p = c
                .iter()
                .enumerate()
                .map(|(i, ci)| ci + 0.5 * s * if k >> i & 1 == 1 { node } else { -node })
                .collect();
            out.push((p, w));
        }
    }
    out
}

/// Row of the Teodorescu transform at an off-grid point: `(T f)(x) = Σ_j w_j f_j`.
pub fn teodorescu_row<K: CauchyKernel + ?Sized>(
    domain: &VoxelDomain,
    kernel: &K,
    x: &[f64],
    q: CellQuadrature,
) -> Vec<Multivector> {
    let n = domain.dim();
    let mut buf = vec![0.0; 1 << n];
    domain
        .centers()
        .iter()
        .map(|c| {
            let mut w = vec![0.0; 1 << n];
            for (p, vol) in cell_nodes(c, domain.h(), x, q) {
                kernel.eval_into(x, &p, &mut buf);
                for (wi, bi) in w.iter_mut().zip(&buf) {
                    *wi -= vol * bi;
                }
            }
            Multivector::from_coeffs(n, w).expect("2^n coefficients")
        })
        .collect()
}

/// `T f` at arbitrary points off the cell centres.
pub fn teodorescu_at<K: CauchyKernel + ?Sized>(
    domain: &VoxelDomain,
    f: &Field,
    kernel: &K,
    points: &[Vec<f64>],
    q: CellQuadrature,
) -> Result<Vec<Multivector>> {
    check_dim(domain.dim(), kernel.dim())?;
    let table = BladeTable::new(domain.dim());
    Ok(points
        .par_iter()
        .map(|x| {
            let row = teodorescu_row(domain, kernel, x, q);
            apply_row(&table, &row, &f.values)
        })
        .collect())
}

pub(crate) fn apply_row(table: &BladeTable, row: &[Multivector], vals: &[Multivector]) -> Multivector {
    let n = row.first().map_or(0, Multivector::n);
    let mut acc = vec![0.0; 1 << n];
    for (w, v) in row.iter().zip(vals) {
        table.mul_add(w.coeffs(), v.coeffs(), 1.0, &mut acc);
    }
    Multivector::from_coeffs(n, acc).expect("2^n coefficients")
}

const GAUSS: [&[(f64, f64)]; 3] = [
    &[(0.0, 2.0)],
    &[(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)],
    &[
        (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
        (0.0, 0.888_888_888_888_888_9),
        (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    ],
];

/// Facet moments `∫ C(x, y) dσ` and `∫ C(x, y) (y - c)_t dσ` per tangential axis,
/// by adaptive tensor Gauss quadrature.
fn facet_moments<K: CauchyKernel + ?Sized>(
    kernel: &K,
    x: &[f64],
    facet: &Facet,
    h: f64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = x.len();
    let b = 1 << d;
    let tangents: Vec<usize> = (0..d).filter(|&t| t != facet.axis).collect();
    let mut m0 = vec![0.0; b];
    let mut mt = vec![vec![0.0; b]; tangents.len()];
    let mut buf = vec![0.0; b];
    let mut stack = vec![(facet.center.clone(), h, 0u32)];
    while let Some((c, s, level)) = stack.pop() {
        let ratio = s / dist(&c, x).max(1e-300);
        if ratio > 0.25 && level < 12 {
            let half = 0.25 * s;
            for k in 0..1usize << tangents.len() {
                let mut cc = c.clone();
                for (bit, &t) in tangents.iter().enumerate() {
                    cc[t] += if k >> bit & 1 == 1 { half } else { -half };
                }
                stack.push((cc, 0.5 * s, level + 1));
            }
            continue;
        }
        let rule = if ratio <= 0.03 {
            GAUSS[0]
        } else if ratio <= 0.1 {
            GAUSS[1]
        } else {
            GAUSS[2]
        };
        let points = rule.len().pow(tangents.len() as u32);
        for mut k in 0..points {
            let mut y = c.clone();
            let mut w = 1.0;
            for &t in &tangents {
                let (node, wt) = rule[k % rule.len()];
                k /= rule.len();
                y[t] += 0.5 * s * node;
                w *= 0.5 * s * wt;
            }
            kernel.eval_into(x, &y, &mut buf);
            for (a, v) in m0.iter_mut().zip(&buf) {
                *a += w * v;
            }
            for (mi, &t) in mt.iter_mut().zip(&tangents) {
                let off = w * (y[t] - facet.center[t]);
                for (a, v) in mi.iter_mut().zip(&buf) {
                    *a += off * v;
                }
            }
        }
    }
    (m0, mt)
}

/// Row of the Cauchy transform at `x`: `(F g)(x) = Σ_f w_f g_f`.
///
/// The trace is reconstructed linearly on each facet from neighbouring facet values.
pub fn cauchy_row<K: CauchyKernel + ?Sized>(domain: &VoxelDomain, kernel: &K, x: &[f64]) -> Vec<Multivector> {
    let d = domain.dim();
    let h = domain.h();
    let table = BladeTable::new(d);
    let facets = domain.facets();
    let mut row = vec![vec![0.0; 1 << d]; facets.len()];
    for (fi, facet) in facets.iter().enumerate() {
        let normal = facet.normal(d);
        let (m0, mt) = facet_moments(kernel, x, facet, h);
        table.mul_add(&m0, normal.coeffs(), 1.0, &mut row[fi]);
        for (moment, &(_, lo, hi)) in mt.iter().zip(domain.facet_neighbors(fi)) {
            let mut wn = vec![0.0; 1 << d];
            table.mul_add(moment, normal.coeffs(), 1.0, &mut wn);
            let stencil: Vec<(usize, f64)> = match (lo, hi) {
                (Some(l), Some(u)) => vec![(u, 0.5 / h), (l, -0.5 / h)],
                (None, Some(u)) => vec![(u, 1.0 / h), (fi, -1.0 / h)],
                (Some(l), None) => vec![(fi, 1.0 / h), (l, -1.0 / h)],
                (None, None) => Vec::new(),
            };
            for (j, c) in stencil {
                for (a, v) in row[j].iter_mut().zip(&wn) {
                    *a += c * v;
                }
            }
        }
    }
    row.into_iter()
        .map(|w| Multivector::from_coeffs(d, w).expect("2^n coefficients"))
        .collect()
}

/// `(F g)(x) = ∫_Γ C(x, y) n(y) g(y) dσ(y)` at arbitrary points off `Γ`.
pub fn cauchy_transform_at<K: CauchyKernel + ?Sized>(
    domain: &VoxelDomain,
    g: &BoundaryTrace,
    kernel: &K,
    points: &[Vec<f64>],
) -> Result<Vec<Multivector>> {
    check_dim(domain.dim(), kernel.dim())?;
    let table = BladeTable::new(domain.dim());
    Ok(points
        .par_iter()
        .map(|x| apply_row(&table, &cauchy_row(domain, kernel, x), &g.values))
        .collect())
}

/// `F g` at every cell centre.
pub fn cauchy_transform<K: CauchyKernel + ?Sized>(
    domain: &VoxelDomain,
    g: &BoundaryTrace,
    kernel: &K,
) -> Result<Field> {
    Ok(Field {
        values: cauchy_transform_at(domain, g, kernel, domain.centers())?,
        scalar: false,
    })
}

/// Borel-Pompeiu check `F(tr f) + T(D f) - f` on deep cells.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BorelPompeiuReport {
    pub h: f64,
    /// Max norm of the defect over the measured points.
    pub residual: f64,
    pub points_measured: usize,
    /// Minimum cell depth of the measured points, 0 for off-grid probes.
    pub min_depth: usize,
}

/// `max |F(tr f) + T(D_fd f) - f|` over cells of depth at least `min_depth`.
///
/// `D f` is taken by central differences of `f` with step `h` at each cell centre.
pub fn borel_pompeiu_residual<K, F>(
    domain: &VoxelDomain,
    f: F,
    kernel: &K,
    min_depth: usize,
) -> Result<BorelPompeiuReport>
where
    K: CauchyKernel + ?Sized,
    F: Fn(&[f64]) -> Multivector + Sync,
{
    check_dim(domain.dim(), kernel.dim())?;
    let h = domain.h();
    let trace = BoundaryTrace::from_fn(domain, &f);
    let df = Field {
        values: domain
            .centers()
            .par_iter()
            .map(|c| dirac_apply_fd(&f, c, h, DiracVariant::Dirac))
            .collect(),
        scalar: false,
    };
    let targets = domain.interior_cells(min_depth);
    let points: Vec<Vec<f64>> = targets.iter().map(|&i| domain.center(i).to_vec()).collect();
    let fg = cauchy_transform_at(domain, &trace, kernel, &points)?;
    let tdf = teodorescu_on(domain, &df, kernel, &targets)?;
    let residual = points
        .iter()
        .zip(fg.iter().zip(&tdf))
        .map(|(x, (a, b))| (&(a + b) - &f(x)).norm())
        .fold(0.0, f64::max);
    Ok(BorelPompeiuReport {
        h,
        residual,
        points_measured: targets.len(),
        min_depth,
    })
}

/// `max |F(tr f) + T(D_fd f) - f|` at arbitrary points off the cell centres.
///
/// Points that stay fixed under refinement, such as coarse-grid vertices, give a
/// residual comparable across levels.
pub fn borel_pompeiu_residual_at<K, F>(
    domain: &VoxelDomain,
    f: F,
    kernel: &K,
    points: &[Vec<f64>],
) -> Result<BorelPompeiuReport>
where
    K: CauchyKernel + ?Sized,
    F: Fn(&[f64]) -> Multivector + Sync,
{
    check_dim(domain.dim(), kernel.dim())?;
    let h = domain.h();
    let trace = BoundaryTrace::from_fn(domain, &f);
    let df = Field {
        values: domain
            .centers()
            .par_iter()
            .map(|c| dirac_apply_fd(&f, c, h, DiracVariant::Dirac))
            .collect(),
        scalar: false,
    };
    let fg = cauchy_transform_at(domain, &trace, kernel, points)?;
    let tdf = teodorescu_at(domain, &df, kernel, points, CellQuadrature::REFINED)?;
    let residual = points
        .iter()
        .zip(fg.iter().zip(&tdf))
        .map(|(x, (a, b))| (&(a + b) - &f(x)).norm())
        .fold(0.0, f64::max);
    Ok(BorelPompeiuReport {
        h,
        residual,
        points_measured: points.len(),
        min_depth: 0,
    })
}

fn partial_fd(domain: &VoxelDomain, f: &Field, cell: usize, axis: usize) -> Multivector {
    let d = domain.dim();
    let mut off = vec![0i64; d];
    off[axis] = 1;
    let plus = domain.neighbor(cell, &off);
    off[axis] = -1;
    let minus = domain.neighbor(cell, &off);
    let h = domain.h();
    let v = &f.values;
    match (minus, plus) {
        (Some(m), Some(p)) => (&v[p] - &v[m]).scale(0.5 / h),
        (None, Some(p)) => (&v[p] - &v[cell]).scale(1.0 / h),
        (Some(m), None) => (&v[cell] - &v[m]).scale(1.0 / h),
        (None, None) => Multivector::zero(d),
    }
}

/// `D f = Σ e_(k+1) ∂_k f` by grid differences: central inside, one-sided at the boundary.
pub fn dirac_fd(domain: &VoxelDomain, f: &Field) -> Field {
    let d = domain.dim();
    Field {
        values: (0..domain.cell_count())
            .map(|c| {
                let mut acc = Multivector::zero(d);
                for axis in 0..d {
                    acc += &(&Multivector::basis_vector(d, axis + 1) * &partial_fd(domain, f, c, axis));
                }
                acc
            })
            .collect(),
        scalar: false,
    }
}

/// `div u = Σ_k ∂_k u_k` of the grade-1 part, `u_k` the coefficient of `e_(k+1)`.
pub fn divergence_fd(domain: &VoxelDomain, u: &Field) -> Field {
    let d = domain.dim();
    Field {
        values: (0..domain.cell_count())
            .map(|c| {
                let s: f64 = (0..d).map(|k| partial_fd(domain, u, c, k).coeff(1 << k)).sum();
                Multivector::scalar(d, s)
            })
            .collect(),
        scalar: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::domain::Shape;
    use crate::bvp::kernel::FlatKernel;

    fn square(n: usize) -> VoxelDomain {
        VoxelDomain::from_shape(
            &Shape::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            n,
        )
        .unwrap()
    }

    #[test]
    fn left_matrix_matches_product() {
        let t = BladeTable::new(3);
        let a: Vec<f64> = (0..8).map(|i| 0.3 * i as f64 - 1.0).collect();
        let v: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let m = t.left_matrix(&a);
        let mut direct = vec![0.0; 8];
        t.mul_add(&a, &v, 1.0, &mut direct);
        for c in 0..8 {
            let row: f64 = (0..8).map(|b| m[c * 8 + b] * v[b]).sum();
            assert!((row - direct[c]).abs() < 1e-14);
        }
    }

    #[test]
    fn divergence_examples() {
        let d = square(8);
        let rot = Field::from_fn(&d, |x| Multivector::vector(2, &[x[1], -x[0]]).unwrap());
        assert!(divergence_fd(&d, &rot).max_norm() < 1e-12);
        let lin = Field::from_fn(&d, |x| Multivector::vector(2, &[x[0], 0.0]).unwrap());
        let div = divergence_fd(&d, &lin);
        assert!(div.values.iter().all(|v| (v.scalar_part() - 1.0).abs() < 1e-12));
        let cst = Field::from_fn(&d, |_| Multivector::vector(2, &[2.0, 3.0]).unwrap());
        assert!(divergence_fd(&d, &cst).max_norm() < 1e-12);
    }

    #[test]
    fn zero_inputs_give_zero() {
        let d = square(6);
        let k = FlatKernel::new(2).unwrap();
        assert_eq!(teodorescu(&d, &Field::zero(&d), &k).unwrap().max_norm(), 0.0);
        let g = BoundaryTrace::from_fn(&d, |_| Multivector::zero(2));
        assert_eq!(cauchy_transform(&d, &g, &k).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn cauchy_transform_reproduces_constants() {
        let k = FlatKernel::new(2).unwrap();
        let mut errs = Vec::new();
        for n in [8, 16] {
            let d = square(n);
            let g = BoundaryTrace::from_fn(&d, |_| Multivector::one(2));
            let fg = cauchy_transform(&d, &g, &k).unwrap();
            let err = d
                .interior_cells(1)
                .iter()
                .map(|&c| (&fg.values[c] - &Multivector::one(2)).norm())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[1] < 1e-3, "{errs:?}");
    }
}
