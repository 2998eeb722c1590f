use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::clifford::Multivector;
use crate::error::{Error, Result};

/// Named mask predicates for the voxel domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
}

impl Shape {
    pub fn contains(&self, x: &[f64]) -> bool {
        let dist = |c: &[f64]| -> f64 {
            x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        match self {
            Shape::Ball { center, radius } => dist(center) < *radius,
            Shape::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v > l && v < h),
            Shape::Annulus { center, inner, outer } => {
                let r = dist(center);
                r > *inner && r < *outer
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { center, .. } | Shape::Annulus { center, .. } => center.len(),
            Shape::Box { lo, .. } => lo.len(),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Ball { center, radius: r } | Shape::Annulus { center, outer: r, .. } => (
                center.iter().map(|c| c - r).collect(),
                center.iter().map(|c| c + r).collect(),
            ),
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }
}

/// A face between an inside and an outside cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub center: Vec<f64>,
    pub axis: usize,
    /// `+1` when the outward normal points along `+e_axis`.
    pub sign: f64,
    pub area: f64,
    /// Index of the adjacent inside cell.
    pub cell: usize,
}

impl Facet {
    /// Outward unit normal as a grade-1 element of `Cl_dim`.
    pub fn normal(&self, dim: usize) -> Multivector {
        Multivector::blade(dim, 1 << self.axis, self.sign)
    }
}

/// Cells of a uniform grid whose centres satisfy a mask, with their boundary facets.
#[derive(Debug, Clone)]
pub struct VoxelDomain {
    dim: usize,
    h: f64,
    origin: Vec<f64>,
    counts: Vec<usize>,
    /// Inside-cell index per grid cell.
    slot: Vec<Option<usize>>,
    cells: Vec<Vec<usize>>,
    centers: Vec<Vec<f64>>,
    depth: Vec<usize>,
    facets: Vec<Facet>,
    /// Per facet and tangential axis: neighbouring facets in the same plane (minus, plus).
    facet_neighbors: Vec<Vec<(usize, Option<usize>, Option<usize>)>>,
}

impl VoxelDomain {
    /// Cubic-cell grid over the shape's bounding box, `resolution` cells along its longest side.
    pub fn from_shape(shape: &Shape, resolution: usize) -> Result<Self> {
        let (lo, hi) = shape.bounds();
        let side = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max);
        if resolution == 0 || !(side > 0.0) {
            return Err(Error::Config("grid needs a positive resolution and extent".into()));
        }
        let h = side / resolution as f64;
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| (((u - l) / h) - 1e-9).ceil().max(1.0) as usize)
            .collect();
        Self::new(lo, h, counts, |x| shape.contains(x))
    }

    /// Grid with lower corner `origin`, spacing `h` and `counts` cells per axis; cells
    /// whose centre satisfies `inside` form the domain. Cells beyond the grid are outside.
    pub fn new<P: Fn(&[f64]) -> bool>(origin: Vec<f64>, h: f64, counts: Vec<usize>, inside: P) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 || counts.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: counts.len(),
            });
        }
        if !(h > 0.0) {
            return Err(Error::Config(format!("cell size must be positive, got {h}")));
        }
        let total: usize = counts.iter().product();
        let mut slot = vec![None; total];
        let mut cells = Vec::new();
        let mut centers = Vec::new();
        for lin in 0..total {
            let idx = unravel(lin, &counts);
            let c: Vec<f64> = idx
                .iter()
                .zip(&origin)
                .map(|(&i, o)| o + (i as f64 + 0.5) * h)
                .collect();
            if inside(&c) {
                slot[lin] = Some(cells.len());
                cells.push(idx);
                centers.push(c);
            }
        }
        if cells.is_empty() {
            return Err(Error::Config("domain mask selects no cells".into()));
        }
        let mut dom = Self {
            dim,
            h,
            origin,
            counts,
            slot,
            cells,
            centers,
            depth: Vec::new(),
            facets: Vec::new(),
            facet_neighbors: Vec::new(),
        };
        dom.build_facets();
        dom.build_depth();
        Ok(dom)
    }

    fn build_facets(&mut self) {
        let area = self.h.powi(self.dim as i32 - 1);
        for (ci, idx) in self.cells.iter().enumerate() {
            for axis in 0..self.dim {
                for sign in [-1i64, 1] {
                    if self.lookup_offset(idx, axis, sign).is_none() {
                        let mut center = self.centers[ci].clone();
                        center[axis] += 0.5 * sign as f64 * self.h;
                        self.facets.push(Facet {
                            center,
                            axis,
                            sign: sign as f64,
                            area,
                            cell: ci,
                        });
                    }
                }
            }
        }
        // facets keyed by doubled integer coordinates of their centre
        let key = |f: &Facet| -> (usize, i64, Vec<i64>) {
            let k = f
                .center
                .iter()
                .zip(&self.origin)
                .map(|(c, o)| ((c - o) / self.h * 2.0).round() as i64)
                .collect();
            (f.axis, f.sign as i64, k)
        };
        let map: HashMap<(usize, i64, Vec<i64>), usize> =
            self.facets.iter().enumerate().map(|(i, f)| (key(f), i)).collect();
        self.facet_neighbors = self
            .facets
            .iter()
            .map(|f| {
                let (axis, sign, k) = key(f);
                (0..self.dim)
                    .filter(|&t| t != axis)
                    .map(|t| {
                        let mut lo = k.clone();
                        let mut hi = k.clone();
                        lo[t] -= 2;
                        hi[t] += 2;
                        (t, map.get(&(axis, sign, lo)).copied(), map.get(&(axis, sign, hi)).copied())
                    })
                    .collect()
            })
            .collect();
    }

    /// Chebyshev distance, in cells, to the nearest outside cell.
    fn build_depth(&mut self) {
        let mut depth = vec![usize::MAX; self.cells.len()];
        let mut queue = VecDeque::new();
        let offsets = neighbor_offsets(self.dim);
        for (ci, idx) in self.cells.iter().enumerate() {
            let touches_outside = offsets.iter().any(|o| self.lookup(idx, o).is_none());
            if touches_outside {
                depth[ci] = 1;
                queue.push_back(ci);
            }
        }
        while let Some(ci) = queue.pop_front() {
            let d = depth[ci];
            for o in &offsets {
                if let Some(nj) = self.lookup(&self.cells[ci], o) {
                    if depth[nj] == usize::MAX {
                        depth[nj] = d + 1;
                        queue.push_back(nj);
                    }
                }
            }
        }
        self.depth = depth;
    }

    fn lookup(&self, idx: &[usize], offset: &[i64]) -> Option<usize> {
        let mut lin = 0usize;
        let mut stride = 1usize;
        for ((&i, &o), &n) in idx.iter().zip(offset).zip(&self.counts) {
            let j = i as i64 + o;
            if j < 0 || j >= n as i64 {
                return None;
            }
            lin += j as usize * stride;
            stride *= n;
        }
        self.slot[lin]
    }

    fn lookup_offset(&self, idx: &[usize], axis: usize, step: i64) -> Option<usize> {
        let mut o = vec![0i64; self.dim];
        o[axis] = step;
        self.lookup(idx, &o)
    }

    /// Inside cell reached from `cell` by an integer offset, if any.
    pub fn neighbor(&self, cell: usize, offset: &[i64]) -> Option<usize> {
        self.lookup(&self.cells[cell], offset)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn center(&self, cell: usize) -> &[f64] {
        &self.centers[cell]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// `(tangential axis, minus neighbour, plus neighbour)` for each facet.
    pub fn facet_neighbors(&self, facet: usize) -> &[(usize, Option<usize>, Option<usize>)] {
        &self.facet_neighbors[facet]
    }

    /// Chebyshev distance in cells to the outside; boundary cells have depth 1.
    pub fn depth(&self, cell: usize) -> usize {
        self.depth[cell]
    }

    /// Cells whose depth is at least `min_depth`.
    pub fn interior_cells(&self, min_depth: usize) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| self.depth[c] >= min_depth).collect()
    }

    /// Cells whose centre lies at least `dist` inside, measured as `(depth - 1/2) h`.
    pub fn cells_at_distance(&self, dist: f64) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| (self.depth[c] as f64 - 0.5) * self.h >= dist * (1.0 - 1e-12))
            .collect()
    }

    /// `|Σ_facets n · area|`, zero for a closed boundary.
    pub fn normal_sum_defect(&self) -> f64 {
        let mut acc = vec![0.0; self.dim];
        for f in &self.facets {
            acc[f.axis] += f.sign * f.area;
        }
        acc.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn unravel(mut lin: usize, counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .map(|&n| {
            let i = lin % n;
            lin /= n;
            i
        })
        .collect()
}

fn neighbor_offsets(dim: usize) -> Vec<Vec<i64>> {
    let total = 3usize.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let v = (k % 3) as i64 - 1;
                    k /= 3;
                    v
                })
                .collect::<Vec<i64>>()
        })
        .filter(|o| o.iter().any(|&v| v != 0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn square_counts() {
        let d = square(8);
        assert_eq!(d.cell_count(), 64);
        assert_eq!(d.facets().len(), 32);
        assert!((d.h() - 0.25).abs() < 1e-15);
        assert_eq!(d.interior_cells(3).len(), 16);
        assert!(d.normal_sum_defect() < 1e-12);
    }

    #[test]
    fn facets_separate_inside_from_outside() {
        let d = VoxelDomain::from_shape(
            &Shape::Annulus {
                center: vec![0.0, 0.0, 0.0],
                inner: 0.4,
                outer: 1.0,
            },
            10,
        )
        .unwrap();
        assert!(d.normal_sum_defect() < 1e-10);
        for f in d.facets() {
            let mut out = f.center.clone();
            out[f.axis] += 0.5 * f.sign * d.h();
            let mut inn = f.center.clone();
            inn[f.axis] -= 0.5 * f.sign * d.h();
            let shape = Shape::Annulus {
                center: vec![0.0; 3],
                inner: 0.4,
                outer: 1.0,
            };
            assert!(!shape.contains(&out) && shape.contains(&inn));
            assert!((f.area - d.h().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn facet_neighbours_on_a_side() {
        let d = square(4);
        for (i, f) in d.facets().iter().enumerate() {
            for &(t, lo, hi) in d.facet_neighbors(i) {
                for nb in [lo, hi].into_iter().flatten() {
                    let g = &d.facets()[nb];
                    assert_eq!((g.axis, g.sign), (f.axis, f.sign));
                    assert!(((g.center[t] - f.center[t]).abs() - d.h()).abs() < 1e-12);
                }
            }
        }
    }
}
