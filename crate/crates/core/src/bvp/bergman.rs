use nalgebra::{DMatrix, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::VoxelDomain;
use super::field::Field;
use super::kernel::CauchyKernel;
use super::ops::{cauchy_row, teodorescu_row, BladeTable, CellQuadrature};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BergmanOptions {
    /// Tikhonov parameter relative to the largest singular value.
    pub lambda_rel: f64,
    /// Singular values below `cutoff_rel · σ_max` are discarded.
    pub cutoff_rel: f64,
    /// Largest accepted `σ_max / σ_min` over the retained singular values.
    pub max_condition: f64,
    /// Cell rule for `tr T` at facet centres.
    pub trace_quadrature: CellQuadrature,
}

impl Default for BergmanOptions {
    fn default() -> Self {
        Self {
            lambda_rel: 0.0,
            cutoff_rel: 1e-6,
            max_condition: 1e12,
            trace_quadrature: CellQuadrature::ADAPTIVE,
        }
    }
}

/// `P = F (tr T F)^(-1) tr T`, assembled as dense real block matrices.
///
/// Multivector samples are flattened cell-major, `2^d` coefficients per sample.
pub struct BergmanProjector {
    dim: usize,
    cells: usize,
    facets: usize,
    trt: DMatrix<f64>,
    cauchy: DMatrix<f64>,
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    smax: f64,
    lambda: f64,
    cutoff: f64,
    condition: f64,
}

fn block_rows<F>(count: usize, blades: usize, cols: usize, row_fn: F) -> DMatrix<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    // each target yields `blades` rows of length `cols`, row-major
    let chunks: Vec<Vec<f64>> = (0..count).into_par_iter().map(row_fn).collect();
    let mut m = DMatrix::zeros(count * blades, cols);
    for (t, chunk) in chunks.iter().enumerate() {
        for r in 0..blades {
            for (c, v) in chunk[r * cols..(r + 1) * cols].iter().enumerate() {
                m[(t * blades + r, c)] = *v;
            }
        }
    }
    m
}

fn scatter(rows: &mut [f64], cols: usize, slot: usize, blades: usize, left: &[f64]) {
    for c in 0..blades {
        for b in 0..blades {
            rows[c * cols + slot * blades + b] = left[c * blades + b];
        }
    }
}

impl BergmanProjector {
    pub fn new<K: CauchyKernel + ?Sized>(domain: &VoxelDomain, kernel: &K, opts: BergmanOptions) -> Result<Self> {
        check_dim(domain.dim(), kernel.dim())?;
        let dim = domain.dim();
        let blades = 1 << dim;
        let cells = domain.cell_count();
        let facets = domain.facets().len();
        let table = BladeTable::new(dim);

        let trt = block_rows(facets, blades, cells * blades, |fi| {
            let row = teodorescu_row(domain, kernel, &domain.facets()[fi].center, opts.trace_quadrature);
            let mut out = vec![0.0; blades * cells * blades];
            for (j, w) in row.iter().enumerate() {
                scatter(&mut out, cells * blades, j, blades, &table.left_matrix(w.coeffs()));
            }
            out
        });
        let cauchy = block_rows(cells, blades, facets * blades, |ci| {
            let row = cauchy_row(domain, kernel, domain.center(ci));
            let mut out = vec![0.0; blades * facets * blades];
            for (j, w) in row.iter().enumerate() {
                scatter(&mut out, facets * blades, j, blades, &table.left_matrix(w.coeffs()));
            }
            out
        });

        let a = &trt * &cauchy;
        let svd = SVD::new(a, true, true);
        let smax = svd.singular_values.max();
        if !(smax.is_finite() && smax > 0.0) {
            return Err(Error::Conditioning { condition: f64::INFINITY });
        }
        let mut out = Self {
            dim,
            cells,
            facets,
            trt,
            cauchy,
            svd,
            smax,
            lambda: 0.0,
            cutoff: 0.0,
            condition: f64::INFINITY,
        };
        out.regularize(opts)?;
        Ok(out)
    }

    /// Resets the regularization without refactoring the boundary system.
    pub fn regularize(&mut self, opts: BergmanOptions) -> Result<()> {
        if !(opts.lambda_rel >= 0.0 && opts.cutoff_rel >= 0.0) || opts.max_condition.is_nan() || opts.max_condition <= 1.0 {
            return Err(Error::Config(format!("invalid Bergman options {opts:?}")));
        }
        let cutoff = opts.cutoff_rel * self.smax;
        let smin = self
            .svd
            .singular_values
            .iter()
            .copied()
            .filter(|&s| s >= cutoff && s > 0.0)
            .fold(f64::INFINITY, f64::min);
        let condition = self.smax / smin;
        if !(condition <= opts.max_condition) {
            return Err(Error::Conditioning { condition });
        }
        self.lambda = opts.lambda_rel * self.smax;
        self.cutoff = cutoff;
        self.condition = condition;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `σ_max / σ_min` of `tr T F` over the retained singular values.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Regularized solve of `(tr T F) x = b`, applied column-wise.
    fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let u = self.svd.u.as_ref().expect("left vectors computed");
        let vt = self.svd.v_t.as_ref().expect("right vectors computed");
        let mut y = u.transpose() * b;
        for (i, s) in self.svd.singular_values.iter().enumerate() {
            let g = if *s < self.cutoff || *s == 0.0 {
                0.0
            } else {
                s / (s * s + self.lambda * self.lambda)
            };
            y.row_mut(i).scale_mut(g);
        }
        vt.transpose() * y
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.len() != self.cells {
            return Err(Error::DimensionMismatch {
                expected: self.cells,
                found: f.len(),
            });
        }
        Ok(())
    }

    pub fn project(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let x = DMatrix::from_column_slice(self.cells << self.dim, 1, &f.to_vec());
        let b = &self.trt * x;
        let y = &self.cauchy * self.solve(&b);
        Ok(Field::from_vec(self.dim, y.as_slice(), false))
    }

    /// `Q f = f - P f`.
    pub fn complement(&self, f: &Field) -> Result<Field> {
        Ok(f.sub(&self.project(f)?))
    }

    /// Scalar-to-scalar block of `P` as a `cells × cells` matrix.
    pub fn scalar_block(&self) -> DMatrix<f64> {
        let blades = 1usize << self.dim;
        let trt_s = DMatrix::from_fn(self.facets * blades, self.cells, |r, c| self.trt[(r, c * blades)]);
        let cauchy_s = DMatrix::from_fn(self.cells, self.facets * blades, |r, c| self.cauchy[(r * blades, c)]);
        cauchy_s * self.solve(&trt_s)
    }
}

/// One-shot `P f` with default options.
pub fn bergman_projection<K: CauchyKernel + ?Sized>(domain: &VoxelDomain, f: &Field, kernel: &K) -> Result<Field> {
    BergmanProjector::new(domain, kernel, BergmanOptions::default())?.project(f)
}

