use std::io::Write;

use serde::{Deserialize, Serialize};

use super::domain::VoxelDomain;
use crate::clifford::Multivector;
use crate::error::{Error, Result};

/// Samples at inside-cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub values: Vec<Multivector>,
    /// Set for scalar fields such as a pressure.
    pub scalar: bool,
}

impl Field {
    pub fn new(domain: &VoxelDomain, values: Vec<Multivector>, scalar: bool) -> Result<Self> {
        if values.len() != domain.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: domain.cell_count(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| v.n() != domain.dim()) {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: v.n(),
            });
        }
        Ok(Self { values, scalar })
    }

    pub fn zero(domain: &VoxelDomain) -> Self {
        Self {
            values: vec![Multivector::zero(domain.dim()); domain.cell_count()],
            scalar: false,
        }
    }

    pub fn from_fn<F: Fn(&[f64]) -> Multivector>(domain: &VoxelDomain, f: F) -> Self {
        Self {
            values: domain.centers().iter().map(|c| f(c)).collect(),
            scalar: false,
        }
    }

    pub fn scalar_from_fn<F: Fn(&[f64]) -> f64>(domain: &VoxelDomain, f: F) -> Self {
        let n = domain.dim();
        Self {
            values: domain.centers().iter().map(|c| Multivector::scalar(n, f(c))).collect(),
            scalar: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add(&self, other: &Field) -> Field {
        Field {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            scalar: self.scalar && other.scalar,
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            scalar: self.scalar && other.scalar,
        }
    }

    pub fn scale(&self, s: f64) -> Field {
        Field {
            values: self.values.iter().map(|a| a.scale(s)).collect(),
            scalar: self.scalar,
        }
    }

    pub fn grade_part(&self, k: usize) -> Field {
        Field {
            values: self.values.iter().map(|a| a.grade_part(k)).collect(),
            scalar: k == 0,
        }
    }

    pub fn scalar_part(&self) -> Field {
        self.grade_part(0)
    }

    /// `max |value|` over the listed cells.
    pub fn max_norm_on(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&c| self.values[c].norm()).fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(Multivector::norm).fold(0.0, f64::max)
    }

    /// Mean over all cells.
    pub fn mean(&self) -> Multivector {
        let n = self.values.first().map_or(0, Multivector::n);
        let mut acc = Multivector::zero(n);
        for v in &self.values {
            acc += v;
        }
        acc.scale(1.0 / self.values.len().max(1) as f64)
    }

    /// Flattened coefficients, cell-major.
    pub fn to_vec(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| v.coeffs().iter().copied()).collect()
    }

    pub fn from_vec(n: usize, data: &[f64], scalar: bool) -> Field {
        let b = 1 << n;
        Field {
            values: data
                .chunks(b)
                .map(|c| Multivector::from_coeffs(n, c.to_vec()).expect("chunk has 2^n entries"))
                .collect(),
            scalar,
        }
    }

    /// CSV rows of cell centre and coefficients, 17 significant digits.
    pub fn write_csv<W: Write>(&self, domain: &VoxelDomain, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = domain.dim();
        let blades = if self.scalar { 1 } else { 1 << dim };
        let header: Vec<String> = (0..dim)
            .map(|i| format!("x{i}"))
            .chain((0..blades).map(|b| format!("c{b}")))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        for (c, v) in domain.centers().iter().zip(&self.values) {
            let rec: Vec<String> = c
                .iter()
                .chain(&v.coeffs()[..blades])
                .map(|x| format!("{x:.16e}"))
                .collect();
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Samples at facet centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub values: Vec<Multivector>,
}

impl BoundaryTrace {
    pub fn new(domain: &VoxelDomain, values: Vec<Multivector>) -> Result<Self> {
        if values.len() != domain.facets().len() {
            return Err(Error::DimensionMismatch {
                expected: domain.facets().len(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> Multivector>(domain: &VoxelDomain, f: F) -> Self {
        Self {
            values: domain.facets().iter().map(|fc| f(&fc.center)).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(Multivector::norm).fold(0.0, f64::max)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| v.coeffs().iter().copied()).collect()
    }

    pub fn from_vec(n: usize, data: &[f64]) -> BoundaryTrace {
        BoundaryTrace {
            values: data
                .chunks(1 << n)
                .map(|c| Multivector::from_coeffs(n, c.to_vec()).expect("chunk has 2^n entries"))
                .collect(),
        }
    }
}
