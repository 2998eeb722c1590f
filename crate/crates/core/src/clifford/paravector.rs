use serde::{Deserialize, Serialize};

use super::Multivector;
use crate::error::{Error, Result};

/// `x_0 + x_1 e_1 + ... + x_n e_n` in `R ⊕ R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paravector {
    coords: Vec<f64>,
}

impl Paravector {
    /// `coords = [x_0, x_1, ..., x_n]`.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "a paravector has at least a scalar part");
        Self { coords }
    }

    pub fn from_parts(x0: f64, vec: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(vec.len() + 1);
        coords.push(x0);
        coords.extend_from_slice(vec);
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![0.0; n + 1],
        }
    }

    /// Algebra dimension `n` (the paravector has `n + 1` coordinates).
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x0(&self) -> f64 {
        self.coords[0]
    }

    /// The last coordinate `x_n` (height in upper half-space).
    pub fn last(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        let mut coords = self.coords.clone();
        for c in coords.iter_mut().skip(1) {
            *c = -*c;
        }
        Self { coords }
    }

    /// `x^-1 = x̄ / |x|^2`.
    pub fn inverse(&self) -> Result<Self> {
        let r2 = self.norm_sqr();
        if r2 == 0.0 {
            return Err(Error::Domain("zero paravector has no inverse".into()));
        }
        Ok(self.conj().scale(1.0 / r2))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.coords.len(), other.coords.len());
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.coords.len(), other.coords.len());
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn to_multivector(&self) -> Multivector {
        let n = self.n();
        let mut m = Multivector::scalar(n, self.coords[0]);
        for k in 1..=n {
            m.coeffs_mut()[1 << (k - 1)] = self.coords[k];
        }
        m
    }

    /// Projects onto grades 0 and 1, failing when higher grades exceed `tol`.
    pub fn from_multivector(m: &Multivector, tol: f64) -> Result<Self> {
        let residual = m.higher_grade_residual();
        if residual > tol {
            return Err(Error::Domain(format!(
                "not a paravector: higher-grade residual {residual:e}"
            )));
        }
        Ok(Self::from_parts(m.scalar_part(), &m.vector_part()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        let one = Paravector::new(vec![1.0, 0.0]);
        assert_eq!(one.inverse().unwrap(), one);
        let e1 = Paravector::new(vec![0.0, 1.0]);
        assert_eq!(e1.inverse().unwrap(), Paravector::new(vec![0.0, -1.0]));
        let x = Paravector::new(vec![1.0, 1.0]);
        let inv = x.inverse().unwrap();
        assert_eq!(inv, Paravector::new(vec![0.5, -0.5]));
        let prod = &x.to_multivector() * &inv.to_multivector();
        assert!(prod.approx_eq(&Multivector::one(1), 1e-15));
        assert!(Paravector::zero(2).inverse().is_err());
    }

    #[test]
    fn conj_multiplied_gives_norm() {
        let x = Paravector::new(vec![0.5, -1.0, 2.0]);
        let p = &x.to_multivector() * &x.conj().to_multivector();
        assert!(p.approx_eq(&Multivector::scalar(2, x.norm_sqr()), 1e-14));
    }
}
