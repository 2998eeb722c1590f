use super::Multivector;
use crate::error::{Error, Result};

/// A product `y_1 ... y_m` of unit vectors, i.e. an element of `Pin(n)`; an element
/// of `Spin(n)` when `m` is even.
///
/// Only constructible from its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinElement {
    value: Multivector,
    factor_count: usize,
}

impl SpinElement {
    pub fn identity(n: usize) -> Self {
        Self {
            value: Multivector::one(n),
            factor_count: 0,
        }
    }

    /// Multiplies the given non-zero grade-1 factors after normalising each one.
    pub fn from_factors(n: usize, factors: &[Multivector]) -> Result<Self> {
        let mut value = Multivector::one(n);
        for y in factors {
            let mut y = y.clone();
            if y.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: y.n(),
                });
            }
            if y.coeffs().iter().enumerate().any(|(i, c)| i.count_ones() != 1 && *c != 0.0) {
                return Err(Error::Domain("Pin factors must be vectors".into()));
            }
            let r = y.norm();
            if r == 0.0 {
                return Err(Error::Domain("Pin factors must be non-zero".into()));
            }
            y = y.scale(1.0 / r);
            value = &value * &y;
        }
        Ok(Self {
            value,
            factor_count: factors.len(),
        })
    }

    pub fn value(&self) -> &Multivector {
        &self.value
    }

    pub fn factor_count(&self) -> usize {
        self.factor_count
    }

    pub fn is_spin(&self) -> bool {
        self.factor_count % 2 == 0
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            value: &self.value * &other.value,
            factor_count: self.factor_count + other.factor_count,
        }
    }

    /// `a x ã`; with `use_sign_twist` the result is additionally multiplied by
    /// `(-1)^m`, giving `(-y_1)...(-y_m) x ...` instead.
    ///
    /// A single factor `y` maps `x` to its reflection in the hyperplane orthogonal to `y`.
    pub fn apply(&self, x: &Multivector, use_sign_twist: bool) -> Result<Multivector> {
        if x.n() != self.value.n() {
            return Err(Error::DimensionMismatch {
                expected: self.value.n(),
                found: x.n(),
            });
        }
        if x.coeffs().iter().enumerate().any(|(i, c)| i.count_ones() != 1 && *c != 0.0) {
            return Err(Error::Domain("pin action expects a vector".into()));
        }
        let out = &(&self.value * x) * &self.value.reversion();
        let twisted = use_sign_twist && self.factor_count % 2 == 1;
        // Rounding leaves tiny non-vector grades; drop them.
        Ok(if twisted { -out.grade_part(1) } else { out.grade_part(1) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_in_e1() {
        let n = 3;
        let a = SpinElement::from_factors(n, &[Multivector::basis_vector(n, 1)]).unwrap();
        let x = Multivector::vector(n, &[1.0, 1.0, 0.0]).unwrap();
        let y = a.apply(&x, false).unwrap();
        assert_eq!(y, Multivector::vector(n, &[-1.0, 1.0, 0.0]).unwrap());
        let twisted = a.apply(&x, true).unwrap();
        assert_eq!(twisted, Multivector::vector(n, &[1.0, -1.0, 0.0]).unwrap());
    }

    #[test]
    fn identity_fixes_vectors() {
        let x = Multivector::vector(2, &[0.3, -2.0]).unwrap();
        assert_eq!(SpinElement::identity(2).apply(&x, false).unwrap(), x);
    }

    #[test]
    fn rejects_non_vector_factors() {
        let r = SpinElement::from_factors(2, &[Multivector::one(2)]);
        assert!(r.is_err());
        let r = SpinElement::from_factors(2, &[Multivector::zero(2)]);
        assert!(r.is_err());
    }

    #[test]
    fn even_products_are_spin() {
        let e1 = Multivector::basis_vector(2, 1);
        let e2 = Multivector::basis_vector(2, 2);
        let s = SpinElement::from_factors(2, &[e1.clone(), e2]).unwrap();
        assert!(s.is_spin());
        assert!(!SpinElement::from_factors(2, &[e1]).unwrap().is_spin());
    }
}
