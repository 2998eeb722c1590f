use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Largest supported number of generators.
pub const MAX_GENERATORS: usize = 12;

static PRODUCT_SIGN_MUTATION: AtomicBool = AtomicBool::new(false);

/// Flips the sign of `e_1 e_2`. Exists so the invariant suites can be shown to fail.
#[doc(hidden)]
pub fn set_product_sign_mutation(on: bool) {
    PRODUCT_SIGN_MUTATION.store(on, Ordering::Relaxed);
}

/// Parity of the number of transpositions and `e_i^2 = -1` contractions needed to
/// bring the blade product `e_A e_B` into canonical order.
#[inline]
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut shifted = a >> 1;
    while shifted != 0 {
        swaps += (shifted & b).count_ones();
        shifted >>= 1;
    }
    swaps += (a & b).count_ones();
    if a == 0b01 && b == 0b10 && PRODUCT_SIGN_MUTATION.load(Ordering::Relaxed) {
        swaps += 1;
    }
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn grade(blade: usize) -> usize {
    blade.count_ones() as usize
}

/// An element of `Cl_n`, stored densely over the `2^n` basis blades.
///
/// Blade index `i` has bit `k-1` set iff `e_k` is a factor; index `0` is the scalar.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Multivector {
    n: usize,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_GENERATORS, "Cl_{n} exceeds the supported maximum");
        Self {
            n,
            coeffs: vec![0.0; 1 << n],
        }
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let mut m = Self::zero(n);
        m.coeffs[0] = s;
        m
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// `coeff * e_A` for the blade with bitmask `blade`.
    pub fn blade(n: usize, blade: usize, coeff: f64) -> Self {
        let mut m = Self::zero(n);
        m.coeffs[blade] = coeff;
        m
    }

    /// The generator `e_k`, `1 <= k <= n`.
    pub fn basis_vector(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "e_{k} is not a generator of Cl_{n}");
        Self::blade(n, 1 << (k - 1), 1.0)
    }

    /// Grade-1 element `sum_k v[k-1] e_k`.
    pub fn vector(n: usize, v: &[f64]) -> Result<Self> {
        check_dim(n, v.len())?;
        let mut m = Self::zero(n);
        for (k, &x) in v.iter().enumerate() {
            m.coeffs[1 << k] = x;
        }
        Ok(m)
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n > MAX_GENERATORS {
            return Err(Error::Domain(format!("Cl_{n} exceeds the supported maximum")));
        }
        check_dim(1 << n, coeffs.len())?;
        Ok(Self { n, coeffs })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    #[inline]
    pub fn coeff(&self, blade: usize) -> f64 {
        self.coeffs[blade]
    }

    /// The real part `Re(a)`.
    #[inline]
    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficients of `e_1..e_n`.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.coeffs[1 << k]).collect()
    }

    pub fn grade_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if grade(i) == k {
                out.coeffs[i] = c;
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector. Equals `sqrt(a conj(a))` on products
    /// of paravectors.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest absolute coefficient outside grades 0 and 1.
    pub fn higher_grade_residual(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| grade(*i) > 1)
            .fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    pub fn is_paravector(&self, tol: f64) -> bool {
        self.higher_grade_residual() <= tol
    }

    pub fn geometric_product(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                out[i ^ j] += blade_sign(i, j) * a * b;
            }
        }
        Self {
            n: self.n,
            coeffs: out,
        }
    }

    fn scale_by_grade(&self, sign: impl Fn(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| sign(grade(i)) * c)
            .collect();
        Self { n: self.n, coeffs }
    }

    /// Reversion `ã`: grade-k blades pick up `(-1)^(k(k-1)/2)`.
    pub fn reversion(&self) -> Self {
        self.scale_by_grade(|k| if (k * k.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// Clifford conjugation `ā`: grade-k blades pick up `(-1)^(k(k+1)/2)`.
    pub fn conjugation(&self) -> Self {
        self.scale_by_grade(|k| if (k * (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// Grade involution: grade-k blades pick up `(-1)^k`.
    pub fn involution(&self) -> Self {
        self.scale_by_grade(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Inverse of a non-zero grade-1 element, `x^-1 = -x / |x|^2`.
    pub fn vector_inverse(&self) -> Result<Self> {
        if self
            .coeffs
            .iter()
            .enumerate()
            .any(|(i, c)| grade(i) != 1 && *c != 0.0)
        {
            return Err(Error::Domain("vector_inverse expects a grade-1 element".into()));
        }
        let r2 = self.norm_sqr();
        if r2 == 0.0 {
            return Err(Error::Domain("zero vector has no inverse".into()));
        }
        Ok(self.scale(-1.0 / r2))
    }

    /// Inverse of an element of the Clifford group (a product of paravectors or
    /// vectors), where `a ā` is a non-zero real number.
    pub fn clifford_inverse(&self) -> Result<Self> {
        let conj = self.conjugation();
        let prod = self.mul_unchecked(&conj);
        let s = prod.coeffs[0];
        let off = prod.coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Pole("element is not invertible".into()));
        }
        if off > 1e-9 * s.abs() {
            return Err(Error::Domain(
                "element is not in the Clifford group (a·conj(a) is not real)".into(),
            ));
        }
        Ok(conj.scale(1.0 / s))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector(Cl_{}; ", self.n)?;
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}e")?;
                for k in 0..self.n {
                    if i >> k & 1 == 1 {
                        write!(f, "{}", k + 1)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Multivector> for &Multivector {
            type Output = Multivector;
            fn $method(self, rhs: &Multivector) -> Multivector {
                assert_eq!(self.n, rhs.n, "multivectors from different algebras");
                Multivector {
                    n: self.n,
                    coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $tr for Multivector {
            type Output = Multivector;
            fn $method(self, rhs: Multivector) -> Multivector {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.n, rhs.n, "multivectors from different algebras");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Multivector> for Multivector {
    fn sub_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.n, rhs.n, "multivectors from different algebras");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

/// Geometric product. Panics when the operands live in different algebras; use
/// [`Multivector::geometric_product`] for a fallible version.
impl Mul<&Multivector> for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.n, rhs.n, "multivectors from different algebras");
        self.mul_unchecked(rhs)
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        &self * &rhs
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, k: usize) -> Multivector {
        Multivector::basis_vector(n, k)
    }

    #[test]
    fn generators_square_to_minus_one() {
        let p = &e(3, 1) * &e(3, 1);
        assert_eq!(p, Multivector::scalar(3, -1.0));
    }

    #[test]
    fn generators_anticommute() {
        let e12 = &e(3, 1) * &e(3, 2);
        assert_eq!(e12, Multivector::blade(3, 0b011, 1.0));
        let e21 = &e(3, 2) * &e(3, 1);
        assert_eq!(e21, Multivector::blade(3, 0b011, -1.0));
    }

    #[test]
    fn reversion_and_conjugation_on_blades() {
        let e1 = e(2, 1);
        assert_eq!(e1.reversion(), e1);
        assert_eq!(e1.conjugation(), -&e1);
        let e12 = Multivector::blade(2, 0b11, 1.0);
        assert_eq!(e12.reversion(), -&e12);
        assert_eq!(e12.conjugation(), -&e12);
        let s = Multivector::scalar(2, 3.5);
        assert_eq!(s.reversion(), s);
        assert_eq!(s.conjugation(), s);
        let one_plus = &Multivector::one(2) + &e1;
        assert_eq!(one_plus.conjugation(), &Multivector::one(2) - &e1);
    }

    #[test]
    fn grade_three_signs() {
        let e123 = Multivector::blade(3, 0b111, 1.0);
        assert_eq!(e123.reversion(), -&e123);
        assert_eq!(e123.conjugation(), e123);
    }

    #[test]
    fn scalar_part_examples() {
        let a = &Multivector::one(2) + &e(2, 1);
        assert_eq!(a.scalar_part(), 1.0);
        assert_eq!(Multivector::blade(2, 0b11, 2.0).scalar_part(), 0.0);
    }

    #[test]
    fn vector_inverse_examples() {
        assert_eq!(e(2, 1).vector_inverse().unwrap(), -&e(2, 1));
        let two_e1 = e(2, 1).scale(2.0);
        let inv = two_e1.vector_inverse().unwrap();
        assert_eq!(inv, e(2, 1).scale(-0.5));
        assert_eq!(&two_e1 * &inv, Multivector::one(2));
        assert!(matches!(
            Multivector::zero(2).vector_inverse(),
            Err(Error::Domain(_))
        ));
        assert!(Multivector::one(2).vector_inverse().is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let r = e(2, 1).geometric_product(&e(3, 1));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn clifford_inverse_of_paravector_product() {
        let p = Multivector::from_coeffs(2, vec![1.0, 2.0, -0.5, 0.0]).unwrap();
        let q = Multivector::from_coeffs(2, vec![0.3, 0.0, 1.5, 0.0]).unwrap();
        let a = &p * &q;
        let inv = a.clifford_inverse().unwrap();
        assert!((&a * &inv).approx_eq(&Multivector::one(2), 1e-14));
    }
}
