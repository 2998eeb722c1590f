use serde::{Deserialize, Serialize};

use crate::clifford::{Multivector, Paravector};
use crate::error::{Error, Result};

/// Tolerance used by [`VahlenMatrix::is_vahlen`].
pub const VAHLEN_TOL: f64 = 1e-10;

/// A 2x2 matrix `[[a, b], [c, d]]` with entries in `Cl_n`, acting on paravectors by
/// `x -> (ax + b)(cx + d)^-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VahlenMatrix {
    pub a: Multivector,
    pub b: Multivector,
    pub c: Multivector,
    pub d: Multivector,
}

impl VahlenMatrix {
    pub fn new(a: Multivector, b: Multivector, c: Multivector, d: Multivector) -> Result<Self> {
        let n = a.n();
        for m in [&b, &c, &d] {
            if m.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.n(),
                });
            }
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: Multivector::one(n),
            b: Multivector::zero(n),
            c: Multivector::zero(n),
            d: Multivector::one(n),
        }
    }

    /// `[[1, t], [0, 1]]`, i.e. `x -> x + t`.
    pub fn translation(t: &Paravector) -> Self {
        let n = t.n();
        Self {
            a: Multivector::one(n),
            b: t.to_multivector(),
            c: Multivector::zero(n),
            d: Multivector::one(n),
        }
    }

    /// `J = [[0, -1], [1, 0]]`, i.e. `x -> -x^-1`.
    pub fn inversion(n: usize) -> Self {
        Self {
            a: Multivector::zero(n),
            b: Multivector::scalar(n, -1.0),
            c: Multivector::one(n),
            d: Multivector::zero(n),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            a: &(&self.a * &rhs.a) + &(&self.b * &rhs.c),
            b: &(&self.a * &rhs.b) + &(&self.b * &rhs.d),
            c: &(&self.c * &rhs.a) + &(&self.d * &rhs.c),
            d: &(&self.c * &rhs.b) + &(&self.d * &rhs.d),
        }
    }

    /// `[[d̃, -b̃], [-c̃, ã]]`, the inverse whenever the pseudo-determinant is 1.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.d.reversion(),
            b: -self.b.reversion(),
            c: -self.c.reversion(),
            d: self.a.reversion(),
        }
    }

    /// `a d̃ - b c̃`.
    pub fn pseudo_determinant(&self) -> Multivector {
        &(&self.a * &self.d.reversion()) - &(&self.b * &self.c.reversion())
    }

    pub fn is_vahlen(&self) -> bool {
        self.vahlen_defect() <= VAHLEN_TOL
    }

    /// Largest violation of the Vahlen conditions: pseudo-determinant minus one and
    /// the non-paravector parts of `a c̃, c d̃, d b̃, b c̃`.
    pub fn vahlen_defect(&self) -> f64 {
        let n = self.n();
        let det = &self.pseudo_determinant() - &Multivector::one(n);
        let mut defect = det.max_abs();
        for (x, y) in [
            (&self.a, &self.c),
            (&self.c, &self.d),
            (&self.d, &self.b),
            (&self.b, &self.c),
        ] {
            defect = defect.max((x * &y.reversion()).higher_grade_residual());
        }
        defect
    }

    /// `cx + d`.
    pub fn denominator(&self, x: &Paravector) -> Multivector {
        &(&self.c * &x.to_multivector()) + &self.d
    }

    /// `M<x> = (ax + b)(cx + d)^-1`.
    pub fn apply(&self, x: &Paravector) -> Result<Paravector> {
        let xm = x.to_multivector();
        let num = &(&self.a * &xm) + &self.b;
        let den = &(&self.c * &xm) + &self.d;
        let scale = 1.0 + num.norm();
        if den.norm() <= 1e-300 {
            return Err(Error::Pole("cx + d vanishes".into()));
        }
        let inv = den.clifford_inverse()?;
        let y = &num * &inv;
        Paravector::from_multivector(&y, 1e-9 * scale * inv.norm().max(1.0))
    }

    /// `conj(cx + d) / |cx + d|^n`.
    pub fn automorphy_factor(&self, x: &Paravector) -> Result<Multivector> {
        let j = self.denominator(x);
        let r = j.norm();
        if r == 0.0 {
            return Err(Error::Pole("cx + d vanishes".into()));
        }
        Ok(j.conjugation().scale(r.powi(-(self.n() as i32))))
    }

    /// `|c|^2 + |d|^2`.
    pub fn bottom_row_norm_sqr(&self) -> f64 {
        self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn entries(&self) -> [&Multivector; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.entries()
            .iter()
            .zip(other.entries())
            .all(|(x, y)| x.approx_eq(y, tol))
    }

    /// Coefficients rounded to `1e-6`, used for deduplication.
    pub fn fingerprint(&self) -> Vec<i64> {
        self.entries()
            .iter()
            .flat_map(|m| m.coeffs().iter().map(|c| (c * 1e6).round() as i64))
            .collect()
    }

    /// Fingerprint of the class `{M, -M}`.
    pub fn projective_fingerprint(&self) -> Vec<i64> {
        let fp = self.fingerprint();
        match fp.iter().find(|&&v| v != 0) {
            Some(&v) if v < 0 => fp.into_iter().map(|v| -v).collect(),
            _ => fp,
        }
    }

    /// Fingerprint of the bottom row `(c, d)`.
    pub fn bottom_row_fingerprint(&self) -> Vec<i64> {
        [&self.c, &self.d]
            .iter()
            .flat_map(|m| m.coeffs().iter().map(|c| (c * 1e6).round() as i64))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para(c: &[f64]) -> Paravector {
        Paravector::new(c.to_vec())
    }

    #[test]
    fn identity_and_translation() {
        let x = para(&[0.2, -0.4, 0.9]);
        assert_eq!(VahlenMatrix::identity(2).apply(&x).unwrap(), x);
        let t = VahlenMatrix::translation(&para(&[1.0, 0.0, 0.0]));
        assert!(t.apply(&x).unwrap().sub(&para(&[1.2, -0.4, 0.9])).norm() < 1e-15);
    }

    #[test]
    fn inversion_fixes_e1() {
        let j = VahlenMatrix::inversion(2);
        let y = j.apply(&para(&[0.0, 1.0, 0.0])).unwrap();
        assert!(y.sub(&para(&[0.0, 1.0, 0.0])).norm() < 1e-15);
        assert!(j.is_vahlen());
    }

    #[test]
    fn j_squared_is_minus_identity() {
        let j = VahlenMatrix::inversion(3);
        assert!(j.mul(&j).approx_eq(&VahlenMatrix::identity(3).neg(), 0.0));
    }

    #[test]
    fn inverse_of_products() {
        let n = 2;
        let t = VahlenMatrix::translation(&para(&[0.0, 1.0, 0.0]));
        let j = VahlenMatrix::inversion(n);
        let m = t.mul(&j).mul(&t).mul(&t).mul(&j);
        assert!(m.is_vahlen());
        assert!(m.mul(&m.inverse()).approx_eq(&VahlenMatrix::identity(n), 1e-12));
        assert!(m.inverse().mul(&m).approx_eq(&VahlenMatrix::identity(n), 1e-12));
    }

    #[test]
    fn pole_is_reported() {
        let j = VahlenMatrix::inversion(1);
        assert!(matches!(j.apply(&Paravector::zero(1)), Err(Error::Pole(_))));
    }

    #[test]
    fn automorphy_factor_trivial_cases() {
        let x = para(&[0.3, 0.1, 0.7]);
        let one = Multivector::one(2);
        assert_eq!(VahlenMatrix::identity(2).automorphy_factor(&x).unwrap(), one);
        let t = VahlenMatrix::translation(&para(&[0.0, 1.0, 0.0]));
        assert_eq!(t.automorphy_factor(&x).unwrap(), one);
    }

    #[test]
    fn n1_agrees_with_complex_mobius() {
        // Cl_1 is the complex numbers with e_1 = i.
        let m = VahlenMatrix::new(
            Multivector::scalar(1, 2.0),
            Multivector::scalar(1, 1.0),
            Multivector::scalar(1, 3.0),
            Multivector::scalar(1, 2.0),
        )
        .unwrap();
        assert!(m.is_vahlen());
        let (x, y) = (0.25, 0.8);
        let y_out = m.apply(&para(&[x, y])).unwrap();
        // (2z + 1) / (3z + 2) with z = x + iy
        let (nr, ni) = (2.0 * x + 1.0, 2.0 * y);
        let (dr, di) = (3.0 * x + 2.0, 3.0 * y);
        let d2 = dr * dr + di * di;
        let re = (nr * dr + ni * di) / d2;
        let im = (ni * dr - nr * di) / d2;
        assert!((y_out.coords()[0] - re).abs() < 1e-15);
        assert!((y_out.coords()[1] - im).abs() < 1e-15);
    }
}
