use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exponent tuple of a monomial, one entry per variable.
pub type Exponents = Vec<u32>;

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// `c * x_axis`.
    pub fn variable(vars: usize, axis: usize, c: BigRational) -> Self {
        let mut e = vec![0; vars];
        e[axis] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, c);
        p
    }

    /// `|x|^2 = sum_i x_i^2`.
    pub fn norm_sqr(vars: usize) -> Self {
        let mut p = Self::zero(vars);
        for i in 0..vars {
            let mut e = vec![0; vars];
            e[i] = 2;
            p.add_term(e, BigRational::one());
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exponents, c: BigRational) {
        debug_assert_eq!(e.len(), self.vars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.vars);
        }
        Poly {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Multiplies by `x_axis`.
    pub fn mul_var(&self, axis: usize) -> Poly {
        Poly {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[axis] += 1;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    pub fn partial(&self, axis: usize) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[axis] -= 1;
            out.add_term(e2, c * BigInt::from(e[axis]));
        }
        out
    }

    /// Exact division by `|x|^2`, or `None` when it does not divide.
    ///
    /// Treats the polynomial as univariate in `x_0` over the remaining variables and
    /// divides by the monic `x_0^2 + (x_1^2 + ... )`; the remainder is unique.
    pub fn div_norm_sqr(&self) -> Option<Poly> {
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.vars);
        loop {
            let next = rem
                .terms
                .iter()
                .filter(|(e, _)| e[0] >= 2)
                .max_by_key(|(e, _)| e[0])
                .map(|(e, c)| (e.clone(), c.clone()));
            let Some((e, c)) = next else { break };
            let mut q = e.clone();
            q[0] -= 2;
            quot.add_term(q.clone(), c.clone());
            // rem -= c x^q (x_0^2 + sum_{j>0} x_j^2)
            rem.add_term(e, -c.clone());
            for j in 1..self.vars {
                let mut t = q.clone();
                t[j] += 2;
                rem.add_term(t, -c.clone());
            }
        }
        if rem.is_zero() {
            Some(quot)
        } else {
            None
        }
    }

    /// Common total degree of all terms, if the polynomial is homogeneous and non-zero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Sum of absolute coefficient values, as a float.
    pub fn abs_coeff_sum(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }

    /// Float copy of the terms for fast repeated evaluation.
    pub fn to_f64_terms(&self) -> Vec<(Exponents, f64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval_terms(&self.to_f64_terms(), x)
    }
}

pub(crate) fn eval_terms(terms: &[(Exponents, f64)], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|(e, c)| {
            e.iter()
                .zip(x)
                .fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn division_by_norm_sqr() {
        let r2 = Poly::norm_sqr(3);
        let f = Poly::variable(3, 1, q(3)).mul(&Poly::variable(3, 2, q(1)));
        let prod = r2.mul(&f);
        assert_eq!(prod.div_norm_sqr(), Some(f.clone()));
        assert_eq!(f.div_norm_sqr(), None);
        assert_eq!(Poly::zero(3).div_norm_sqr(), Some(Poly::zero(3)));
    }

    #[test]
    fn partial_of_monomial() {
        let x0sq = Poly::variable(2, 0, q(1)).mul(&Poly::variable(2, 0, q(1)));
        assert_eq!(x0sq.partial(0), Poly::variable(2, 0, q(2)));
        assert!(x0sq.partial(1).is_zero());
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = Poly::variable(2, 0, q(1));
        p.add_term(vec![1, 0], q(-1));
        assert!(p.is_zero());
    }
}
