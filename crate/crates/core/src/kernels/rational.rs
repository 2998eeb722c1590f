use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{eval_terms, Exponents, Poly};
use crate::clifford::{blade_sign, DiracVariant, Multivector};
use crate::error::{Error, Result};

/// Multi-index `(m_0, ..., m_n)` selecting a mixed partial derivative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub m: Vec<u32>,
}

impl MultiIndex {
    pub fn new(m: Vec<u32>) -> Self {
        Self { m }
    }

    pub fn zero(len: usize) -> Self {
        Self { m: vec![0; len] }
    }

    /// `|m|`.
    pub fn order(&self) -> u32 {
        self.m.iter().sum()
    }

    /// Axes in ascending order, each repeated `m_i` times.
    pub fn axes(&self) -> Vec<usize> {
        self.m
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat(i).take(k as usize))
            .collect()
    }

    /// All multi-indices of the given length with `|m| = order`.
    pub fn all_of_order(len: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == len {
                cur.push(left);
                out.push(MultiIndex::new(cur.clone()));
                cur.pop();
                return;
            }
            for k in (0..=left).rev() {
                cur.push(k);
                rec(len, left - k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if order == 0 {
                out.push(MultiIndex::new(Vec::new()));
            }
            return out;
        }
        rec(len, order, &mut Vec::new(), &mut out);
        out
    }
}

/// `Cl_n`-valued function `f(x) = N(x) / |x|^k` with exact polynomial numerators, one per blade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalVectorFunction {
    n: usize,
    vars: usize,
    numerators: Vec<Poly>,
    denom_exp: u32,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl RationalVectorFunction {
    /// Builds and canonicalizes `N / |x|^denom_exp`.
    pub fn new(n: usize, vars: usize, numerators: Vec<Poly>, denom_exp: u32) -> Result<Self> {
        if numerators.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: numerators.len(),
            });
        }
        if let Some(p) = numerators.iter().find(|p| p.vars() != vars) {
            return Err(Error::DimensionMismatch {
                expected: vars,
                found: p.vars(),
            });
        }
        let mut f = Self {
            n,
            vars,
            numerators,
            denom_exp,
        };
        f.canonicalize();
        Ok(f)
    }

    /// Polynomial `Cl_n`-valued function, no denominator.
    pub fn polynomial(n: usize, vars: usize, numerators: Vec<Poly>) -> Result<Self> {
        Self::new(n, vars, numerators, 0)
    }

    pub fn zero(n: usize, vars: usize) -> Self {
        Self {
            n,
            vars,
            numerators: vec![Poly::zero(vars); 1 << n],
            denom_exp: 0,
        }
    }

    /// Clifford dimension `n` of the value space.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of real variables.
    pub fn dim(&self) -> usize {
        self.vars
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    pub fn numerators(&self) -> &[Poly] {
        &self.numerators
    }

    pub fn numerator(&self, blade: usize) -> &Poly {
        &self.numerators[blade]
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(Poly::is_zero)
    }

    fn canonicalize(&mut self) {
        if self.is_zero() {
            self.denom_exp = 0;
            return;
        }
        while self.denom_exp >= 2 {
            let divided: Option<Vec<Poly>> =
                self.numerators.iter().map(Poly::div_norm_sqr).collect();
            match divided {
                Some(p) => {
                    self.numerators = p;
                    self.denom_exp -= 2;
                }
                None => break,
            }
        }
    }

    /// Exact `∂f/∂x_axis` by the quotient rule, canonicalized.
    pub fn partial(&self, axis: usize) -> Self {
        let k = self.denom_exp;
        let r2 = Poly::norm_sqr(self.vars);
        let kk = int(k as i64);
        let numerators = self
            .numerators
            .iter()
            .map(|p| {
                // |x|^2 ∂N - k x_axis N
                let mut out = r2.mul(&p.partial(axis));
                if k > 0 {
                    out.add_assign(&p.mul_var(axis).scale(&kk).neg());
                }
                out
            })
            .collect();
        let mut f = Self {
            n: self.n,
            vars: self.vars,
            numerators,
            denom_exp: k + 2,
        };
        f.canonicalize();
        f
    }

    /// Sum of two functions whose denominator exponents have equal parity.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.vars != other.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                found: other.vars,
            });
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if (self.denom_exp + other.denom_exp) % 2 != 0 {
            return Err(Error::Unsupported(
                "denominator exponents of different parity".into(),
            ));
        }
        let k = self.denom_exp.max(other.denom_exp);
        let lift = |f: &Self| -> Vec<Poly> {
            let mut factor = Poly::constant(f.vars, BigRational::one());
            let r2 = Poly::norm_sqr(f.vars);
            for _ in 0..(k - f.denom_exp) / 2 {
                factor = factor.mul(&r2);
            }
            f.numerators.iter().map(|p| p.mul(&factor)).collect()
        };
        let mut numerators = lift(self);
        for (a, b) in numerators.iter_mut().zip(lift(other)) {
            a.add_assign(&b);
        }
        Self::new(self.n, self.vars, numerators, k)
    }

    /// `c * f` for a constant multivector `c` on the left.
    pub fn left_mul(&self, c: &Multivector) -> Result<Self> {
        if c.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: c.n(),
            });
        }
        let mut numerators = vec![Poly::zero(self.vars); 1 << self.n];
        for (a, &ca) in c.coeffs().iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ca = BigRational::from_float(ca)
                .ok_or_else(|| Error::Domain("non-finite coefficient".into()))?;
            for (b, p) in self.numerators.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let s = &ca * int(blade_sign(a, b) as i64);
                numerators[a ^ b].add_assign(&p.scale(&s));
            }
        }
        Self::new(self.n, self.vars, numerators, self.denom_exp)
    }

    /// Largest total degree appearing in any numerator.
    fn numerator_degree(&self) -> Option<u32> {
        let mut degs = self
            .numerators
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.homogeneous_degree());
        let first = degs.next()??;
        for d in degs {
            if d? != first {
                return None;
            }
        }
        Some(first)
    }

    /// Degree `d` with `f(λx) = λ^d f(x)`, when all numerators share one homogeneous degree.
    pub fn homogeneity_degree(&self) -> Option<i64> {
        self.numerator_degree()
            .map(|d| d as i64 - self.denom_exp as i64)
    }

    /// `sup_{|x| = 1} |f(x)|` bound: `sqrt(Σ_A (Σ |coef_A|)^2)`.
    pub fn unit_sphere_bound(&self) -> f64 {
        self.numerators
            .iter()
            .map(|p| p.abs_coeff_sum().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Multivector> {
        self.compile().evaluate(x)
    }

    /// Float form for fast repeated evaluation.
    pub fn compile(&self) -> CompiledFunction {
        CompiledFunction {
            n: self.n,
            vars: self.vars,
            denom_exp: self.denom_exp,
            components: self
                .numerators
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(b, p)| (b, p.to_f64_terms()))
                .collect(),
        }
    }

    pub fn to_document(&self) -> FunctionDocument {
        let components = self
            .numerators
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(b, p)| {
                let terms = p
                    .terms()
                    .map(|(e, c)| (e.clone(), c.numer().to_string(), c.denom().to_string()))
                    .collect();
                (b.to_string(), terms)
            })
            .collect();
        FunctionDocument {
            vars: self.vars,
            n: self.n,
            denom_exp: self.denom_exp,
            components,
        }
    }

    pub fn from_document(doc: &FunctionDocument) -> Result<Self> {
        let mut numerators = vec![Poly::zero(doc.vars); 1 << doc.n];
        for (key, terms) in &doc.components {
            let blade: usize = key
                .parse()
                .map_err(|_| Error::Config(format!("bad blade key {key:?}")))?;
            if blade >= numerators.len() {
                return Err(Error::Config(format!("blade {blade} out of range")));
            }
            for (e, num, den) in terms {
                if e.len() != doc.vars {
                    return Err(Error::DimensionMismatch {
                        expected: doc.vars,
                        found: e.len(),
                    });
                }
                let parse = |s: &str| {
                    s.parse::<BigInt>()
                        .map_err(|_| Error::Config(format!("bad integer {s:?}")))
                };
                let den = parse(den)?;
                if den.is_zero() {
                    return Err(Error::Config("zero denominator".into()));
                }
                numerators[blade].add_term(e.clone(), BigRational::new(parse(num)?, den));
            }
        }
        Self::new(doc.n, doc.vars, numerators, doc.denom_exp)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// JSON form: blade index → list of `[exponents, numerator, denominator]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDocument {
    pub vars: usize,
    pub n: usize,
    pub denom_exp: u32,
    pub components: BTreeMap<String, Vec<(Exponents, String, String)>>,
}

/// Float evaluator derived from a [`RationalVectorFunction`].
#[derive(Debug, Clone)]
pub struct CompiledFunction {
    n: usize,
    vars: usize,
    denom_exp: u32,
    components: Vec<(usize, Vec<(Exponents, f64)>)>,
}

impl CompiledFunction {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.vars
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Multivector> {
        if x.len() != self.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                found: x.len(),
            });
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if self.denom_exp > 0 && r2 == 0.0 {
            return Err(Error::Pole("evaluation at the origin".into()));
        }
        let inv = r2.sqrt().powi(-(self.denom_exp as i32));
        let mut out = Multivector::zero(self.n);
        let c = out.coeffs_mut();
        for (b, terms) in &self.components {
            c[*b] = eval_terms(terms, x) * inv;
        }
        Ok(out)
    }
}

/// `q_0(x) = x̄ / |x|^(n+1)` on `R^(n+1) = R ⊕ R^n`, valued in `Cl_n`.
pub fn cauchy_kernel_q0(ambient_dim: usize) -> Result<RationalVectorFunction> {
    if ambient_dim < 2 {
        return Err(Error::Domain(format!(
            "ambient dimension must be at least 2, got {ambient_dim}"
        )));
    }
    let n = ambient_dim - 1;
    let mut numerators = vec![Poly::zero(ambient_dim); 1 << n];
    numerators[0] = Poly::variable(ambient_dim, 0, int(1));
    for j in 1..=n {
        numerators[1 << (j - 1)] = Poly::variable(ambient_dim, j, int(-1));
    }
    RationalVectorFunction::new(n, ambient_dim, numerators, ambient_dim as u32)
}

/// Exact `∂f/∂x_axis`.
pub fn symbolic_partial(f: &RationalVectorFunction, axis: usize) -> RationalVectorFunction {
    f.partial(axis)
}

/// `∂^|m| q_0 / ∂x^m`.
pub fn q_m(m: &MultiIndex, ambient_dim: usize) -> Result<RationalVectorFunction> {
    if m.m.len() != ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: ambient_dim,
            found: m.m.len(),
        });
    }
    let mut f = cauchy_kernel_q0(ambient_dim)?;
    for axis in m.axes() {
        f = f.partial(axis);
    }
    Ok(f)
}

/// Exact `Df`, each partial multiplied on the left by its basis element.
pub fn dirac_apply_symbolic(
    f: &RationalVectorFunction,
    variant: DiracVariant,
) -> Result<RationalVectorFunction> {
    let n = f.n();
    if variant.coordinate_count(n) != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: variant.coordinate_count(n),
            found: f.dim(),
        });
    }
    let mut acc = RationalVectorFunction::zero(n, f.dim());
    for axis in 0..f.dim() {
        let term = f.partial(axis).left_mul(&variant.axis_element(n, axis))?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q0_in_the_plane_is_one_over_z() {
        let q = cauchy_kernel_q0(2).unwrap();
        let (x, y) = (0.3, -1.1);
        let v = q.evaluate(&[x, y]).unwrap();
        // 1 / (x + iy) = (x - iy) / (x^2 + y^2)
        let r2 = x * x + y * y;
        assert!((v.coeff(0) - x / r2).abs() < 1e-15);
        assert!((v.coeff(1) + y / r2).abs() < 1e-15);
        assert_eq!(q.evaluate(&[1.0, 0.0]).unwrap(), Multivector::one(1));
    }

    #[test]
    fn hand_quotient_rule() {
        // ∂_0 (x_0 / |x|^2) = (x_1^2 - x_0^2) / |x|^4
        let f = RationalVectorFunction::new(0, 2, vec![Poly::variable(2, 0, int(1))], 2).unwrap();
        let d = f.partial(0);
        let mut expect = Poly::zero(2);
        expect.add_term(vec![0, 2], int(1));
        expect.add_term(vec![2, 0], int(-1));
        assert_eq!(d.denom_exp(), 4);
        assert_eq!(d.numerator(0), &expect);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let f = RationalVectorFunction::polynomial(1, 2, vec![Poly::constant(2, int(1)), Poly::zero(2)])
            .unwrap();
        assert!(f.partial(0).is_zero());
        assert!(dirac_apply_symbolic(&f, DiracVariant::CauchyRiemann)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn dirac_squared_of_x1_squared() {
        let mut p = Poly::zero(2);
        p.add_term(vec![2, 0], int(1));
        let f = RationalVectorFunction::polynomial(2, 2, vec![p, Poly::zero(2), Poly::zero(2), Poly::zero(2)])
            .unwrap();
        let d = dirac_apply_symbolic(&f, DiracVariant::Dirac).unwrap();
        let dd = dirac_apply_symbolic(&d, DiracVariant::Dirac).unwrap();
        assert_eq!(dd.numerator(0), &Poly::constant(2, int(-2)));
        assert!(dd.numerators()[1..].iter().all(Poly::is_zero));
    }

    #[test]
    fn canonical_form_reduces() {
        let r2 = Poly::norm_sqr(2);
        let f = RationalVectorFunction::new(0, 2, vec![r2], 4).unwrap();
        assert_eq!(f.denom_exp(), 2);
        assert_eq!(f.numerator(0), &Poly::constant(2, int(1)));
    }

    #[test]
    fn json_round_trip() {
        let f = q_m(&MultiIndex::new(vec![1, 0, 2]), 3).unwrap();
        let back = RationalVectorFunction::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn multi_indices_of_order() {
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert!(MultiIndex::all_of_order(3, 2).iter().all(|m| m.order() == 2));
    }
}
