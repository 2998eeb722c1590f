//! Invariant suites behind `cliffan verify`.
//!
//! Each suite measures a set of invariants on seeded random samples and compares
//! every measurement against a fixed threshold.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bvp::{
    borel_pompeiu_residual, borel_pompeiu_residual_at, cauchy_transform, dirac_fd, stokes_solve, teodorescu,
    BergmanOptions, BergmanProjector, BoundaryTrace, Field, FlatKernel, ManufacturedStokes, Shape, StokesOptions,
    VoxelDomain, BP_MIN_DEPTH,
};
use crate::clifford::{dirac_apply_fd, laplacian_fd, DiracVariant, Multivector, Paravector};
use crate::error::{Error, Result};
use crate::kernels::{cauchy_kernel_q0, dirac_apply_symbolic, q_m, MultiIndex};
use crate::moebius::{
    enumerate_coset_reps, enumerate_group, gamma_p_generators, in_congruence_subgroup, EnumerationOptions,
    VahlenMatrix, VAHLEN_TOL,
};
use crate::series::{
    eisenstein_epsilon, eisenstein_twisted, hyperbolic_cauchy_kernel, poincare_series, torus_cauchy_kernel,
    BundleCharacter, Lattice, OrbitOptions,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Group,
    Kernels,
    Series,
    Bvp,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 5] = [Suite::Algebra, Suite::Group, Suite::Kernels, Suite::Series, Suite::Bvp];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Group => "group",
            Suite::Kernels => "kernels",
            Suite::Series => "series",
            Suite::Bvp => "bvp",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::All]
            .into_iter()
            .chain(Suite::MODULES)
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => measured <= threshold,
            Relation::Below => measured < threshold,
            Relation::AtLeast => measured >= threshold,
        }
    }
}

/// One measured invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    /// `None` when the computation itself failed; see `error`.
    pub measured: Option<f64>,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Collector {
    suite: Suite,
    checks: Vec<Check>,
}

impl Collector {
    fn push(&mut self, name: &str, measured: Result<f64>, relation: Relation, threshold: f64) {
        let (measured, error) = match measured {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("non-finite measurement {v}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        let passed = measured.is_some_and(|v| relation.holds(v, threshold));
        self.checks.push(Check {
            suite: self.suite,
            name: name.to_string(),
            measured,
            relation,
            threshold,
            passed,
            error,
        });
    }

    fn at_most(&mut self, name: &str, measured: Result<f64>, threshold: f64) {
        self.push(name, measured, Relation::AtMost, threshold);
    }

    fn below(&mut self, name: &str, measured: Result<f64>, threshold: f64) {
        self.push(name, measured, Relation::Below, threshold);
    }

    fn at_least(&mut self, name: &str, measured: Result<f64>, threshold: f64) {
        self.push(name, measured, Relation::AtLeast, threshold);
    }
}

/// Copies a result whose error is reported under several checks.
fn share<T: Clone>(r: &Result<T>) -> Result<T> {
    r.as_ref().map(T::clone).map_err(|e| Error::Domain(e.to_string()))
}

/// Runs `suite`; `All` runs every module suite in order.
pub fn run_suite(suite: Suite, seed: u64) -> Report {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::MODULES.to_vec(),
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in suites {
        // each suite gets its own stream so that `all` reproduces the single-suite runs
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Collector { suite: s, checks: Vec::new() };
        match s {
            Suite::Algebra => algebra(&mut c, &mut rng),
            Suite::Group => group(&mut c, &mut rng),
            Suite::Kernels => kernels(&mut c),
            Suite::Series => series(&mut c, &mut rng),
            Suite::Bvp => bvp(&mut c),
            Suite::All => unreachable!(),
        }
        checks.extend(c.checks);
    }
    let passed = checks.iter().all(|c| c.passed);
    Report {
        suite,
        seed,
        checks,
        passed,
    }
}

// ---------------------------------------------------------------- algebra

fn random_mv(rng: &mut ChaCha8Rng, n: usize) -> Multivector {
    let coeffs = (0..1usize << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Multivector::from_coeffs(n, coeffs).expect("n within range")
}

fn anticommutation_defect() -> f64 {
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let one = Multivector::one(n);
        for i in 1..=n {
            let ei = Multivector::basis_vector(n, i);
            worst = worst.max((&(&ei * &ei) + &one).max_abs());
            for j in i + 1..=n {
                let ej = Multivector::basis_vector(n, j);
                worst = worst.max((&(&ei * &ej) + &(&ej * &ei)).max_abs());
            }
        }
    }
    worst
}

/// Exponent vectors of total degree `<= max` in `vars` variables.
fn exponents(vars: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        out = out
            .into_iter()
            .flat_map(|e: Vec<usize>| {
                let used: usize = e.iter().sum();
                (0..=max - used).map(move |k| {
                    let mut f = e.clone();
                    f.push(k);
                    f
                })
            })
            .collect();
    }
    out
}

fn monomial(x: &[f64], alpha: &[usize]) -> f64 {
    x.iter().zip(alpha).map(|(v, &k)| v.powi(k as i32)).product()
}

/// `max |D D f + Δf|` and `max |Δ_fd f - Δf|` over monomials of degree `<= 2`
/// with random Clifford coefficients, against the analytic Laplacian.
fn dirac_square_defect(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let h = 0.25;
    let mut dd = 0.0f64;
    let mut lap = 0.0f64;
    for n in 1..=4 {
        for alpha in exponents(n, 2) {
            let a = random_mv(rng, n);
            let f = |x: &[f64]| a.scale(monomial(x, &alpha));
            let exact_lap = a.scale(alpha.iter().filter(|&&k| k == 2).count() as f64 * 2.0);
            for _ in 0..3 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let d2 = dirac_apply_fd(|y| dirac_apply_fd(f, y, h, DiracVariant::Dirac), &x, h, DiracVariant::Dirac);
                dd = dd.max((&d2 + &exact_lap).max_abs());
                lap = lap.max((&laplacian_fd(f, &x, h) - &exact_lap).max_abs());
            }
        }
    }
    (dd, lap)
}

fn algebra(c: &mut Collector, rng: &mut ChaCha8Rng) {
    c.at_most("anticommutation", Ok(anticommutation_defect()), 0.0);

    let (mut assoc, mut rev, mut conj, mut inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..1000 {
        let n = 1 + k % 6;
        let (a, b, d) = (random_mv(rng, n), random_mv(rng, n), random_mv(rng, n));
        let scale3 = a.norm() * b.norm() * d.norm();
        let scale2 = a.norm() * b.norm();
        let ab = &a * &b;
        assoc = assoc.max((&ab * &d).distance(&(&a * &(&b * &d))) / scale3);
        rev = rev.max(ab.reversion().distance(&(&b.reversion() * &a.reversion())) / scale2);
        conj = conj.max(ab.conjugation().distance(&(&b.conjugation() * &a.conjugation())) / scale2);
        inv = inv.max(ab.involution().distance(&(&a.involution() * &b.involution())) / scale2);
    }
    c.at_most("associativity", Ok(assoc), 1e-10);
    c.at_most("reversion_anti_automorphism", Ok(rev), 1e-10);
    c.at_most("conjugation_anti_automorphism", Ok(conj), 1e-10);
    c.at_most("involution_automorphism", Ok(inv), 1e-10);

    let mut sq = 0.0f64;
    for k in 0..200 {
        let n = 1 + k % 6;
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = Multivector::vector(n, &v).expect("n coordinates");
        let r2 = x.norm_sqr();
        sq = sq.max((&(&x * &x) + &Multivector::scalar(n, r2)).max_abs() / r2);
    }
    c.at_most("vector_square", Ok(sq), 1e-13);

    let (dd, lap) = dirac_square_defect(rng);
    c.at_most("dirac_square_is_minus_laplacian", Ok(dd), 1e-12);
    c.at_most("laplacian_stencil_exact_on_quadratics", Ok(lap), 1e-12);
}

// ---------------------------------------------------------------- group

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn sign_canonical(c: i64, d: i64) -> (i64, i64) {
    if c < 0 || (c == 0 && d < 0) {
        (-c, -d)
    } else {
        (c, d)
    }
}

/// Bottom rows of the bounded `n = 1` enumeration against all coprime pairs.
fn sl2z_mismatch(bound: i64, max_word_length: usize) -> Result<f64> {
    let gens = gamma_p_generators(1, 0)?;
    let out = enumerate_group(&gens, &EnumerationOptions::for_level(1, max_word_length, bound as f64));
    let found: BTreeSet<(i64, i64)> = out
        .iter()
        .map(|g| sign_canonical(g.matrix.c.scalar_part().round() as i64, g.matrix.d.scalar_part().round() as i64))
        .collect();
    let r = (bound as f64).sqrt() as i64 + 1;
    let mut oracle = BTreeSet::new();
    for c in -r..=r {
        for d in -r..=r {
            if c * c + d * d <= bound && gcd(c, d) == 1 {
                oracle.insert(sign_canonical(c, d));
            }
        }
    }
    Ok(found.symmetric_difference(&oracle).count() as f64)
}

/// Entrywise test that `a - 1, b, c, d - 1` have integer coefficients divisible by `level`.
fn congruent_mod(m: &VahlenMatrix, level: i64) -> bool {
    let n = m.n();
    let one = Multivector::one(n);
    [&m.a - &one, m.b.clone(), m.c.clone(), &m.d - &one]
        .iter()
        .flat_map(|e| e.coeffs().to_vec())
        .all(|v| v.round() as i64 % level == 0)
}

fn upper_point(rng: &mut ChaCha8Rng, n: usize) -> Paravector {
    let mut coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    coords.push(rng.gen_range(0.2..2.0));
    Paravector::new(coords)
}

fn paravector_distance(a: &Paravector, b: &Paravector) -> f64 {
    a.sub(b).norm()
}

fn group(c: &mut Collector, rng: &mut ChaCha8Rng) {
    c.at_most("sl2z_bottom_rows_match_coprime_pairs", sl2z_mismatch(25, 24), 0.0);

    let elems: Vec<VahlenMatrix> = match gamma_p_generators(2, 1) {
        Ok(g) => enumerate_group(&g, &EnumerationOptions::for_level(2, 5, 20.0))
            .into_iter()
            .map(|w| w.matrix)
            .collect(),
        Err(e) => {
            c.at_most("congruence_matches_mod_n_oracle", Err(e), 0.0);
            return;
        }
    };
    let congruence = (|| -> Result<f64> {
        let mut bad = 0usize;
        for level in [2u32, 3, 4] {
            for m in &elems {
                if in_congruence_subgroup(m, level, 1)? != congruent_mod(m, i64::from(level)) {
                    bad += 1;
                }
            }
        }
        Ok(bad as f64)
    })();
    c.at_most("congruence_matches_mod_n_oracle", congruence, 0.0);

    let closure = (|| -> Result<f64> {
        let sub: Vec<&VahlenMatrix> = elems
            .iter()
            .filter(|m| in_congruence_subgroup(m, 2, 1).unwrap_or(false))
            .collect();
        let mut bad = 0usize;
        for a in &sub {
            if !in_congruence_subgroup(&a.inverse(), 2, 1)? {
                bad += 1;
            }
            for b in &sub {
                if !in_congruence_subgroup(&a.mul(b), 2, 1)? {
                    bad += 1;
                }
            }
        }
        Ok(bad as f64)
    })();
    c.at_most("congruence_subgroup_closure", closure, 0.0);

    let big: Vec<VahlenMatrix> = match gamma_p_generators(3, 1) {
        Ok(g) => enumerate_group(&g, &EnumerationOptions::for_level(1, 5, 12.0))
            .into_iter()
            .map(|w| w.matrix)
            .collect(),
        Err(e) => {
            c.at_most("action_homomorphism", Err(e), 1e-9);
            return;
        }
    };
    let mut hom = Ok(0.0f64);
    let mut below = 0usize;
    let mut vahlen = 0.0f64;
    let mut cocycle = Ok(0.0f64);
    for k in 0..500 {
        let m1 = big.choose(rng).expect("non-empty");
        let m2 = big.choose(rng).expect("non-empty");
        let x = upper_point(rng, 3);
        let prod = m1.mul(m2);
        vahlen = vahlen.max(prod.vahlen_defect()).max(m1.inverse().vahlen_defect());
        let step = (|| -> Result<(f64, bool)> {
            let lhs = prod.apply(&x)?;
            let rhs = m1.apply(&m2.apply(&x)?)?;
            Ok((paravector_distance(&lhs, &rhs) / (1.0 + lhs.norm()), lhs.last() > 0.0))
        })();
        hom = hom.and_then(|w| step.map(|(d, up)| {
            below += usize::from(!up);
            w.max(d)
        }));
        if k < 100 {
            let step = (|| -> Result<f64> {
                let j12 = prod.automorphy_factor(&x)?;
                let split = &m2.automorphy_factor(&x)? * &m1.automorphy_factor(&m2.apply(&x)?)?;
                Ok(j12.distance(&split) / j12.norm())
            })();
            cocycle = cocycle.and_then(|w| step.map(|d| w.max(d)));
        }
    }
    c.at_most("action_homomorphism", hom, 1e-9);
    c.at_most("half_space_preserved", Ok(below as f64), 0.0);
    c.at_most("vahlen_closure", Ok(vahlen), VAHLEN_TOL);
    c.at_most("automorphy_cocycle", cocycle, 1e-9);

    let complex = (|| -> Result<f64> {
        let gens = gamma_p_generators(1, 0)?;
        let sl2 = enumerate_group(&gens, &EnumerationOptions::for_level(1, 8, 30.0));
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let m = &sl2.choose(rng).expect("non-empty").matrix;
            let x = upper_point(rng, 1);
            let z = Complex::new(x.coords()[0], x.coords()[1]);
            let [a, b, cc, d] = m.entries().map(|e| e.scalar_part());
            let w = (z * a + b) / (z * cc + d);
            let y = m.apply(&x)?;
            worst = worst.max((Complex::new(y.coords()[0], y.coords()[1]) - w).norm() / (1.0 + w.norm()));
        }
        Ok(worst)
    })();
    c.at_most("complex_reduction_n1", complex, 1e-12);
}

// ---------------------------------------------------------------- kernels

fn kernels(c: &mut Collector) {
    let mono = (|| -> Result<f64> {
        let mut bad = 0usize;
        for dim in 2..=5 {
            for order in 0..=3 {
                for m in MultiIndex::all_of_order(dim, order) {
                    let q = q_m(&m, dim)?;
                    if !dirac_apply_symbolic(&q, DiracVariant::CauchyRiemann)?.is_zero() {
                        bad += 1;
                    }
                }
            }
        }
        Ok(bad as f64)
    })();
    c.at_most("symbolic_monogenicity", mono, 0.0);

    let homog = (|| -> Result<f64> {
        let mut bad = 0usize;
        for dim in 2..=5 {
            for order in 0..=3 {
                for m in MultiIndex::all_of_order(dim, order) {
                    let q = q_m(&m, dim)?;
                    let expect = -((dim - 1) as i64) - i64::from(order);
                    if !q.is_zero() && q.homogeneity_degree() != Some(expect) {
                        bad += 1;
                    }
                }
            }
        }
        Ok(bad as f64)
    })();
    c.at_most("homogeneity_degree", homog, 0.0);

    let commute = (|| -> Result<f64> {
        let mut bad = 0usize;
        for dim in 2..=4 {
            let q = cauchy_kernel_q0(dim)?;
            for i in 0..dim {
                for j in i + 1..dim {
                    bad += usize::from(q.partial(i).partial(j) != q.partial(j).partial(i));
                }
            }
        }
        Ok(bad as f64)
    })();
    c.at_most("partials_commute", commute, 0.0);

    let fd = (|| -> Result<f64> {
        let q = cauchy_kernel_q0(3)?.compile();
        let mut worst = f64::INFINITY;
        for axis in 0..3 {
            let exact = cauchy_kernel_q0(3)?.partial(axis).compile();
            for x in [[0.7, -0.4, 0.3], [-1.2, 0.5, 0.9], [0.2, 0.8, -0.6]] {
                let e = exact.evaluate(&x)?;
                let err = |h: f64| -> Result<f64> {
                    let (mut p, mut m) = (x.to_vec(), x.to_vec());
                    p[axis] += h;
                    m[axis] -= h;
                    Ok((&q.evaluate(&p)? - &q.evaluate(&m)?).scale(0.5 / h).distance(&e))
                };
                worst = worst.min((err(1e-2)? / err(5e-3)?).log2());
            }
        }
        Ok(worst)
    })();
    c.at_least("finite_difference_order", fd, 1.9);
}

// ---------------------------------------------------------------- series

fn shifted(x: &[f64], w: &[f64]) -> Vec<f64> {
    x.iter().zip(w).map(|(a, b)| a + b).collect()
}

fn series(c: &mut Collector, rng: &mut ChaCha8Rng) {
    let lattice = Lattice::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.3, 1.2, 0.0]]);
    let lattice = match lattice {
        Ok(l) => l,
        Err(e) => {
            c.at_most("periodicity_within_tail", Err(e), 1.0);
            return;
        }
    };
    let point = |rng: &mut ChaCha8Rng| vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.3..0.8)];

    let m = MultiIndex::new(vec![2, 1, 1]);
    let radius = 8.0;
    let rows = (0..20)
        .map(|_| {
            let x = point(rng);
            let a = eisenstein_epsilon(&m, &lattice, &x, radius)?;
            let b = eisenstein_epsilon(&m, &lattice, &shifted(&x, &lattice.generators()[0]), radius)?;
            let d = eisenstein_epsilon(&m, &lattice, &x, 2.0 * radius)?;
            Ok([
                a.value.distance(&b.value) / (a.tail_bound + b.tail_bound),
                a.value.distance(&d.value) / a.tail_bound,
                d.tail_bound / a.tail_bound,
            ])
        })
        .collect::<Result<Vec<[f64; 3]>>>();
    let worst = |i: usize| share(&rows).map(|v| v.iter().map(|r| r[i]).fold(0.0, f64::max));
    c.at_most("periodicity_within_tail", worst(0), 1.0);
    c.at_most("radius_doubling_within_tail", worst(1), 1.0);
    c.below("tail_shrinks_when_radius_doubles", worst(2), 1.0);

    let certified = (|| -> Result<f64> {
        let m = MultiIndex::new(vec![1, 1, 1]);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let x = point(rng);
            let r = rng.gen_range(4.0..8.0);
            let a = eisenstein_epsilon(&m, &lattice, &x, r)?;
            let b = eisenstein_epsilon(&m, &lattice, &x, r + rng.gen_range(1.0..8.0))?;
            worst = worst.max(a.value.distance(&b.value) / a.tail_bound);
        }
        Ok(worst)
    })();
    c.at_most("tail_bound_certifies_larger_radii", certified, 1.0);

    let twisted = (|| -> Result<f64> {
        let m = MultiIndex::new(vec![1, 2, 0]);
        let x = [0.2, -0.1, 0.5];
        let mut worst = 0.0f64;
        for ch in BundleCharacter::all(2) {
            let a = eisenstein_twisted(&m, &lattice, ch, &x, 10.0)?;
            for j in 0..2 {
                let b = eisenstein_twisted(&m, &lattice, ch, &shifted(&x, &lattice.generators()[j]), 10.0)?;
                let expect = if ch.is_twisted(j) { -&a.value } else { a.value.clone() };
                worst = worst.max(b.value.distance(&expect) / (a.tail_bound + b.tail_bound));
            }
        }
        Ok(worst)
    })();
    c.at_most("twisted_periodicity_within_tail", twisted, 1.0);

    let rank0 = (|| -> Result<f64> {
        let trivial = Lattice::trivial(3);
        let m = MultiIndex::new(vec![0, 1, 1]);
        let x = [0.4, -0.2, 0.7];
        let s = eisenstein_epsilon(&m, &trivial, &x, 10.0)?;
        let t = torus_cauchy_kernel(&trivial, &x, &[0.0; 3], 10.0)?;
        Ok(s.value.distance(&q_m(&m, 3)?.evaluate(&x)?)
            + t.value.distance(&cauchy_kernel_q0(3)?.evaluate(&x)?)
            + s.tail_bound
            + t.tail_bound)
    })();
    c.at_most("rank_zero_matches_kernel", rank0, 0.0);

    let decay = (|| -> Result<f64> {
        let w = Paravector::new(vec![0.1, 0.05, 0.0, 0.0]);
        let opts = OrbitOptions::new(1, 3, 20.0, 8);
        let norms = [2.0, 4.0, 8.0]
            .iter()
            .map(|&t| Ok(poincare_series(&Paravector::new(vec![0.0, 0.0, 0.0, t]), &w, 0.1, &opts)?.value.norm()))
            .collect::<Result<Vec<f64>>>()?;
        Ok((norms[1] / norms[0]).max(norms[2] / norms[1]))
    })();
    c.below("poincare_decreases_toward_cusp", decay, 1.0);

    let automorphy = (|| -> Result<f64> {
        let opts = OrbitOptions::new(1, 3, 30.0, 8);
        let x = Paravector::new(vec![0.1, 0.2, 0.3, 0.8]);
        let y = Paravector::new(vec![-0.3, 0.1, 0.2, 0.6]);
        let reps = enumerate_coset_reps(3, 1, 3, 10.0, 8)?;
        let m = reps
            .iter()
            .find(|m| m.c.norm() > 0.0)
            .ok_or_else(|| Error::Domain("no non-parabolic coset".into()))?;
        let cx = hyperbolic_cauchy_kernel(&x, &y, &opts)?;
        let cm = hyperbolic_cauchy_kernel(&m.apply(&x)?, &y, &opts)?;
        let lhs = &m.automorphy_factor(&x)? * &cm.value;
        Ok(lhs.distance(&cx.value) / (cx.tail_bound + cm.tail_bound))
    })();
    c.at_most("hyperbolic_kernel_automorphy_within_tail", automorphy, 1.0);
}

// ---------------------------------------------------------------- bvp

fn cube(dim: usize, n: usize) -> Result<VoxelDomain> {
    VoxelDomain::from_shape(
        &Shape::Box {
            lo: vec![-1.0; dim],
            hi: vec![1.0; dim],
        },
        n,
    )
}

/// `z_k = x_k + e_1 e_(k+1) x_0`.
fn fueter(dim: usize, k: usize, x: &[f64]) -> Multivector {
    let e1k = &Multivector::basis_vector(dim, 1) * &Multivector::basis_vector(dim, k + 1);
    &Multivector::scalar(dim, x[k]) + &e1k.scale(x[0])
}

/// A monogenic quadratic: `z_1^2 + z_1` in the plane, `z_1^2 + z_1 z_2 + z_2 z_1` in space.
pub fn monogenic_quadratic(dim: usize, x: &[f64]) -> Multivector {
    let z1 = fueter(dim, 1, x);
    if dim == 2 {
        &(&z1 * &z1) + &z1
    } else {
        let z2 = fueter(dim, 2, x);
        &(&(&z1 * &z1) + &(&z1 * &z2)) + &(&z2 * &z1)
    }
}

/// A smooth field with non-zero Dirac derivative.
pub fn smooth_field(dim: usize, x: &[f64]) -> Multivector {
    let mut v = monogenic_quadratic(dim, x);
    v += &Multivector::basis_vector(dim, 1).scale(x[0].exp() * x[1].cos());
    v += &Multivector::scalar(dim, x[dim - 1] * x[dim - 1]);
    v
}

/// Lattice vertices of spacing `step` in `[-r, r]^dim`.
pub fn probe_grid(dim: usize, r: f64, step: f64) -> Vec<Vec<f64>> {
    let k = (r / step).round() as i64;
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (-k..=k).map(move |i| {
                    let mut q = p.clone();
                    q.push(i as f64 * step);
                    q
                })
            })
            .collect();
    }
    out
}

fn min_order(res: &[f64]) -> f64 {
    res.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min)
}

fn max_ratio(res: &[f64]) -> f64 {
    res.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn bp_order(dim: usize, levels: &[usize], probes: &[Vec<f64>]) -> Result<f64> {
    let k = FlatKernel::new(dim)?;
    let mut res = Vec::new();
    for &n in levels {
        res.push(borel_pompeiu_residual_at(&cube(dim, n)?, |x| monogenic_quadratic(dim, x), &k, probes)?.residual);
    }
    Ok(min_order(&res))
}

/// `(‖P²f − Pf‖, ‖Q F g‖, ‖P m − m‖)` divided by the Borel-Pompeiu residual.
fn bergman_ratios(dim: usize, n: usize) -> Result<[f64; 3]> {
    let k = FlatKernel::new(dim)?;
    let dom = cube(dim, n)?;
    let proj = BergmanProjector::new(&dom, &k, BergmanOptions::default())?;
    let bp = borel_pompeiu_residual(&dom, |x| smooth_field(dim, x), &k, BP_MIN_DEPTH)?.residual;
    let f = Field::from_fn(&dom, |x| smooth_field(dim, x));
    let pf = proj.project(&f)?;
    let idem = proj.project(&pf)?.sub(&pf).max_norm();
    let fg = cauchy_transform(&dom, &BoundaryTrace::from_fn(&dom, |x| smooth_field(dim, x)), &k)?;
    let qfg = proj.complement(&fg)?.max_norm();
    let m = Field::from_fn(&dom, |x| monogenic_quadratic(dim, x));
    let fixed = proj.project(&m)?.sub(&m).max_norm();
    Ok([idem / bp, qfg / bp, fixed / bp])
}

fn bvp(c: &mut Collector) {
    c.at_least(
        "borel_pompeiu_order_2d",
        bp_order(2, &[16, 32, 64], &probe_grid(2, 0.5, 0.25)),
        1.0,
    );
    c.at_least(
        "borel_pompeiu_order_3d",
        bp_order(3, &[6, 12, 24], &probe_grid(3, 1.0 / 3.0, 1.0 / 3.0)),
        1.0,
    );

    let rinv = (|| -> Result<f64> {
        let k = FlatKernel::new(2)?;
        let mut res = Vec::new();
        for n in [16, 32, 64] {
            let dom = cube(2, n)?;
            let f = Field::from_fn(&dom, |x| smooth_field(2, x));
            let dt = dirac_fd(&dom, &teodorescu(&dom, &f, &k)?);
            res.push(dt.sub(&f).max_norm_on(&dom.cells_at_distance(0.25)));
        }
        Ok(max_ratio(&res))
    })();
    c.below("teodorescu_right_inverse_refines", rinv, 1.0);

    for (dim, n) in [(2, 16), (2, 32), (3, 6)] {
        let r = bergman_ratios(dim, n);
        let tag = format!("{dim}d_{n}");
        let pick = |i: usize| share(&r).map(|v| v[i]);
        c.at_most(&format!("bergman_idempotency_over_bp_{tag}"), pick(0), 5.0);
        c.at_most(&format!("bergman_annihilates_cauchy_range_over_bp_{tag}"), pick(1), 5.0);
        c.at_most(&format!("bergman_fixes_monogenic_over_bp_{tag}"), pick(2), 5.0);
    }

    let stokes = (|| -> Result<[f64; 4]> {
        let k = FlatKernel::new(2)?;
        let ms = ManufacturedStokes::new([-1.0, -1.0], [1.0, 1.0]);
        let opts = StokesOptions::default();
        let (mut mom, mut div, mut bnd) = (vec![], vec![], vec![]);
        for n in [8, 16, 32] {
            let dom = cube(2, n)?;
            let forcing = Field::from_fn(&dom, |x| ms.forcing(x, 1.0));
            let d = stokes_solve(&dom, &forcing, 1.0, &k, &opts)?.diagnostics;
            mom.push(d.momentum);
            div.push(d.divergence);
            bnd.push(d.boundary);
        }
        Ok([max_ratio(&mom), max_ratio(&div), max_ratio(&bnd), div[2]])
    })();
    let pick = |i: usize| share(&stokes).map(|v| v[i]);
    c.below("stokes_momentum_decreases", pick(0), 1.0);
    c.below("stokes_divergence_decreases", pick(1), 1.0);
    c.below("stokes_boundary_decreases", pick(2), 1.0);
    c.at_most("stokes_finest_divergence", pick(3), 1e-2);
}
