use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::sum::{lattice_sum, CompensatedSum, SeriesResult, TailModel};
use crate::clifford::{Multivector, Paravector};
use crate::error::{Error, Result};
use crate::moebius::{enumerate_coset_reps, VahlenMatrix};

/// Truncation parameters shared by the orbit series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitOptions {
    /// Generators are translations by `1, e_1, ..., e_p` and the inversion.
    pub p: usize,
    /// Congruence level `N >= 2`.
    pub level: u32,
    /// Cosets are kept while `|c|^2 + |d|^2 <= norm_bound`.
    pub norm_bound: f64,
    pub max_word_length: usize,
    /// Radius for the inner sum over the translation subgroup.
    #[serde(default = "default_inner_radius")]
    pub inner_radius: f64,
}

fn default_inner_radius() -> f64 {
    30.0
}

impl OrbitOptions {
    pub fn new(p: usize, level: u32, norm_bound: f64, max_word_length: usize) -> Self {
        Self {
            p,
            level,
            norm_bound,
            max_word_length,
            inner_radius: default_inner_radius(),
        }
    }
}

/// `q_0(y) = ȳ / |y|^(n+1)` for a Clifford-group element `y`.
pub fn q0_clifford(y: &Multivector) -> Result<Multivector> {
    let r = y.norm();
    if r < 1e-12 {
        return Err(Error::Pole("q_0 evaluated at 0".into()));
    }
    Ok(y.conjugation().scale(r.powi(-(y.n() as i32 + 1))))
}

fn check_upper(x: &Paravector, what: &str) -> Result<()> {
    if x.last() <= 0.0 {
        return Err(Error::Domain(format!(
            "{what} must lie in the upper half-space, last coordinate is {}",
            x.last()
        )));
    }
    Ok(())
}

fn coset_reps(n: usize, opts: &OrbitOptions) -> Result<Vec<VahlenMatrix>> {
    if opts.level < 2 {
        return Err(Error::Domain(format!(
            "orbit series need level N >= 2, got {}",
            opts.level
        )));
    }
    if opts.p >= n {
        return Err(Error::Domain(format!("p = {} must be below n = {n}", opts.p)));
    }
    enumerate_coset_reps(n, opts.p, opts.level, opts.norm_bound, opts.max_word_length)
}

/// Translation subgroup `N (Z + Z e_1 + ... + Z e_p)` of the congruence group.
pub fn translation_lattice(n: usize, p: usize, level: u32) -> Result<Lattice> {
    let axes: Vec<usize> = (0..=p).collect();
    Lattice::coordinate(n + 1, &axes, level as f64)
}

fn hecke_factor(x: &Paravector, j: &Multivector, sigma: f64) -> f64 {
    (x.last() / j.norm_sqr()).powf(sigma)
}

/// Sums per-coset terms and estimates the omitted cosets by the outer half shell.
fn orbit_sum(
    n: usize,
    reps: &[VahlenMatrix],
    norm_bound: f64,
    inner_tails: f64,
    terms: Vec<Multivector>,
) -> SeriesResult {
    let mut acc = CompensatedSum::new(n);
    let mut shell = CompensatedSum::new(n);
    for (m, t) in reps.iter().zip(&terms) {
        acc.add(t);
        if m.bottom_row_norm_sqr() > 0.5 * norm_bound {
            shell.add(t);
        }
    }
    SeriesResult {
        value: acc.value(),
        truncation_radius: norm_bound.sqrt(),
        tail_bound: inner_tails + shell.value().norm(),
        terms_summed: terms.len(),
        certified: false,
    }
}

/// `Σ_{T[N] \ Γ_p[N]} (x_n / |cx + d|^2)^σ q_0(cx + d)`.
pub fn hyperbolic_eisenstein(x: &Paravector, sigma: f64, opts: &OrbitOptions) -> Result<SeriesResult> {
    check_upper(x, "x")?;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("Hecke exponent must be positive, got {sigma}")));
    }
    let n = x.n();
    let reps = coset_reps(n, opts)?;
    let terms = reps
        .iter()
        .map(|m| {
            let j = m.denominator(x);
            Ok(q0_clifford(&j)?.scale(hecke_factor(x, &j, sigma)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(orbit_sum(n, &reps, opts.norm_bound, 0.0, terms))
}

/// Inner translation sum `Σ_b q_0(base + b)` with its certified tail.
fn translation_sum(lattice: &Lattice, base: &Paravector, radius: f64) -> Result<SeriesResult> {
    let n = base.n();
    let tail = TailModel {
        constant: 1.0,
        decay: n as f64,
        x_norm: base.norm(),
    };
    lattice_sum(lattice, n, radius, Some(tail), |p| {
        let y = Paravector::new(base.coords().iter().zip(&p.point).map(|(a, b)| a + b).collect());
        if y.norm() < 1e-9 {
            return Err(Error::Pole(format!("orbit point hits the pole at {:?}", y.coords())));
        }
        q0_clifford(&y.to_multivector())
    })
}

fn check_inner_rank(n: usize, p: usize) -> Result<()> {
    if p + 2 > n {
        return Err(Error::Unsupported(format!(
            "full-group sum needs p <= n - 2 so the translation sum converges; got p = {p}, n = {n}"
        )));
    }
    Ok(())
}

/// `Σ_{M in Γ_p[N]} (x_n / |cx + d|^2)^σ q_0(cx + d) q_0(w + M<x>)`.
///
/// The group is split into cosets of the translation subgroup; the translation
/// sum for each coset carries a certified tail.
pub fn poincare_series(
    x: &Paravector,
    w: &Paravector,
    sigma: f64,
    opts: &OrbitOptions,
) -> Result<SeriesResult> {
    check_upper(x, "x")?;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("Hecke exponent must be positive, got {sigma}")));
    }
    let n = x.n();
    if w.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: w.n(),
        });
    }
    check_inner_rank(n, opts.p)?;
    let lattice = translation_lattice(n, opts.p, opts.level)?;
    let reps = coset_reps(n, opts)?;
    let mut tails = 0.0;
    let mut terms = Vec::with_capacity(reps.len());
    for m in &reps {
        let j = m.denominator(x);
        let factor = q0_clifford(&j)?.scale(hecke_factor(x, &j, sigma));
        let inner = translation_sum(&lattice, &w.add(&m.apply(x)?), opts.inner_radius)?;
        tails += factor.norm() * inner.tail_bound;
        terms.push(&factor * &inner.value);
    }
    Ok(orbit_sum(n, &reps, opts.norm_bound, tails, terms))
}

/// `C(x, y) = Σ_{M in Γ_p[N]} conj(cx + d) / |cx + d|^n · q_0(y - M<x>)`.
pub fn hyperbolic_cauchy_kernel(
    x: &Paravector,
    y: &Paravector,
    opts: &OrbitOptions,
) -> Result<SeriesResult> {
    check_upper(x, "x")?;
    check_upper(y, "y")?;
    let n = x.n();
    if y.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.n(),
        });
    }
    check_inner_rank(n, opts.p)?;
    let lattice = translation_lattice(n, opts.p, opts.level)?;
    let reps = coset_reps(n, opts)?;
    let mut tails = 0.0;
    let mut terms = Vec::with_capacity(reps.len());
    for m in &reps {
        let factor = m.automorphy_factor(x)?;
        // the translation lattice is symmetric, so -b may be summed as +b
        let inner = translation_sum(&lattice, &y.sub(&m.apply(x)?), opts.inner_radius)?;
        tails += factor.norm() * inner.tail_bound;
        terms.push(&factor * &inner.value);
    }
    Ok(orbit_sum(n, &reps, opts.norm_bound, tails, terms))
}

/// Series values at several Hecke exponents and their linear extrapolation to `σ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeckeExtrapolation {
    pub sigmas: Vec<f64>,
    pub values: Vec<SeriesResult>,
    pub extrapolated: Multivector,
    /// Norm of the fitted slope in `σ`.
    pub slope_norm: f64,
}

pub const HECKE_SIGMAS: [f64; 3] = [0.2, 0.1, 0.05];

/// Least-squares line through `(σ_i, value_i)`, evaluated at `σ = 0`.
pub fn hecke_extrapolate<F>(sigmas: &[f64], eval: F) -> Result<HeckeExtrapolation>
where
    F: Fn(f64) -> Result<SeriesResult>,
{
    if sigmas.len() < 2 {
        return Err(Error::Domain("extrapolation needs at least two exponents".into()));
    }
    let values = sigmas.iter().map(|&s| eval(s)).collect::<Result<Vec<_>>>()?;
    let k = sigmas.len() as f64;
    let mean_s = sigmas.iter().sum::<f64>() / k;
    let var: f64 = sigmas.iter().map(|s| (s - mean_s).powi(2)).sum();
    if var == 0.0 {
        return Err(Error::Domain("extrapolation needs distinct exponents".into()));
    }
    let n = values[0].value.n();
    let mut mean_v = Multivector::zero(n);
    for v in &values {
        mean_v += &v.value.scale(1.0 / k);
    }
    let mut slope = Multivector::zero(n);
    for (s, v) in sigmas.iter().zip(&values) {
        slope += &(&v.value - &mean_v).scale((s - mean_s) / var);
    }
    let extrapolated = &mean_v - &slope.scale(mean_s);
    Ok(HeckeExtrapolation {
        sigmas: sigmas.to_vec(),
        values,
        extrapolated,
        slope_norm: slope.norm(),
    })
}
