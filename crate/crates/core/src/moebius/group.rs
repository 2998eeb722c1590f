use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::VahlenMatrix;
use crate::clifford::{Multivector, Paravector};
use crate::error::{Error, Result};

/// A group element together with the generator word that produced it.
///
/// Word entries index into the extended generator list (generators followed by
/// their inverses) returned by [`extended_generators`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupWord {
    pub matrix: VahlenMatrix,
    pub word: Vec<usize>,
}

/// Which quantity the enumeration bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormBound {
    /// `|c|^2 + |d|^2`.
    #[default]
    BottomRow,
    /// `|a|^2 + |b|^2 + |c|^2 + |d|^2`.
    Frobenius,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationOptions {
    pub max_word_length: usize,
    pub norm_bound: f64,
    /// Identify `M` with `-M`.
    pub pm_quotient: bool,
    #[serde(default)]
    pub bound: NormBound,
}

impl EnumerationOptions {
    /// Defaults the `±` quotient from the level: on for `N = 1`, off otherwise.
    pub fn for_level(level: u32, max_word_length: usize, norm_bound: f64) -> Self {
        Self {
            max_word_length,
            norm_bound,
            pm_quotient: level == 1,
            bound: NormBound::BottomRow,
        }
    }
}

/// Translations by `1, e_1, ..., e_p` followed by `J`, as matrices over `Cl_n`.
pub fn gamma_p_generators(n: usize, p: usize) -> Result<Vec<VahlenMatrix>> {
    if p >= n {
        return Err(Error::Domain(format!(
            "Γ_p needs p < n (got p = {p}, n = {n})"
        )));
    }
    let mut gens = Vec::with_capacity(p + 2);
    for k in 0..=p {
        let mut t = Paravector::zero(n);
        let mut coords = t.coords().to_vec();
        coords[k] = 1.0;
        t = Paravector::new(coords);
        gens.push(VahlenMatrix::translation(&t));
    }
    gens.push(VahlenMatrix::inversion(n));
    Ok(gens)
}

/// Generators followed by those inverses that are not already in the list.
pub fn extended_generators(generators: &[VahlenMatrix]) -> Vec<VahlenMatrix> {
    let mut out: Vec<VahlenMatrix> = generators.to_vec();
    for g in generators {
        let inv = g.inverse();
        if !out.iter().any(|h| h.fingerprint() == inv.fingerprint()) {
            out.push(inv);
        }
    }
    out
}

fn bound_value(m: &VahlenMatrix, bound: NormBound) -> f64 {
    match bound {
        NormBound::BottomRow => m.bottom_row_norm_sqr(),
        NormBound::Frobenius => m.frobenius_norm_sqr(),
    }
}

fn key(m: &VahlenMatrix, pm_quotient: bool) -> Vec<i64> {
    if pm_quotient {
        m.projective_fingerprint()
    } else {
        m.fingerprint()
    }
}

/// Breadth-first closure of the identity under right multiplication by the
/// generators and their inverses, pruned by the norm bound.
///
/// Output order is discovery order, which is deterministic.
pub fn enumerate_group(generators: &[VahlenMatrix], opts: &EnumerationOptions) -> Vec<GroupWord> {
    let Some(first) = generators.first() else {
        return Vec::new();
    };
    let gens = extended_generators(generators);
    let identity = VahlenMatrix::identity(first.n());
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    seen.insert(key(&identity, opts.pm_quotient), 0);
    let mut out = vec![GroupWord {
        matrix: identity,
        word: Vec::new(),
    }];
    let mut frontier: Vec<usize> = vec![0];
    for _ in 0..opts.max_word_length {
        let candidates: Vec<Vec<(VahlenMatrix, Vec<usize>)>> = frontier
            .par_iter()
            .map(|&idx| {
                let base = &out[idx];
                gens.iter()
                    .enumerate()
                    .filter_map(|(g_idx, g)| {
                        let m = base.matrix.mul(g);
                        if bound_value(&m, opts.bound) > opts.norm_bound {
                            return None;
                        }
                        let mut word = base.word.clone();
                        word.push(g_idx);
                        Some((m, word))
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (m, word) in candidates.into_iter().flatten() {
            let k = key(&m, opts.pm_quotient);
            if seen.contains_key(&k) {
                continue;
            }
            seen.insert(k, out.len());
            next.push(out.len());
            out.push(GroupWord { matrix: m, word });
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

fn integral_coeff(c: f64) -> Result<i64> {
    let r = c.round();
    if (c - r).abs() > 1e-9 {
        return Err(Error::Domain(format!("coefficient {c} is not integral")));
    }
    Ok(r as i64)
}

/// Checks membership of an entry in `N O_p`, where `O_p` is spanned over `Z` by the
/// blades `e_A`, `A ⊆ {1..p}`.
fn in_scaled_order(m: &Multivector, level: i64, p: usize) -> Result<bool> {
    let mut ok = true;
    for (blade, &c) in m.coeffs().iter().enumerate() {
        let v = integral_coeff(c)?;
        if blade >> p != 0 {
            if v != 0 {
                return Err(Error::Domain(format!(
                    "entry has a non-zero coefficient on blade {blade:#b} outside O_{p}"
                )));
            }
            continue;
        }
        if v % level != 0 {
            ok = false;
        }
    }
    Ok(ok)
}

/// Whether `a - 1, b, c, d - 1` all lie in `N O_p`.
pub fn in_congruence_subgroup(m: &VahlenMatrix, level: u32, p: usize) -> Result<bool> {
    if level == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    let n = m.n();
    let one = Multivector::one(n);
    let level = i64::from(level);
    let mut all = true;
    for entry in [&m.a - &one, m.b.clone(), m.c.clone(), &m.d - &one] {
        // Evaluate every entry so non-integral input always errors.
        all &= in_scaled_order(&entry, level, p)?;
    }
    Ok(all)
}

/// Translations `[[1, t], [0, 1]]` with `t` ranging over `{0..N-1}`-combinations of
/// `1, e_1, ..., e_p`.
fn translation_residues(n: usize, p: usize, level: u32) -> Vec<VahlenMatrix> {
    let mut out = Vec::new();
    let count = (level as usize).pow((p + 1) as u32);
    for idx in 0..count {
        let mut coords = vec![0.0; n + 1];
        let mut rem = idx;
        for c in coords.iter_mut().take(p + 1) {
            *c = (rem % level as usize) as f64;
            rem /= level as usize;
        }
        out.push(VahlenMatrix::translation(&Paravector::new(coords)));
    }
    out
}

/// One representative of `T_p[N] \ Γ_p[N]` for every bottom row `(c, d)` reached by
/// the bounded enumeration of `Γ_p`.
///
/// Two elements of `Γ_p[N]` share a left translation coset iff they share `(c, d)`,
/// so deduplication is by bottom row. Each enumerated element is also tried after
/// left translation by residues mod `N`, which adjusts `(a, b)` without moving
/// `(c, d)`. Representatives are sorted by `|c|^2 + |d|^2` and then by fingerprint.
pub fn enumerate_coset_reps(
    n: usize,
    p: usize,
    level: u32,
    norm_bound: f64,
    max_word_length: usize,
) -> Result<Vec<VahlenMatrix>> {
    if level < 2 {
        return Err(Error::Domain("coset enumeration needs level N >= 2".into()));
    }
    let gens = gamma_p_generators(n, p)?;
    let opts = EnumerationOptions {
        max_word_length,
        norm_bound,
        pm_quotient: false,
        bound: NormBound::BottomRow,
    };
    let shifts = translation_residues(n, p, level);
    let mut reps: HashMap<Vec<i64>, VahlenMatrix> = HashMap::new();
    for gw in enumerate_group(&gens, &opts) {
        let fp = gw.matrix.bottom_row_fingerprint();
        if reps.contains_key(&fp) {
            continue;
        }
        for t in &shifts {
            let m = t.mul(&gw.matrix);
            if in_congruence_subgroup(&m, level, p)? {
                reps.insert(fp, m);
                break;
            }
        }
    }
    let mut out: Vec<(Vec<i64>, VahlenMatrix)> = reps.into_iter().collect();
    out.sort_by(|(fa, a), (fb, b)| {
        a.bottom_row_norm_sqr()
            .total_cmp(&b.bottom_row_norm_sqr())
            .then_with(|| fa.cmp(fb))
    });
    Ok(out.into_iter().map(|(_, m)| m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }

    fn canonical(c: i64, d: i64) -> (i64, i64) {
        if c < 0 || (c == 0 && d < 0) {
            (-c, -d)
        } else {
            (c, d)
        }
    }

    #[test]
    fn gamma_p_generator_counts() {
        let gens = gamma_p_generators(2, 1).unwrap();
        assert_eq!(gens.len(), 3);
        assert!(gens.iter().all(VahlenMatrix::is_vahlen));
        assert!(gamma_p_generators(2, 2).is_err());
    }

    #[test]
    fn n1_generators_are_sl2z() {
        let gens = gamma_p_generators(1, 0).unwrap();
        let t = VahlenMatrix::new(
            Multivector::scalar(1, 1.0),
            Multivector::scalar(1, 1.0),
            Multivector::scalar(1, 0.0),
            Multivector::scalar(1, 1.0),
        )
        .unwrap();
        assert_eq!(gens, vec![t, VahlenMatrix::inversion(1)]);
    }

    #[test]
    fn word_length_zero_gives_identity() {
        let gens = gamma_p_generators(2, 1).unwrap();
        let out = enumerate_group(&gens, &EnumerationOptions::for_level(1, 0, 10.0));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].matrix, VahlenMatrix::identity(2));
    }

    #[test]
    fn sl2z_bottom_rows_are_coprime_pairs() {
        let gens = gamma_p_generators(1, 0).unwrap();
        let out = enumerate_group(&gens, &EnumerationOptions::for_level(1, 12, 5.0));
        let found: BTreeSet<(i64, i64)> = out
            .iter()
            .map(|g| canonical(g.matrix.c.scalar_part() as i64, g.matrix.d.scalar_part() as i64))
            .collect();
        let mut oracle = BTreeSet::new();
        for c in -3i64..=3 {
            for d in -3i64..=3 {
                if c * c + d * d <= 5 && gcd(c, d) == 1 {
                    oracle.insert(canonical(c, d));
                }
            }
        }
        assert_eq!(found, oracle);
    }

    #[test]
    fn words_reproduce_matrices() {
        let gens = gamma_p_generators(2, 1).unwrap();
        let ext = extended_generators(&gens);
        let out = enumerate_group(&gens, &EnumerationOptions::for_level(1, 4, 8.0));
        for gw in &out {
            let m = gw
                .word
                .iter()
                .fold(VahlenMatrix::identity(2), |acc, &i| acc.mul(&ext[i]));
            assert!(m.approx_eq(&gw.matrix, 1e-12));
        }
    }

    #[test]
    fn congruence_examples() {
        let id = VahlenMatrix::identity(1);
        assert!(in_congruence_subgroup(&id, 5, 0).unwrap());
        let t1 = VahlenMatrix::translation(&Paravector::new(vec![1.0, 0.0]));
        assert!(!in_congruence_subgroup(&t1, 2, 0).unwrap());
        let t2 = VahlenMatrix::translation(&Paravector::new(vec![2.0, 0.0]));
        assert!(t2.is_vahlen());
        assert!(in_congruence_subgroup(&t2, 2, 0).unwrap());
    }

    #[test]
    fn non_integral_entries_are_rejected() {
        let t = VahlenMatrix::translation(&Paravector::new(vec![0.5, 0.0]));
        assert!(matches!(in_congruence_subgroup(&t, 2, 0), Err(Error::Domain(_))));
        // e_2 lies outside O_1
        let t = VahlenMatrix::translation(&Paravector::new(vec![0.0, 0.0, 2.0]));
        assert!(in_congruence_subgroup(&t, 2, 1).is_err());
    }

    #[test]
    fn coset_reps_small_bound_is_identity_only() {
        let reps = enumerate_coset_reps(2, 1, 3, 1.0, 8).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(reps[0].approx_eq(&VahlenMatrix::identity(2), 0.0));
    }

    #[test]
    fn coset_reps_have_distinct_bottom_rows_and_belong_to_level() {
        let reps = enumerate_coset_reps(2, 1, 3, 40.0, 10).unwrap();
        assert!(reps.len() > 1);
        let rows: BTreeSet<Vec<i64>> = reps.iter().map(|m| m.bottom_row_fingerprint()).collect();
        assert_eq!(rows.len(), reps.len());
        for m in &reps {
            assert!(m.is_vahlen());
            assert!(in_congruence_subgroup(m, 3, 1).unwrap());
        }
    }
}
