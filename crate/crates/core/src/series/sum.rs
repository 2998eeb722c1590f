use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::{Lattice, LatticePoint};
use crate::clifford::Multivector;
use crate::error::{Error, Result};

/// A truncated series value with its truncation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: Multivector,
    pub truncation_radius: f64,
    /// Bound on the omitted terms. Rigorous when `certified`, an estimate otherwise.
    pub tail_bound: f64,
    pub terms_summed: usize,
    pub certified: bool,
}

/// Neumaier-compensated accumulator over multivector coefficients.
#[derive(Debug, Clone)]
pub struct CompensatedSum {
    sum: Vec<f64>,
    comp: Vec<f64>,
    n: usize,
}

impl CompensatedSum {
    pub fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; 1 << n],
            comp: vec![0.0; 1 << n],
            n,
        }
    }

    pub fn add(&mut self, m: &Multivector) {
        for ((s, c), &v) in self.sum.iter_mut().zip(&mut self.comp).zip(m.coeffs()) {
            let t = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - t) + v;
            } else {
                *c += (v - t) + *s;
            }
            *s = t;
        }
    }

    pub fn value(&self) -> Multivector {
        let coeffs = self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect();
        Multivector::from_coeffs(self.n, coeffs).expect("length matches by construction")
    }
}

/// Decay model `|term(ω)| <= constant |x + ω|^(-decay)` for certified tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub constant: f64,
    pub decay: f64,
    pub x_norm: f64,
}

/// Sums `term` over lattice points of norm at most `radius`, nearest first.
///
/// Terms are evaluated in parallel; the reduction order is fixed.
pub fn lattice_sum<F>(
    lattice: &Lattice,
    n: usize,
    radius: f64,
    tail: Option<TailModel>,
    term: F,
) -> Result<SeriesResult>
where
    F: Fn(&LatticePoint) -> Result<Multivector> + Sync,
{
    let points = lattice.points_in_ball(radius)?;
    let terms: Vec<Result<Multivector>> = points.par_iter().map(&term).collect();
    let mut acc = CompensatedSum::new(n);
    for t in terms {
        let t = t?;
        if t.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.n(),
            });
        }
        acc.add(&t);
    }
    let tail_bound = match tail {
        Some(m) => lattice.tail_bound(radius, m.constant, m.decay, m.x_norm),
        None if lattice.rank() == 0 => 0.0,
        None => f64::INFINITY,
    };
    Ok(SeriesResult {
        value: acc.value(),
        truncation_radius: radius,
        tail_bound,
        terms_summed: points.len(),
        certified: tail.is_some() || lattice.rank() == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = CompensatedSum::new(0);
        acc.add(&Multivector::scalar(0, 1e16));
        for _ in 0..10 {
            acc.add(&Multivector::scalar(0, 1.0));
        }
        acc.add(&Multivector::scalar(0, -1e16));
        assert_eq!(acc.value().scalar_part(), 10.0);
    }

    #[test]
    fn trivial_lattice_sums_one_term() {
        let l = Lattice::trivial(2);
        let r = lattice_sum(&l, 1, 3.0, None, |_| Ok(Multivector::scalar(1, 2.5))).unwrap();
        assert_eq!(r.terms_summed, 1);
        assert_eq!(r.tail_bound, 0.0);
        assert_eq!(r.value.scalar_part(), 2.5);
    }
}
