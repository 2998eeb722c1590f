use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer translation action on `R^(n+1)`.
///
/// The first `p` coordinates are translated by the matching integers. With
/// `twisted` the last coordinate is glide-reflected, `x_n -> (-1)^(m_n) x_n + m_n`,
/// which for `p = n` gives the Klein-bottle quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeAction {
    pub p: usize,
    pub twisted: bool,
}

impl LatticeAction {
    pub fn apply(&self, m: &[i64], x: &[f64]) -> Result<Vec<f64>> {
        if m.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: m.len(),
            });
        }
        let last = x.len() - 1;
        let translated = if self.twisted { self.p.min(last) } else { self.p.min(x.len()) };
        let mut y = x.to_vec();
        for i in 0..translated {
            y[i] += m[i] as f64;
        }
        if self.twisted {
            let sign = if m[last].rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            y[last] = sign * x[last] + m[last] as f64;
        }
        Ok(y)
    }

    /// Inverse of `apply(m, ·)`.
    pub fn apply_inverse(&self, m: &[i64], y: &[f64]) -> Result<Vec<f64>> {
        if m.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: m.len(),
            });
        }
        let last = y.len() - 1;
        let translated = if self.twisted { self.p.min(last) } else { self.p.min(y.len()) };
        let mut x = y.to_vec();
        for i in 0..translated {
            x[i] -= m[i] as f64;
        }
        if self.twisted {
            let sign = if m[last].rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            x[last] = sign * (y[last] - m[last] as f64);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_is_identity() {
        let act = LatticeAction { p: 2, twisted: true };
        let x = [0.1, 0.2, 0.3];
        assert_eq!(act.apply(&[0, 0, 0], &x).unwrap(), x.to_vec());
    }

    #[test]
    fn cylinder_translation() {
        let act = LatticeAction { p: 1, twisted: false };
        let y = act.apply(&[1, 5, 7], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(y, vec![1.1, 0.2, 0.3]);
    }

    #[test]
    fn klein_twist() {
        let act = LatticeAction { p: 2, twisted: true };
        let y = act.apply(&[0, 0, 1], &[0.1, 0.2, 0.3]).unwrap();
        assert!((y[2] - 0.7).abs() < 1e-15);
        let back = act.apply_inverse(&[0, 0, 1], &y).unwrap();
        assert!((back[2] - 0.3).abs() < 1e-15);
    }
}
