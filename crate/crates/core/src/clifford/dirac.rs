use serde::{Deserialize, Serialize};

use super::Multivector;

/// Which first-order operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiracVariant {
    /// `D = sum_{j=1}^n e_j ∂/∂x_j` on `R^n`; coordinate `k` pairs with `e_{k+1}`.
    Dirac,
    /// `D = ∂/∂x_0 + sum_{j=1}^n e_j ∂/∂x_j` on `R ⊕ R^n`.
    CauchyRiemann,
}

impl DiracVariant {
    /// Basis element multiplying the partial derivative along `axis`.
    pub fn axis_element(self, n: usize, axis: usize) -> Multivector {
        match self {
            DiracVariant::Dirac => Multivector::basis_vector(n, axis + 1),
            DiracVariant::CauchyRiemann if axis == 0 => Multivector::one(n),
            DiracVariant::CauchyRiemann => Multivector::basis_vector(n, axis),
        }
    }

    /// Number of coordinates the operator differentiates in for `Cl_n`.
    pub fn coordinate_count(self, n: usize) -> usize {
        match self {
            DiracVariant::Dirac => n,
            DiracVariant::CauchyRiemann => n + 1,
        }
    }
}

fn shifted(x: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] += delta;
    y
}

/// Central-difference `Df(x)` with step `h`, multiplying from the left.
pub fn dirac_apply_fd<F>(f: F, x: &[f64], h: f64, variant: DiracVariant) -> Multivector
where
    F: Fn(&[f64]) -> Multivector,
{
    let mut acc: Option<Multivector> = None;
    for axis in 0..x.len() {
        let fp = f(&shifted(x, axis, h));
        let fm = f(&shifted(x, axis, -h));
        let n = fp.n();
        assert_eq!(
            variant.coordinate_count(n),
            x.len(),
            "point dimension does not match the operator on Cl_{n}"
        );
        let partial = (&fp - &fm).scale(0.5 / h);
        let term = &variant.axis_element(n, axis) * &partial;
        match acc.as_mut() {
            Some(a) => *a += &term,
            None => acc = Some(term),
        }
    }
    acc.expect("dirac_apply_fd needs at least one coordinate")
}

/// Standard `(2d+1)`-point Laplacian with step `h`.
pub fn laplacian_fd<F>(f: F, x: &[f64], h: f64) -> Multivector
where
    F: Fn(&[f64]) -> Multivector,
{
    let centre = f(x);
    let mut acc = Multivector::zero(centre.n());
    for axis in 0..x.len() {
        let s = &f(&shifted(x, axis, h)) + &f(&shifted(x, axis, -h));
        acc += &(&s - &centre.scale(2.0)).scale(1.0 / (h * h));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_squared_is_minus_laplacian_on_x1_squared() {
        let n = 2;
        let f = |x: &[f64]| Multivector::scalar(n, x[0] * x[0]);
        let h = 0.5;
        let x = [0.3, -0.7];
        let d2 = dirac_apply_fd(|y| dirac_apply_fd(f, y, h, DiracVariant::Dirac), &x, h, DiracVariant::Dirac);
        assert!(d2.approx_eq(&Multivector::scalar(n, -2.0), 1e-12), "{d2:?}");
    }

    #[test]
    fn constant_has_zero_derivative() {
        let f = |_: &[f64]| Multivector::scalar(3, 4.0);
        let d = dirac_apply_fd(f, &[0.1, 0.2, 0.3, 0.4], 1e-3, DiracVariant::CauchyRiemann);
        assert_eq!(d, Multivector::zero(3));
    }

    #[test]
    fn cauchy_riemann_kernel_is_monogenic_to_second_order() {
        // q_0(x) = x̄ / |x|^(n+1) in R ⊕ R^2
        let q0 = |x: &[f64]| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            let s = r2.powf(-1.5);
            Multivector::from_coeffs(2, vec![x[0] * s, -x[1] * s, -x[2] * s, 0.0]).unwrap()
        };
        let x = [0.7, -0.4, 0.9];
        let e1 = dirac_apply_fd(q0, &x, 1e-2, DiracVariant::CauchyRiemann).norm();
        let e2 = dirac_apply_fd(q0, &x, 5e-3, DiracVariant::CauchyRiemann).norm();
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "observed order {order}");
    }
}
