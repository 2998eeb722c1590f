use cliffan::clifford::{dirac_apply_fd, laplacian_fd, DiracVariant, Multivector, Paravector, SpinElement};
use proptest::prelude::*;

fn multivector(n: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-2.0f64..2.0, 1 << n).prop_map(move |c| Multivector::from_coeffs(n, c).unwrap())
}

/// Dimension together with three elements of `Cl_n`.
fn triple() -> impl Strategy<Value = (Multivector, Multivector, Multivector)> {
    (1usize..=6).prop_flat_map(|n| (multivector(n), multivector(n), multivector(n)))
}

fn vector(n: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-2.0f64..2.0, n).prop_map(move |v| Multivector::vector(n, &v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let scale = 1.0 + a.norm() * b.norm() * c.norm();
        prop_assert!((&(&a * &b) * &c).distance(&(&a * &(&b * &c))) <= 1e-12 * scale);
    }

    #[test]
    fn product_distributes((a, b, c) in triple()) {
        let scale = 1.0 + a.norm() * (b.norm() + c.norm());
        prop_assert!((&a * &(&b + &c)).distance(&(&(&a * &b) + &(&a * &c))) <= 1e-12 * scale);
    }

    #[test]
    fn reversion_and_conjugation_reverse_products((a, b, _c) in triple()) {
        let scale = 1.0 + a.norm() * b.norm();
        let ab = &a * &b;
        prop_assert!(ab.reversion().distance(&(&b.reversion() * &a.reversion())) <= 1e-12 * scale);
        prop_assert!(ab.conjugation().distance(&(&b.conjugation() * &a.conjugation())) <= 1e-12 * scale);
        prop_assert!(ab.involution().distance(&(&a.involution() * &b.involution())) <= 1e-12 * scale);
    }

    #[test]
    fn involutions_are_involutive((a, _b, _c) in triple()) {
        prop_assert_eq!(a.reversion().reversion(), a.clone());
        prop_assert_eq!(a.conjugation().conjugation(), a.clone());
        prop_assert_eq!(a.involution().reversion(), a.conjugation());
    }

    #[test]
    fn vectors_square_to_minus_norm(x in (1usize..=8).prop_flat_map(vector)) {
        let n = x.n();
        let sq = &x * &x;
        prop_assert!(sq.distance(&Multivector::scalar(n, -x.norm_sqr())) <= 1e-13 * (1.0 + x.norm_sqr()));
    }

    #[test]
    fn vector_products_are_norm_multiplicative(
        (x, y) in (1usize..=6).prop_flat_map(|n| (vector(n), vector(n)))
    ) {
        let p = &x * &y;
        prop_assert!((p.norm() - x.norm() * y.norm()).abs() <= 1e-12 * (1.0 + p.norm()));
    }

    #[test]
    fn paravector_times_conjugate_is_its_square_norm(coords in prop::collection::vec(-3.0f64..3.0, 2..=6)) {
        let x = Paravector::new(coords);
        let p = &x.to_multivector() * &x.conj().to_multivector();
        prop_assert!(p.distance(&Multivector::scalar(x.n(), x.norm_sqr())) <= 1e-12 * (1.0 + x.norm_sqr()));
    }

    #[test]
    fn pin_action_is_an_isometry(
        (factors, x) in (2usize..=5).prop_flat_map(|n| (prop::collection::vec(vector(n), 1..4), vector(n)))
    ) {
        prop_assume!(factors.iter().all(|f| f.norm() > 1e-3));
        let n = x.n();
        let a = SpinElement::from_factors(n, &factors).unwrap();
        let y = a.apply(&x, false).unwrap();
        prop_assert!((y.norm() - x.norm()).abs() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn dirac_squares_to_minus_laplacian_on_quadratics(
        n in 1usize..=4,
        q in prop::collection::vec(-1.0f64..1.0, 16),
        x in prop::collection::vec(-1.0f64..1.0, 4),
        h in 0.05f64..0.5,
    ) {
        // f(x) = (x^T Q x) c with a fixed Clifford coefficient c
        let c = Multivector::from_coeffs(n, (0..1usize << n).map(|k| 1.0 + k as f64).collect()).unwrap();
        let quad = |y: &[f64]| -> f64 {
            (0..n).map(|i| (0..n).map(|j| q[i * 4 + j] * y[i] * y[j]).sum::<f64>()).sum()
        };
        let f = |y: &[f64]| c.scale(quad(y));
        let trace: f64 = (0..n).map(|i| q[i * 4 + i]).sum();
        let lap = c.scale(2.0 * trace);
        let x = &x[..n];
        let dd = dirac_apply_fd(|y| dirac_apply_fd(f, y, h, DiracVariant::Dirac), x, h, DiracVariant::Dirac);
        prop_assert!((&dd + &lap).max_abs() <= 1e-11 * (1.0 + lap.max_abs()));
        prop_assert!((&laplacian_fd(f, x, h) - &lap).max_abs() <= 1e-11 * (1.0 + lap.max_abs()) / (h * h));
    }
}

#[test]
fn generators_anticommute_exactly() {
    for n in 1..=8 {
        for i in 1..=n {
            let ei = Multivector::basis_vector(n, i);
            assert_eq!(&ei * &ei, Multivector::scalar(n, -1.0));
            for j in i + 1..=n {
                let ej = Multivector::basis_vector(n, j);
                assert_eq!(&ei * &ej, -&(&ej * &ei));
            }
        }
    }
}
