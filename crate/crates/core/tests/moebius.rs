use cliffan::clifford::{Multivector, Paravector};
use cliffan::moebius::{
    enumerate_group, extended_generators, gamma_p_generators, in_congruence_subgroup, EnumerationOptions, NormBound,
    VahlenMatrix,
};
use proptest::prelude::*;

const N: usize = 3;
const P: usize = 1;

/// A word in the generators of `Γ_1` over `Cl_3` and their inverses.
fn element() -> impl Strategy<Value = VahlenMatrix> {
    let ext = extended_generators(&gamma_p_generators(N, P).unwrap());
    let count = ext.len();
    prop::collection::vec(0..count, 0..8)
        .prop_map(move |w| w.iter().fold(VahlenMatrix::identity(N), |acc, &i| acc.mul(&ext[i])))
}

fn upper_point() -> impl Strategy<Value = Paravector> {
    (prop::collection::vec(-2.0f64..2.0, N), 0.1f64..3.0).prop_map(|(mut v, t)| {
        v.push(t);
        Paravector::new(v)
    })
}

fn translation(level: f64) -> VahlenMatrix {
    let mut t = vec![0.0; N + 1];
    t[0] = level;
    VahlenMatrix::translation(&Paravector::new(t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn action_is_a_homomorphism(a in element(), b in element(), x in upper_point()) {
        let lhs = a.mul(&b).apply(&x).unwrap();
        let rhs = a.apply(&b.apply(&x).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn upper_half_space_is_preserved(a in element(), x in upper_point()) {
        prop_assert!(a.apply(&x).unwrap().last() > 0.0);
    }

    #[test]
    fn automorphy_factor_is_a_cocycle(a in element(), b in element(), x in upper_point()) {
        let j_ab = a.mul(&b).automorphy_factor(&x).unwrap();
        let split = &b.automorphy_factor(&x).unwrap() * &a.automorphy_factor(&b.apply(&x).unwrap()).unwrap();
        prop_assert!(j_ab.distance(&split) <= 1e-9 * j_ab.norm());
    }

    #[test]
    fn vahlen_conditions_survive_products_and_inverses(a in element(), b in element()) {
        prop_assert!(a.mul(&b).is_vahlen());
        prop_assert!(a.inverse().is_vahlen());
        prop_assert!(a.mul(&a.inverse()).approx_eq(&VahlenMatrix::identity(N), 1e-9));
    }

    /// `Γ[N]` is normal, so conjugates of `T^N` lie in it, as do their products and inverses.
    #[test]
    fn congruence_subgroup_is_closed(a in element(), b in element(), level in 2u32..5) {
        let t = translation(level as f64);
        let u = a.mul(&t).mul(&a.inverse());
        let v = b.mul(&t.inverse()).mul(&b.inverse());
        prop_assert!(in_congruence_subgroup(&u, level, P).unwrap());
        prop_assert!(in_congruence_subgroup(&u.mul(&v), level, P).unwrap());
        prop_assert!(in_congruence_subgroup(&u.inverse(), level, P).unwrap());
    }

    #[test]
    fn n1_action_is_the_complex_moebius_map(
        word in prop::collection::vec(0usize..4, 0..10), re in -2.0f64..2.0, im in 0.1f64..3.0,
    ) {
        let ext = extended_generators(&gamma_p_generators(1, 0).unwrap());
        let m = word.iter().fold(VahlenMatrix::identity(1), |acc, &i| acc.mul(&ext[i % ext.len()]));
        let [a, b, c, d] = m.entries().map(Multivector::scalar_part);
        // (a z + b) / (c z + d) in real arithmetic
        let (nr, ni) = (a * re + b, a * im);
        let (dr, di) = (c * re + d, c * im);
        let den = dr * dr + di * di;
        let w = [(nr * dr + ni * di) / den, (ni * dr - nr * di) / den];
        let y = m.apply(&Paravector::new(vec![re, im])).unwrap();
        prop_assert!((y.coords()[0] - w[0]).abs() + (y.coords()[1] - w[1]).abs() <= 1e-9 * (1.0 + w[0].abs() + w[1].abs()));
        prop_assert!((a * d - b * c - 1.0).abs() < 1e-12);
    }
}

#[test]
fn frobenius_ball_matches_brute_force_sl2z() {
    let gens = gamma_p_generators(1, 0).unwrap();
    for bound in [2.0, 6.0, 15.0, 40.0] {
        let opts = EnumerationOptions {
            max_word_length: 60,
            norm_bound: bound,
            pm_quotient: true,
            bound: NormBound::Frobenius,
        };
        let found = enumerate_group(&gens, &opts).len();
        let r = (bound as f64).sqrt() as i64;
        let mut count = 0;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        if a * d - b * c == 1 && ((a * a + b * b + c * c + d * d) as f64) <= bound {
                            count += 1;
                        }
                    }
                }
            }
        }
        // M and -M are identified
        assert_eq!(found * 2, count, "bound {bound}");
    }
}
