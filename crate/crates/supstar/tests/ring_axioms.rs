//! Property tests for the exact scalar and polynomial rings. Everything
//! downstream leans on these axioms holding with no rounding, so they get
//! randomized coverage of their own.

use proptest::prelude::*;
use supstar::scalars::{GaussPoly, GaussRational};

fn rational() -> impl Strategy<Value = GaussRational> {
    (-40i64..=40, 1i64..=12, -40i64..=40, 1i64..=12).prop_map(|(rp, rq, ip, iq)| {
        &GaussRational::from_ratio(rp, rq) + &(&GaussRational::i() * &GaussRational::from_ratio(ip, iq))
    })
}

fn poly() -> impl Strategy<Value = GaussPoly> {
    prop::collection::vec(((0u32..3, 0u32..3), rational()), 0..5).prop_map(|terms| {
        let mut p = GaussPoly::zero(2);
        for ((a, b), c) in terms {
            p += &GaussPoly::monomial(2, vec![a, b], c);
        }
        p
    })
}

proptest! {
    #[test]
    fn rational_ring_axioms(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &(-&a), GaussRational::zero());
        prop_assert_eq!(&a * &GaussRational::one(), a.clone());
    }

    #[test]
    fn conjugation_is_a_ring_morphism(a in rational(), b in rational()) {
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn i_squares_to_minus_one(a in rational()) {
        let i = GaussRational::i();
        prop_assert_eq!(&(&i * &i) * &a, -&a);
    }

    #[test]
    fn poly_ring_axioms(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p - &p, GaussPoly::zero(2));
        prop_assert_eq!(&p * &GaussPoly::one(2), p.clone());
    }

    #[test]
    fn differentiation_satisfies_leibniz(p in poly(), q in poly()) {
        for v in 0..2 {
            let lhs = (&p * &q).partial(v).unwrap();
            let rhs = &(&p.partial(v).unwrap() * &q) + &(&p * &q.partial(v).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn rational_round_trips_through_text() {
    for s in ["0", "1", "-7", "3/4", "-22/7"] {
        let v = GaussRational::parse_rational(s).unwrap();
        assert_eq!(v.to_string(), s);
    }
    assert!(GaussRational::parse_rational("3/0").is_err());
    assert!(GaussRational::parse_rational("x").is_err());
}
