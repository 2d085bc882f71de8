use std::collections::BTreeMap;

use hecke_core::arith::{qf, Q};
use hecke_core::cyclotomic::{Cyclo, CycloField};
use hecke_core::group::{invert, modular_delta, multiply, FamilyRef, FamilyRegistry, Relative};
use hecke_core::qadic::{duality_pair, QAdicNumber};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<FamilyRef> {
    let specs = [
        ("padic-axb", "p = 2\nq = 3"),
        ("padic-axb", "p = 3\nq = 2"),
        ("dihedral", "sigma_b = -1"),
        ("heisenberg", "s = \"1/2\"\nt = \"1/3\""),
        ("padic-heisenberg", "p = 2\nq = 3\nr = 5"),
        ("full-axb", "n = 3"),
        ("lamplighter", "f = 2"),
    ];
    specs
        .iter()
        .map(|(name, params)| {
            let p: BTreeMap<String, toml::Value> = toml::from_str(params).unwrap();
            FamilyRegistry::default().build(name, &p).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for fam in families() {
            let f = fam.as_ref();
            let (x, y, z) = (f.sample(&mut rng, 3), f.sample(&mut rng, 3), f.sample(&mut rng, 3));
            let xy_z = multiply(f, &multiply(f, &x, &y).unwrap(), &z).unwrap();
            let x_yz = multiply(f, &x, &multiply(f, &y, &z).unwrap()).unwrap();
            prop_assert_eq!(&xy_z, &x_yz, "{}", f.name());
            let e = f.identity();
            prop_assert_eq!(&multiply(f, &e, &x).unwrap(), &x);
            prop_assert_eq!(&multiply(f, &x, &invert(f, &x).unwrap()).unwrap(), &e);
        }
    }

    #[test]
    fn index_is_double_coset_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for fam in families() {
            let f = fam.as_ref();
            let x = f.sample(&mut rng, 3);
            let (h1, h2) = (f.sample_h(&mut rng, 2), f.sample_h(&mut rng, 2));
            prop_assert!(f.in_h(&h1) && f.in_h(&h2));
            let y = multiply(f, &multiply(f, &h1, &x).unwrap(), &h2).unwrap();
            prop_assert_eq!(f.index_l(&x), f.index_l(&y), "{} at {}", f.name(), x);
            prop_assert_eq!(f.h_transversal(&x).len() as u64, f.index_l(&x));
        }
    }

    #[test]
    fn modular_function_is_a_homomorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for fam in families() {
            let f = fam.as_ref();
            let (x, y) = (f.sample(&mut rng, 2), f.sample(&mut rng, 2));
            let xy = multiply(f, &x, &y).unwrap();
            let d = |g| modular_delta(f, g, Relative::H).unwrap();
            prop_assert_eq!(d(&xy), d(&x) * d(&y), "{}", f.name());
        }
    }

    #[test]
    fn cyclotomic_ring_laws(
        order in prop::sample::select(vec![3u64, 4, 8, 12, 15]),
        a in prop::collection::vec((-6i64..6, 1i64..5), 8),
        b in prop::collection::vec((-6i64..6, 1i64..5), 8),
        c in prop::collection::vec((-6i64..6, 1i64..5), 8),
    ) {
        let field = CycloField::new(order);
        let mk = |v: &[(i64, i64)]| {
            v.iter().enumerate().fold(Cyclo::zero(&field), |acc, (k, &(n, d))| {
                &acc + &Cyclo::root(&field, k as i64).scale(&qf(n, d))
            })
        };
        let (a, b, c) = (mk(&a), mk(&b), mk(&c));
        prop_assert_eq!(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)));
        prop_assert_eq!(&(&(&a * &b) * &c), &(&a * &(&b * &c)));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!(a.mul_root(1), &a * &Cyclo::root(&field, 1));
        let big = CycloField::new(order * 2);
        let (ea, eb) = (a.embed(&big).unwrap(), b.embed(&big).unwrap());
        prop_assert_eq!((&a * &b).embed(&big).unwrap(), &ea * &eb);
    }

    #[test]
    fn qadic_embedding_is_a_ring_map(
        pq in prop::sample::select(vec![(2u64, 3u64), (2, 7), (3, 2), (5, 4)]),
        x in (-400i64..400, 1i64..64),
        y in (-400i64..400, 1i64..64),
    ) {
        let (p, q) = pq;
        let ok = |d: i64| num_integer::Integer::gcd(&d, &(q as i64)) == 1;
        prop_assume!(ok(x.1) && ok(y.1));
        let (x, y): (Q, Q) = (qf(x.0, x.1), qf(y.0, y.1));
        let emb = |r: &Q| QAdicNumber::from_rational(p, q, r, 24).unwrap();
        prop_assert!(emb(&(&x + &y)).eq_at_precision(&emb(&x).add(&emb(&y))));
        prop_assert!(emb(&(&x * &y)).eq_at_precision(&emb(&x).mul(&emb(&y))));
        prop_assert!(emb(&x).sub(&emb(&x)).is_zero_at_precision());
    }

    #[test]
    fn duality_pairing_is_additive(
        a in (-200i64..200, 0u32..4),
        b in (-200i64..200, 0u32..4),
        c in (-200i64..200, 0u32..4),
    ) {
        let (p, q) = (2u64, 3u64);
        let emb = |(n, e): (i64, u32)| {
            QAdicNumber::from_rational(p, q, &qf(n, 1 << e), 32).unwrap()
        };
        let (a, b, c) = (emb(a), emb(b), emb(c));
        let lhs = duality_pair(&a.add(&b), &c).unwrap();
        let rhs = hecke_core::arith::frac(&(duality_pair(&a, &c).unwrap() + duality_pair(&b, &c).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }
}
