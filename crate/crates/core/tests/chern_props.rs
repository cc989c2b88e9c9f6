//! Twisting, Whitney sums and multiplicative classes on random Chern data.

use std::sync::OnceLock;

use num_rational::BigRational;
use proptest::prelude::*;

use cobord::chern::{ambient_space, chern_character, todd_inverse, ChernCalculus, ChernVector};
use cobord::exactalg::GradedRing;
use cobord::fgl::{FormalGroupLaw, TwistData};
use cobord::series::{Series, SeriesSpace};

const CAP: u32 = 4;

/// Universal, additive and periodic multiplicative laws, each with a calculus.
fn calculi() -> &'static [ChernCalculus] {
    static CALCS: OnceLock<Vec<ChernCalculus>> = OnceLock::new();
    CALCS.get_or_init(|| {
        let z = GradedRing::integers(0);
        [
            FormalGroupLaw::universal(CAP).unwrap(),
            FormalGroupLaw::additive(&z, CAP + 1).unwrap(),
            FormalGroupLaw::multiplicative_periodic(CAP + 1).unwrap(),
        ]
        .iter()
        .map(|law| ChernCalculus::new(law, CAP).unwrap())
        .collect()
    })
}

fn additive_q() -> &'static ChernCalculus {
    static CALC: OnceLock<ChernCalculus> = OnceLock::new();
    CALC.get_or_init(|| {
        let law = FormalGroupLaw::additive(&GradedRing::rationals(0), CAP + 1).unwrap();
        ChernCalculus::new(&law, CAP).unwrap()
    })
}

type Terms = Vec<(u32, u32, i64)>;

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((0..=CAP, 0..=CAP, -3i64..=3), 0..5)
}

/// The terms of degree at least `lo`, in the ambient `u, v`.
fn class(sp: &SeriesSpace, t: &Terms, lo: u32) -> Series {
    let ring = sp.ring();
    t.iter()
        .filter(|(a, b, _)| a + b >= lo && a + b <= sp.cap())
        .fold(sp.zero(), |acc, &(a, b, c)| {
            acc.add(&sp.monomial(vec![a, b], ring.int(c))).unwrap()
        })
}

fn bundle(sp: &SeriesSpace, classes: &[Terms]) -> ChernVector {
    let cs = classes
        .iter()
        .enumerate()
        .map(|(k, t)| class(sp, t, k as u32 + 1))
        .collect();
    ChernVector::new(sp, cs).unwrap()
}

fn bundle_terms(max_rank: usize) -> impl Strategy<Value = Vec<Terms>> {
    prop::collection::vec(terms(), 1..=max_rank)
}

fn ambient(ring: &GradedRing, nilpotency: u32) -> SeriesSpace {
    ambient_space(ring, &["u", "v"], nilpotency).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn untwisting_inverts_twisting(
        which in 0usize..3,
        n in 2u32..=CAP + 1,
        e in bundle_terms(3),
        l in terms(),
    ) {
        let calc = &calculi()[which];
        let sp = ambient(calc.law().ring(), n);
        let (e, l) = (bundle(&sp, &e), class(&sp, &l, 1));
        let twisted = calc.twist(&e, &l).unwrap();
        prop_assert_eq!(&calc.untwist(&twisted, &l).unwrap(), &e);
        prop_assert_eq!(calc.twist(&calc.untwist(&e, &l).unwrap(), &l).unwrap(), e);
    }

    #[test]
    fn twisting_is_associative(
        which in 0usize..3,
        n in 2u32..=CAP + 1,
        e in bundle_terms(3),
        l1 in terms(),
        l2 in terms(),
    ) {
        let calc = &calculi()[which];
        let sp = ambient(calc.law().ring(), n);
        let e = bundle(&sp, &e);
        let (l1, l2) = (class(&sp, &l1, 1), class(&sp, &l2, 1));
        let stepwise = calc.twist(&calc.twist(&e, &l1).unwrap(), &l2).unwrap();
        let product = calc.law().apply(&l1, &l2).unwrap().truncate(sp.cap());
        prop_assert_eq!(stepwise, calc.twist(&e, &product).unwrap());
    }

    #[test]
    fn whitney_sum_is_commutative_and_associative(
        n in 2u32..=CAP + 1,
        a in bundle_terms(2),
        b in bundle_terms(2),
        c in bundle_terms(2),
    ) {
        let sp = ambient(&GradedRing::integers(0), n);
        let (a, b, c) = (bundle(&sp, &a), bundle(&sp, &b), bundle(&sp, &c));
        let ab = a.whitney_sum(&b).unwrap();
        prop_assert_eq!(&ab, &b.whitney_sum(&a).unwrap());
        prop_assert_eq!(
            ab.whitney_sum(&c).unwrap(),
            a.whitney_sum(&b.whitney_sum(&c).unwrap()).unwrap()
        );
        let total = ab.total_class().unwrap();
        prop_assert_eq!(total, a.total_class().unwrap().mul(&b.total_class().unwrap()).unwrap());
    }

    #[test]
    fn total_class_of_roots(n in 2u32..=CAP + 1, roots in prop::collection::vec(terms(), 1..=4)) {
        let sp = ambient(&GradedRing::integers(0), n);
        let roots: Vec<Series> = roots.iter().map(|t| class(&sp, t, 1)).collect();
        let e = ChernVector::from_roots(&sp, &roots).unwrap();
        let product = roots
            .iter()
            .fold(sp.one(), |acc, r| acc.mul(&sp.one().add(r).unwrap()).unwrap());
        prop_assert_eq!(e.total_class().unwrap(), product);
    }

    #[test]
    fn todd_class_is_multiplicative(
        n in 2u32..=CAP + 1,
        b in prop::collection::vec((-4i64..=4, 1i64..=5), CAP as usize),
        e in bundle_terms(2),
        f in bundle_terms(2),
    ) {
        let q = GradedRing::rationals(0);
        let mut seq = vec![q.one()];
        seq.extend(b.iter().map(|&(p, d)| q.scalar(BigRational::new(p.into(), d.into()))));
        let t = TwistData::from_b(&q, &seq).unwrap();
        let sp = ambient(&q, n);
        let (e, f) = (bundle(&sp, &e), bundle(&sp, &f));
        let sum = todd_inverse(&t, &e.whitney_sum(&f).unwrap()).unwrap();
        let product = todd_inverse(&t, &e).unwrap().mul(&todd_inverse(&t, &f).unwrap()).unwrap();
        prop_assert_eq!(sum, product);
    }

    #[test]
    fn chern_character_is_a_ring_map(
        n in 2u32..=CAP + 1,
        e in bundle_terms(2),
        f in bundle_terms(2),
    ) {
        let calc = additive_q();
        let sp = ambient(calc.law().ring(), n);
        let (e, f) = (bundle(&sp, &e), bundle(&sp, &f));
        let (che, chf) = (chern_character(&e).unwrap(), chern_character(&f).unwrap());
        let tensor = calc.tensor(&e, &f).unwrap();
        prop_assert_eq!(chern_character(&tensor).unwrap(), che.mul(&chf).unwrap());
        let sum = e.whitney_sum(&f).unwrap();
        prop_assert_eq!(chern_character(&sum).unwrap(), che.add(&chf).unwrap());
    }

    #[test]
    fn duality_is_an_involution(which in 0usize..3, n in 2u32..=CAP + 1, e in bundle_terms(3)) {
        let calc = &calculi()[which];
        let sp = ambient(calc.law().ring(), n);
        let e = bundle(&sp, &e);
        prop_assert_eq!(calc.dual(&calc.dual(&e).unwrap()).unwrap(), e);
    }

    #[test]
    fn k_class_of_a_line_twist_is_a_product(n in 2u32..=CAP + 1, u in terms(), v in terms()) {
        let calc = &calculi()[2];
        let sp = ambient(calc.law().ring(), n);
        let (u, v) = (class(&sp, &u, 1), class(&sp, &v, 1));
        let lu = ChernVector::line_bundle(&sp, u).unwrap();
        let lv = ChernVector::line_bundle(&sp, v.clone()).unwrap();
        let twisted = calc.twist(&lu, &v).unwrap();
        let lhs = calc.k_class_of_bundle(&twisted).unwrap();
        let rhs = calc
            .k_class_of_bundle(&lu)
            .unwrap()
            .mul(&calc.k_class_of_bundle(&lv).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
