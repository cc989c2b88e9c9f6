//! Normal forms and ring homomorphisms on random elements.

use std::sync::OnceLock;

use proptest::prelude::*;

use cobord::exactalg::{parse_polynomial, CoeffDomain, GradedRing, RingElement, RingHom};
use cobord::fgl::{additive_specialization, lazard_ring, multiplicative_specialization};

/// Elements of weight at most this have products inside the weight-4 box.
const HALF: u32 = 2;

fn lazard() -> &'static GradedRing {
    static RING: OnceLock<GradedRing> = OnceLock::new();
    RING.get_or_init(|| lazard_ring(4).expect("Lazard ring"))
}

fn laurent() -> &'static GradedRing {
    static RING: OnceLock<GradedRing> = OnceLock::new();
    RING.get_or_init(|| GradedRing::laurent_beta(CoeffDomain::Integers, 4))
}

/// Exponent vectors of weight between 0 and `max`.
fn monomials(ring: &GradedRing, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..ring.num_generators() {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                (0..=max).map(move |k| {
                    let mut e2 = e.clone();
                    e2.push(k);
                    e2
                })
            })
            .collect();
    }
    out.retain(|e| ring.monomial_size(e) <= max);
    out
}

/// Text of a raw linear combination, left unreduced by the parser.
fn raw_text(ring: &GradedRing, picks: &[(usize, i64)], pool: &[Vec<u32>]) -> String {
    let mut text = String::from("0");
    for &(i, c) in picks {
        text.push_str(&format!(" + ({c})*{}", ring.format_monomial(&pool[i % pool.len()])));
    }
    text
}

fn raw(ring: &GradedRing, text: &str) -> RingElement {
    parse_polynomial(&ring.names(), text).expect("raw polynomial")
}

fn picks() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..64, -6i64..=6), 0..6)
}

fn specializations() -> Vec<RingHom> {
    let l = lazard();
    let beta = laurent().gen("beta").expect("beta");
    vec![
        multiplicative_specialization(l, laurent(), &beta).expect("graded specialization"),
        additive_specialization(l, laurent()).expect("additive specialization"),
        RingHom::rationalization(l),
        RingHom::identity(l),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normal_form_is_additive(a in picks(), b in picks()) {
        let ring = lazard();
        let pool = monomials(ring, 4);
        let (ta, tb) = (raw_text(ring, &a, &pool), raw_text(ring, &b, &pool));
        let sum = raw(ring, &format!("({ta}) + ({tb})"));
        let lhs = ring.normal_form(&sum).unwrap();
        let na = ring.normal_form(&raw(ring, &ta)).unwrap();
        let nb = ring.normal_form(&raw(ring, &tb)).unwrap();
        prop_assert_eq!(&lhs, &ring.add(&na, &nb));
        prop_assert_eq!(ring.normal_form(&lhs).unwrap(), lhs);
    }

    #[test]
    fn normal_form_is_multiplicative(a in picks(), b in picks()) {
        let ring = lazard();
        let pool = monomials(ring, HALF);
        let (ta, tb) = (raw_text(ring, &a, &pool), raw_text(ring, &b, &pool));
        let prod = raw(ring, &format!("({ta}) * ({tb})"));
        let lhs = ring.normal_form(&prod).unwrap();
        let na = ring.normal_form(&raw(ring, &ta)).unwrap();
        let nb = ring.normal_form(&raw(ring, &tb)).unwrap();
        prop_assert_eq!(lhs, ring.mul(&na, &nb).unwrap());
    }

    #[test]
    fn homomorphisms_respect_sums_and_products(a in picks(), b in picks()) {
        let ring = lazard();
        let pool = monomials(ring, HALF);
        let x = ring.normal_form(&raw(ring, &raw_text(ring, &a, &pool))).unwrap();
        let y = ring.normal_form(&raw(ring, &raw_text(ring, &b, &pool))).unwrap();
        for h in specializations() {
            let dst = h.target();
            let (hx, hy) = (h.apply(&x).unwrap(), h.apply(&y).unwrap());
            prop_assert_eq!(h.apply(&ring.add(&x, &y)).unwrap(), dst.add(&hx, &hy));
            prop_assert_eq!(h.apply(&ring.mul(&x, &y).unwrap()).unwrap(), dst.mul(&hx, &hy).unwrap());
            prop_assert_eq!(h.apply(&ring.one()).unwrap(), dst.one());
        }
    }

    #[test]
    fn homomorphisms_respect_the_grading(w in 0u32..=4, a in picks()) {
        let ring = lazard();
        let pool: Vec<_> = monomials(ring, 4)
            .into_iter()
            .filter(|e| ring.monomial_size(e) == w)
            .collect();
        let x = ring.normal_form(&raw(ring, &raw_text(ring, &a, &pool))).unwrap();
        prop_assert!(ring.is_homogeneous_of(&x, w as i32));
        for h in specializations() {
            let scale = h.grading_scale().expect("graded map");
            prop_assert!(h.target().is_homogeneous_of(&h.apply(&x).unwrap(), w as i32 * scale));
        }
    }
}
