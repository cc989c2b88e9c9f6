//! Projective bundle ranks, line bundle classes, projection formulas and
//! compatibility of pushforwards with specialization.

use std::sync::OnceLock;

use proptest::prelude::*;

use cobord::exactalg::{CoeffDomain, GradedRing, RingElement, RingHom};
use cobord::fgl::{additive_specialization, multiplicative_specialization, FormalGroupLaw};
use cobord::series::Series;
use cobord::spaces::ProjModel;

const W: u32 = 4;

fn laws() -> &'static [FormalGroupLaw] {
    static LAWS: OnceLock<Vec<FormalGroupLaw>> = OnceLock::new();
    LAWS.get_or_init(|| {
        vec![
            FormalGroupLaw::universal(W).unwrap(),
            FormalGroupLaw::additive(&GradedRing::integers(0), W + 1).unwrap(),
            FormalGroupLaw::multiplicative_periodic(W + 1).unwrap(),
        ]
    })
}

/// An integer times `1`, `a11`, `a12` or `a11^2`; absent generators read as `1`.
fn coefficient(ring: &GradedRing, pick: u8, c: i64) -> RingElement {
    let scalar = ring.int(c);
    let gen = |name: &str| ring.gen(name).unwrap_or_else(|_| ring.one());
    let factor = match pick % 4 {
        0 => ring.one(),
        1 => gen("a11"),
        2 => gen("a12"),
        _ => ring.pow(&gen("a11"), 2).unwrap(),
    };
    ring.mul(&factor, &scalar).unwrap()
}

type Terms = Vec<(Vec<u32>, u8, i64)>;

fn terms(nvars: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec((prop::collection::vec(0..=W, nvars), any::<u8>(), -4i64..=4), 0..6)
}

fn element(model: &ProjModel, t: &Terms) -> Series {
    let sp = model.space();
    let ring = sp.ring();
    let raw = t.iter().fold(sp.zero(), |acc, (e, pick, c)| {
        if sp.degree_of(e) > sp.cap() {
            return acc;
        }
        acc.add(&sp.monomial(e.clone(), coefficient(ring, *pick, *c))).unwrap()
    });
    model.reduce(&raw)
}

/// Splits of a total dimension of at most `max` into one or two factors.
fn two_dims(max: u32) -> impl Strategy<Value = (u32, u32)> {
    (0..=max, 0..=max).prop_filter("total within cap", move |(a, b)| a + b <= max)
}

#[test]
fn model_rank_is_the_product_of_factor_ranks() {
    let z = GradedRing::integers(0);
    let models = [
        FormalGroupLaw::additive(&z, 8).unwrap(),
        FormalGroupLaw::multiplicative_periodic(8).unwrap(),
    ];
    let mut dims_list: Vec<Vec<u32>> = Vec::new();
    for a in 0..=8u32 {
        dims_list.push(vec![a]);
        for b in 0..=8 - a {
            dims_list.push(vec![a, b]);
            for c in 0..=8 - a - b {
                dims_list.push(vec![a, b, c]);
            }
        }
    }
    for law in &models {
        for dims in &dims_list {
            let model = ProjModel::new(dims, law).unwrap();
            let expected: usize = dims.iter().map(|&n| n as usize + 1).product();
            assert_eq!(model.rank(), expected, "{dims:?}");
            let basis = model.basis();
            assert_eq!(basis.len(), expected);
            let one = law.ring().one();
            let sum = basis.iter().fold(model.space().zero(), |acc, e| {
                acc.add(&model.space().monomial(e.clone(), one.clone())).unwrap()
            });
            assert_eq!(model.reduce(&sum).num_terms(), expected);
            for (i, &n) in dims.iter().enumerate() {
                let x = model.hyperplane(i).unwrap();
                assert!(model.reduce(&x.pow(n + 1).unwrap()).is_zero());
                assert!(!model.reduce(&x.pow(n).unwrap()).is_zero());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn line_bundle_classes_add_under_the_law(
        which in 0usize..3,
        (n1, n2) in two_dims(W),
        d in (-4i64..=4, -4i64..=4),
        e in (-4i64..=4, -4i64..=4),
    ) {
        let law = &laws()[which];
        let model = ProjModel::new(&[n1, n2], law).unwrap();
        let od = model.line_bundle(&[d.0, d.1]).unwrap();
        let oe = model.line_bundle(&[e.0, e.1]).unwrap();
        let tensor = model.line_bundle(&[d.0 + e.0, d.1 + e.1]).unwrap();
        prop_assert_eq!(tensor, model.reduce(&law.apply(&od, &oe).unwrap()));
    }

    #[test]
    fn projection_formula_for_a_factor(
        which in 0usize..3,
        (n1, n2) in two_dims(W),
        a in terms(2),
        b in terms(1),
    ) {
        let law = &laws()[which];
        let model = ProjModel::new(&[n1, n2], law).unwrap();
        let base = model.remove_axis(0).unwrap();
        let (a, b) = (element(&model, &a), element(&base, &b));
        let pulled = model.reduce(&b.substitute(&[("x1", &model.space().var_at(1))]).unwrap());
        let (_, lhs) = model.pushforward(0, &model.mul(&a, &pulled).unwrap()).unwrap();
        let (_, pushed) = model.pushforward(0, &a).unwrap();
        prop_assert_eq!(lhs, base.mul(&pushed, &b).unwrap());
    }

    #[test]
    fn projection_formula_for_a_linear_embedding(
        which in 0usize..3,
        (m, n) in (0..=W, 0..=W).prop_filter("m <= n", |(m, n)| m <= n),
        a in terms(1),
        b in terms(1),
    ) {
        let law = &laws()[which];
        let (small, big) = (ProjModel::new(&[m], law).unwrap(), ProjModel::new(&[n], law).unwrap());
        let (a, b) = (element(&small, &a), element(&big, &b));
        let restricted = small.restrict(&b).unwrap();
        let lhs = small
            .linear_embedding_pushforward(&big, &small.mul(&a, &restricted).unwrap())
            .unwrap();
        let pushed = small.linear_embedding_pushforward(&big, &a).unwrap();
        prop_assert_eq!(lhs, big.mul(&pushed, &b).unwrap());
    }

    #[test]
    fn pushforward_commutes_with_specialization(
        target in 0usize..2,
        (n1, n2) in two_dims(W),
        a in terms(2),
    ) {
        let universal = &laws()[0];
        let laurent = GradedRing::laurent_beta(CoeffDomain::Integers, W + 1);
        let beta = laurent.gen("beta").unwrap();
        let h: RingHom = if target == 0 {
            multiplicative_specialization(universal.ring(), &laurent, &beta).unwrap()
        } else {
            additive_specialization(universal.ring(), &laurent).unwrap()
        };
        let special = universal.specialize(&h).unwrap();
        let model = ProjModel::new(&[n1, n2], universal).unwrap();
        let image = ProjModel::new(&[n1, n2], &special).unwrap();
        // Pushing to a point raises weight by the codimension; stay inside the box
        // where truncation in the source agrees with the target.
        let top = n1 + n2;
        let a: Terms = a
            .into_iter()
            .filter(|(e, pick, c)| {
                let w = universal.ring().homogeneous_weight(&coefficient(universal.ring(), *pick, *c));
                let deg: u32 = e.iter().sum();
                deg <= top && w.unwrap_or(0) as u32 + top - deg <= W
            })
            .collect();
        let a = element(&model, &a);
        let ha = image.reduce(&a.map_coefficients(&h).unwrap());
        let point = model.pushforward_to_point(&a).unwrap();
        prop_assert_eq!(h.apply(&point).unwrap(), image.pushforward_to_point(&ha).unwrap());
        let (_, pa) = model.pushforward(0, &a).unwrap();
        let (_, pha) = image.pushforward(0, &ha).unwrap();
        prop_assert_eq!(pa.map_coefficients(&h).unwrap(), pha);
    }
}
