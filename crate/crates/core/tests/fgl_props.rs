//! Inverse, n-series, logarithm naturality and twisting of formal group laws.

use std::sync::OnceLock;

use num_rational::BigRational;
use proptest::prelude::*;

use cobord::exactalg::{CoeffDomain, GradedRing};
use cobord::fgl::{additive_specialization, multiplicative_specialization, FormalGroupLaw, TwistData};
use cobord::series::Series;

const W: u32 = 4;

fn universal() -> &'static FormalGroupLaw {
    static LAW: OnceLock<FormalGroupLaw> = OnceLock::new();
    LAW.get_or_init(|| FormalGroupLaw::universal(W).expect("universal law"))
}

fn universal_q() -> &'static FormalGroupLaw {
    static LAW: OnceLock<FormalGroupLaw> = OnceLock::new();
    LAW.get_or_init(|| universal().rationalize().expect("rational universal law"))
}

/// Laws over the rationals used for twisting: universal, additive, multiplicative.
fn rational_laws() -> &'static [FormalGroupLaw] {
    static LAWS: OnceLock<Vec<FormalGroupLaw>> = OnceLock::new();
    LAWS.get_or_init(|| {
        let ring = universal_q().ring().clone();
        let cap = W + 1;
        let a11 = ring.gen("a11").unwrap();
        vec![
            universal_q().clone(),
            FormalGroupLaw::additive(&ring, cap).unwrap(),
            FormalGroupLaw::multiplicative(&ring, &ring.neg(&a11), cap).unwrap(),
        ]
    })
}

fn same_to(a: &Series, b: &Series, cap: u32) -> bool {
    a.cap() >= cap && b.cap() >= cap && a.truncate(cap) == b.truncate(cap)
}

/// `x + sum c_k x^k` with small rational `c_k`.
fn twist_of(law: &FormalGroupLaw, coeffs: &[(i64, i64)]) -> TwistData {
    let ring = law.ring();
    let sp = law.line_space().with_cap(law.cap());
    let mut g = sp.var("x").unwrap();
    for (k, &(p, q)) in coeffs.iter().enumerate() {
        let c = ring.scalar(BigRational::new(p.into(), q.into()));
        g = g.add(&sp.monomial(vec![k as u32 + 2], c)).unwrap();
    }
    TwistData::from_g(g).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-4i64..=4, 1i64..=4), 0..(W as usize))
}

#[test]
fn inverse_is_an_involution() {
    let z = GradedRing::integers(0);
    let laws = [
        universal().clone(),
        FormalGroupLaw::additive(&z, 6).unwrap(),
        FormalGroupLaw::multiplicative(&z, &z.int(3), 6).unwrap(),
        FormalGroupLaw::multiplicative_periodic(6).unwrap(),
    ];
    for law in &laws {
        let x = law.line_space().var("x").unwrap();
        let twice = law.apply_inverse(law.inverse()).unwrap();
        assert!(same_to(&twice, &x, law.inverse().cap()), "{}", law.series());
        assert!(law.apply(&x, law.inverse()).unwrap().is_zero());
    }
}

#[test]
fn n_series_add_under_the_law() {
    let law = universal();
    let ns: Vec<(i64, Series)> = (-5..=5).map(|n| (n, law.n_series(n).unwrap())).collect();
    for (m, sm) in &ns {
        for (n, sn) in &ns {
            let sum = law.n_series(m + n).unwrap();
            let formal = law.apply(sm, sn).unwrap();
            assert!(same_to(&formal, &sum, law.cap()), "[{m}] +F [{n}]");
        }
    }
}

#[test]
fn logarithm_commutes_with_specialization() {
    let law = universal_q();
    let laurent = GradedRing::laurent_beta(CoeffDomain::Rationals, W + 1);
    let beta = laurent.gen("beta").unwrap();
    let homs = [
        multiplicative_specialization(law.ring(), &laurent, &beta).unwrap(),
        additive_specialization(law.ring(), &laurent).unwrap(),
    ];
    for h in &homs {
        let special = law.specialize(h).unwrap();
        let pushed = law.log().unwrap().map_coefficients(h).unwrap();
        assert!(same_to(&special.log().unwrap(), &pushed, law.cap()));
    }
}

#[test]
fn logarithm_linearizes_the_law() {
    for law in rational_laws() {
        let log = law.log().unwrap();
        let sp = law.series().space();
        let (x, y) = (sp.var("x").unwrap(), sp.var("y").unwrap());
        let lhs = log.substitute(&[("x", law.series())]).unwrap();
        let rhs = log
            .substitute(&[("x", &x)])
            .unwrap()
            .add(&log.substitute(&[("x", &y)]).unwrap())
            .unwrap();
        assert!(same_to(&lhs, &rhs, law.cap()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn twisting_back_recovers_the_law(which in 0usize..3, c in coeffs()) {
        let law = &rational_laws()[which];
        let t = twist_of(law, &c);
        let twisted = law.twist(&t).unwrap();
        let back = twisted.twist(&t.inverse().unwrap()).unwrap();
        prop_assert!(same_to(back.series(), law.series(), law.cap()));
    }

    #[test]
    fn twists_compose(which in 0usize..3, c1 in coeffs(), c2 in coeffs()) {
        let law = &rational_laws()[which];
        let (t1, t2) = (twist_of(law, &c1), twist_of(law, &c2));
        let stepwise = law.twist(&t1).unwrap().twist(&t2).unwrap();
        let g = t2.series().substitute(&[("x", t1.series())]).unwrap();
        let at_once = law.twist(&TwistData::from_g(g).unwrap()).unwrap();
        prop_assert!(same_to(stepwise.series(), at_once.series(), law.cap()));
    }

    #[test]
    fn twisted_logarithm(which in 0usize..3, c in coeffs()) {
        let law = &rational_laws()[which];
        let t = twist_of(law, &c);
        let twisted = law.twist(&t).unwrap();
        let expected = law
            .log()
            .unwrap()
            .substitute(&[("x", &t.inverse_series().unwrap())])
            .unwrap();
        prop_assert!(same_to(&twisted.log().unwrap(), &expected, law.cap()));
    }
}
