//! The acceptance suite as a deterministic report: one line per criterion.

use num_bigint::BigInt;
use num_integer::binomial;
use serde::{Deserialize, Serialize};

use crate::bivariant::{reproduce, run_check, Budget, Check, CheckReport, SkippedPullback, Universal};
use crate::chern::{
    ambient_space, twisted_first_chern, ChernCalculus, ChernVector, TwistConvention,
};
use crate::error::Result;
use crate::exactalg::GradedRing;
use crate::fgl::{lazard_ring, multiplicative_specialization, FormalGroupLaw, TwistData};
use crate::series::{Series, SeriesSpace, Var};
use crate::spaces::grr_check;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub index: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub criteria: Vec<Criterion>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{}] {verdict} {}: {}\n", c.index, c.title, c.detail));
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{passed}/{} criteria passed\n", self.criteria.len()));
        out
    }
}

/// Runs every criterion in order. Each one is independent of the others.
pub fn run() -> SelftestReport {
    let suite: [(&str, fn() -> Result<(bool, String)>); 8] = [
        ("Lazard ranks are partition numbers", lazard_structure),
        ("difference-law identities", difference_laws),
        ("symmetric-function identities", symmetric_calculus),
        ("Conner-Floyd at series level", conner_floyd),
        ("twisting", twisting),
        ("Hirzebruch-Riemann-Roch", riemann_roch),
        ("bivariant axioms and mutation", bivariant_axioms),
        ("Grothendieck transformation", transformation),
    ];
    let criteria = suite
        .iter()
        .zip(1..)
        .map(|((title, check), index)| {
            let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
            Criterion {
                index,
                title: title.to_string(),
                passed,
                detail,
            }
        })
        .collect();
    SelftestReport { criteria }
}

/// `a = b` coefficientwise through degree `cap`, both known that far.
fn agree_to(a: &Series, b: &Series, cap: u32) -> bool {
    a.cap() >= cap && b.cap() >= cap && a.truncate(cap) == b.truncate(cap)
}

/// Partition numbers by the recurrence over the largest part.
fn partitions(n: usize) -> Vec<usize> {
    let mut p = vec![0; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p
}

fn lazard_structure() -> Result<(bool, String)> {
    const W: u32 = 5;
    let ring = lazard_ring(W)?;
    let ranks: Vec<usize> = (1..=W as i32).map(|w| ring.graded_rank(w)).collect();
    let expected = partitions(W as usize)[1..].to_vec();
    let torsion_free = (1..=W as i32).all(|w| ring.torsion(w).is_empty());
    Ok((
        ranks == expected && torsion_free,
        format!("ranks {ranks:?} for W <= {W}, torsion-free: {torsion_free}"),
    ))
}

fn three_laws(cap: u32) -> Result<Vec<(&'static str, FormalGroupLaw)>> {
    Ok(vec![
        ("universal", FormalGroupLaw::universal(cap - 1)?),
        ("additive", FormalGroupLaw::additive(&GradedRing::integers(0), cap)?),
        ("multiplicative", FormalGroupLaw::multiplicative_periodic(cap)?),
    ])
}

fn difference_laws() -> Result<(bool, String)> {
    const CAP: u32 = 6;
    let mut ok = true;
    for (_, law) in three_laws(CAP)? {
        let sp = law.series().space();
        let (x, y) = (sp.var("x")?, sp.var("y")?);
        let there = law.apply_difference(&law.apply(&x, &y)?, &y)?;
        let back = law.apply(&law.apply_difference(&x, &y)?, &y)?;
        ok &= agree_to(&there, &x, CAP) && agree_to(&back, &x, CAP);
    }
    Ok((ok, format!("universal, additive, multiplicative to cap {CAP}")))
}

/// The generic bundle of rank `r`: classes `s1..sr` of weights `1..r`, next
/// to the line classes `extra`.
fn generic_bundle(calc: &ChernCalculus, r: usize, extra: &[&str]) -> Result<ChernVector> {
    let mut vars: Vec<Var> = (1..=r).map(|i| Var::new(&format!("s{i}"), i as u32)).collect();
    vars.extend(extra.iter().map(|n| Var::new(n, 1)));
    let amb = SeriesSpace::with_vars(calc.law().ring(), vars, calc.cap())?;
    let classes = (1..=r).map(|i| amb.var(&format!("s{i}"))).collect::<Result<Vec<_>>>()?;
    ChernVector::new(&amb, classes)
}

fn symmetric_calculus() -> Result<(bool, String)> {
    const CAP: u32 = 5;
    let law = FormalGroupLaw::universal(CAP - 1)?;
    let calc = ChernCalculus::new(&law, CAP)?;
    let mut ok = true;
    for r in 1..=3 {
        let e = generic_bundle(&calc, r, &["x", "y"])?;
        let amb = e.ambient();
        let (x, y) = (amb.var("x")?, amb.var("y")?);
        ok &= calc.twist(&calc.untwist(&e, &x)?, &x)? == e;
        ok &= calc.untwist(&calc.twist(&e, &x)?, &x)? == e;
        let twice = calc.twist(&calc.twist(&e, &x)?, &y)?;
        let once = calc.twist(&e, &law.apply(&x, &y)?)?;
        ok &= twice == once;
    }
    Ok((ok, format!("universal law, ranks 1..3, cap {CAP}")))
}

fn conner_floyd() -> Result<(bool, String)> {
    const CAP: u32 = 5;
    let universal = FormalGroupLaw::universal(CAP - 1)?;
    let periodic = FormalGroupLaw::multiplicative_periodic(CAP)?;
    let target = periodic.ring();
    let beta = target.gen("beta")?;
    let h = multiplicative_specialization(universal.ring(), target, &beta)?;
    let specialized = universal.specialize(&h)?;
    let law_ok = specialized == periodic;

    let calc = ChernCalculus::new(&periodic, CAP)?;
    let amb = ambient_space(target, &["u"], CAP + 1)?;
    let u = amb.var("u")?;
    let line = ChernVector::line_bundle(&amb, u.clone())?;
    let ch_dual = calc.cobordism_class_of_k(&calc.dual(&line)?)?;
    let beta_inv = target.inverse(&beta)?;
    let c1 = amb.one().sub(&ch_dual)?.scale(&beta_inv)?;
    let chern_ok = c1 == u;

    let mut mult_ok = true;
    for r in 1..=2 {
        for q in 1..=2 {
            let names: Vec<String> = (0..r + q).map(|i| format!("u{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let amb = ambient_space(target, &refs, 3)?;
            let roots = refs.iter().map(|n| amb.var(n)).collect::<Result<Vec<_>>>()?;
            let e = ChernVector::from_roots(&amb, &roots[..r])?;
            let f = ChernVector::from_roots(&amb, &roots[r..])?;
            let lhs = calc.cobordism_class_of_k(&e)?.mul(&calc.cobordism_class_of_k(&f)?)?;
            let rhs = calc.cobordism_class_of_k(&calc.tensor(&e, &f)?)?;
            mult_ok &= lhs == rhs;
        }
    }
    Ok((
        law_ok && chern_ok && mult_ok,
        format!("specialized law: {law_ok}, first Chern class: {chern_ok}, multiplicativity for ranks <= 2: {mult_ok}"),
    ))
}

fn twisting() -> Result<(bool, String)> {
    const CAP: u32 = 5;
    let q = GradedRing::rationals(0);
    let additive = FormalGroupLaw::additive(&q, CAP)?;
    let multiplicative = FormalGroupLaw::multiplicative(&q, &q.one(), CAP)?;
    let tau = additive.tau_for_target(&multiplicative)?;
    let line = tau.series().space().clone();
    let x = line.var("x")?;
    let expected_g = line.one().sub(&x.neg().exp()?)?;
    let g_ok = agree_to(tau.series(), &expected_g, CAP);
    let b: Vec<String> = tau.b_sequence()?.iter().map(|c| q.format(c)).collect();
    let b_ok = b == ["1", "1/2", "1/12", "0", "-1/720"];

    let universal = FormalGroupLaw::universal(CAP - 1)?.rationalize()?;
    let to_log = TwistData::from_g(universal.log()?)?;
    let logged = universal.twist(&to_log)?;
    let additive_ok = logged == FormalGroupLaw::additive(universal.ring(), CAP)?;

    let mut c1_ok = true;
    for (law, t) in [
        (additive.clone(), tau.clone()),
        (universal.clone(), TwistData::from_b(universal.ring(), &todd_b(universal.ring())?)?),
    ] {
        let twisted = law.twist(&t)?;
        let amb = ambient_space(law.ring(), &["u", "v"], CAP + 1)?;
        let (u, v) = (amb.var("u")?, amb.var("v")?);
        let of = |c: &Series| twisted_first_chern(&t, c, TwistConvention::Coordinate);
        let lhs = of(&law.apply(&u, &v)?)?;
        let rhs = twisted.apply(&of(&u)?, &of(&v)?)?;
        c1_ok &= agree_to(&lhs, &rhs, CAP);
    }
    Ok((
        g_ok && b_ok && additive_ok && c1_ok,
        format!("g = 1 - e^-x: {g_ok}, b = ({}): {b_ok}, log twist additive: {additive_ok}, twisted c1: {c1_ok}", b.join(", ")),
    ))
}

fn todd_b(ring: &GradedRing) -> Result<Vec<crate::exactalg::RingElement>> {
    ["1", "1/2", "1/12", "0", "-1/720"].iter().map(|s| ring.parse(s)).collect()
}

fn riemann_roch() -> Result<(bool, String)> {
    let mut ok = true;
    let mut cases = 0;
    for n in 0..=6u32 {
        for d in 0..=6i64 {
            let report = grr_check(n, d)?;
            let oracle = binomial(BigInt::from(n as i64 + d), BigInt::from(n));
            ok &= report.agree && report.binomial == oracle.to_string();
            cases += 1;
        }
    }
    Ok((ok, format!("{cases} cases 0 <= n, d <= 6, K-side = CH-side = binomial")))
}

fn summarize(reports: &[CheckReport]) -> (bool, String) {
    let passed = reports.iter().all(|r| r.passed);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.check.name()).collect();
    let exhaustive: u64 = reports.iter().map(|r| r.exhaustive_cases).sum();
    let trials: u64 = reports.iter().map(|r| r.random_trials).sum();
    let mut detail = format!("{} checks, {exhaustive} exhaustive cases, {trials} random trials", reports.len());
    if !failed.is_empty() {
        detail.push_str(&format!(", failed: {}", failed.join(", ")));
    }
    (passed, detail)
}

fn bivariant_axioms() -> Result<(bool, String)> {
    let budget = Budget::default();
    let reports: Vec<CheckReport> = Check::axioms()
        .iter()
        .map(|&c| run_check(c, &Universal, &budget))
        .collect();
    let (passed, detail) = summarize(&reports);
    let mutant = run_check(Check::A12, &SkippedPullback, &budget);
    let caught = match &mutant.counterexample {
        Some(c) => !mutant.passed && reproduce(c, &SkippedPullback).as_ref() == Some(c),
        None => false,
    };
    Ok((passed && caught, format!("{detail}; mutant product caught and reproduced: {caught}")))
}

fn transformation() -> Result<(bool, String)> {
    let budget = Budget::default();
    let reports: Vec<CheckReport> = Check::transform()
        .iter()
        .map(|&c| run_check(c, &Universal, &budget))
        .collect();
    Ok(summarize(&reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_numbers() {
        assert_eq!(partitions(7), vec![1, 1, 2, 3, 5, 7, 11, 15]);
    }

    #[test]
    fn algebraic_criteria_pass() {
        for check in [lazard_structure, difference_laws, symmetric_calculus, conner_floyd, twisting, riemann_roch] {
            let (passed, detail) = check().unwrap();
            assert!(passed, "{detail}");
        }
    }

    #[test]
    fn report_rendering() {
        let report = SelftestReport {
            criteria: vec![Criterion {
                index: 1,
                title: "t".into(),
                passed: false,
                detail: "d".into(),
            }],
        };
        assert_eq!(report.render(), "[1] FAIL t: d\n0/1 criteria passed\n");
        assert!(!report.passed());
    }
}
