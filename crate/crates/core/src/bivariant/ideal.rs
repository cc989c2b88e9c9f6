//! Bounded spans of bivariant ideals. Every element is produced as
//! `g_*(alpha . f^*(r) . beta)` for a generator `r`, and the closure check
//! rewrites the result of each operation back into that form.

use serde::{Deserialize, Serialize};

use super::checks::{with_seeded_draw, Draw, Limits};
use super::cycle::{Bivariant, CycleJson, SpanCycle};
use super::site::{FibreProduct, FinMap};
use crate::error::Result;

/// The data `(r, f, alpha, beta, g)` of `g_*(alpha . f^*(r) . beta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealWitness {
    pub generator: usize,
    /// `f: Y' -> Y` for `r` over `X -> Y`.
    pub f: FinMap,
    /// Over `W -> X x_Y Y'`.
    pub alpha: SpanCycle,
    /// Over `Y' -> Z`.
    pub beta: SpanCycle,
    /// `g: W -> W'`.
    pub g: FinMap,
    /// `W' -> Z`, with `target . g` the base of the inner product.
    pub target: FinMap,
}

impl IdealWitness {
    pub fn evaluate(&self, e: &dyn Bivariant, generators: &[SpanCycle]) -> Result<SpanCycle> {
        let r = e.pullback(&generators[self.generator], &self.f)?;
        let inner = e.product(&e.product(&self.alpha, &r)?, &self.beta)?;
        e.pushforward(&inner, &self.g, &self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealElement {
    pub witness: IdealWitness,
    pub value: SpanCycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanBudget {
    pub max_size: usize,
    pub max_fiber: u32,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SpanBudget {
    fn default() -> Self {
        Self {
            max_size: 3,
            max_fiber: 2,
            samples: 200,
            seed: 42,
        }
    }
}

const ATTEMPTS: usize = 16;

/// `g: W -> W'` and `t: W' -> Z` with `t . g = b`, or `None` if the draw conflicts.
fn factor_through(d: &mut Draw, b: &FinMap) -> Option<(FinMap, FinMap)> {
    let n = d.size("W'");
    let g = d.map("g", b.source(), n);
    let mut images: Vec<Option<usize>> = vec![None; n];
    for (w, &z) in b.images().iter().enumerate() {
        match images[g.apply(w)] {
            Some(old) if old != z => return None,
            _ => images[g.apply(w)] = Some(z),
        }
    }
    let images = images
        .into_iter()
        .map(|z| z.unwrap_or_else(|| d.pick(b.target().max(1))))
        .collect::<Vec<_>>();
    if b.target() == 0 && n > 0 {
        return None;
    }
    Some((g, FinMap::new(b.target(), images).ok()?))
}

fn sample(e: &dyn Bivariant, generators: &[SpanCycle], d: &mut Draw) -> Result<Option<IdealElement>> {
    let generator = d.pick(generators.len());
    let r = &generators[generator];
    let ny2 = d.size("Y'");
    let f = d.map("f", ny2, r.base().target());
    let x2 = FibreProduct::new(r.base(), &f)?;
    if x2.size() == 0 {
        return Ok(None);
    }
    let nw = d.size("W");
    let alpha_base = d.map("alpha base", nw, x2.size());
    let alpha = d.cycle("alpha", &alpha_base);
    let nz = d.size("Z");
    let beta_base = d.map("beta base", ny2, nz);
    let beta = d.cycle("beta", &beta_base);
    let inner_base = alpha_base.then(x2.right())?.then(&beta_base)?;
    let Some((g, target)) = factor_through(d, &inner_base) else {
        return Ok(None);
    };
    let witness = IdealWitness {
        generator,
        f,
        alpha,
        beta,
        g,
        target,
    };
    let value = witness.evaluate(e, generators)?;
    Ok(Some(IdealElement { witness, value }))
}

/// Elements `g_*(alpha . f^*(r) . beta)` drawn within the budget, one per
/// sample, sorted by value with duplicates dropped.
pub fn ideal_span(e: &dyn Bivariant, generators: &[SpanCycle], budget: &SpanBudget) -> Result<Vec<IdealElement>> {
    if generators.is_empty() {
        return Ok(Vec::new());
    }
    let limits = Limits::random(budget.max_size, budget.max_fiber);
    let mut out = Vec::new();
    for i in 0..budget.samples {
        let found = with_seeded_draw(budget.seed, i, limits, |d| {
            for _ in 0..ATTEMPTS {
                if let Some(el) = sample(e, generators, d)? {
                    return Ok(Some(el));
                }
            }
            Ok::<_, crate::error::Error>(None)
        })?;
        out.extend(found);
    }
    out.sort_by(|a, b| a.value.cmp(&b.value));
    out.dedup_by(|a, b| a.value == b.value);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealOperation {
    Pushforward,
    LeftProduct,
    RightProduct,
    Pullback,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureFailure {
    pub element: usize,
    pub operation: IdealOperation,
    pub direct: CycleJson,
    pub rewritten: CycleJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub elements: usize,
    pub checked: u64,
    pub passed: bool,
    pub failure: Option<ClosureFailure>,
}

/// The result of one operation applied to `el`, computed directly and as a
/// new witness.
fn apply(
    e: &dyn Bivariant,
    generators: &[SpanCycle],
    el: &IdealElement,
    op: IdealOperation,
    d: &mut Draw,
) -> Result<Option<(SpanCycle, IdealWitness)>> {
    let w = &el.witness;
    Ok(match op {
        IdealOperation::Pushforward => {
            let Some((k, c)) = factor_through(d, &w.target) else {
                return Ok(None);
            };
            let direct = e.pushforward(&el.value, &k, &c)?;
            let witness = IdealWitness {
                g: w.g.then(&k)?,
                target: c,
                ..w.clone()
            };
            Some((direct, witness))
        }
        IdealOperation::RightProduct => {
            let nz2 = d.size("Z2");
            let m = d.map("m", w.target.target(), nz2);
            let gamma = d.cycle("gamma", &m);
            let direct = e.product(&el.value, &gamma)?;
            let witness = IdealWitness {
                beta: e.product(&w.beta, &gamma)?,
                target: w.target.then(&m)?,
                ..w.clone()
            };
            Some((direct, witness))
        }
        IdealOperation::LeftProduct => {
            let nv = d.size("V");
            let q = d.map("q", nv, w.target.source());
            let gamma = d.cycle("gamma", &q);
            let direct = e.product(&gamma, &el.value)?;
            // gamma . g_*(t) = g'_*(g^*(gamma) . t)
            let sq = FibreProduct::new(&q, &w.g)?;
            let witness = IdealWitness {
                alpha: e.product(&e.pullback(&gamma, &w.g)?, &w.alpha)?,
                g: sq.left().clone(),
                target: q.then(&w.target)?,
                ..w.clone()
            };
            Some((direct, witness))
        }
        IdealOperation::Pullback => {
            let nz2 = d.size("Z'");
            let h = d.map("h", nz2, w.target.target());
            let direct = e.pullback(&el.value, &h)?;
            let y2 = FibreProduct::new(w.beta.base(), &h)?;
            let f2 = y2.left().then(&w.f)?;
            let r_base = generators[w.generator].base();
            let old = FibreProduct::new(r_base, &w.f)?;
            let new = FibreProduct::new(r_base, &f2)?;
            // X x_Y Y'' -> X x_Y Y'
            let u = old.factor(new.left(), &new.right().then(y2.left())?)?;
            let alpha = e.pullback(&w.alpha, &u)?;
            let w2 = FibreProduct::new(w.alpha.base(), &u)?;
            let p = FibreProduct::new(&w.target, &h)?;
            let to_z2 = alpha.base().then(new.right())?.then(y2.right())?;
            let g = p.factor(&w2.left().then(&w.g)?, &to_z2)?;
            let witness = IdealWitness {
                generator: w.generator,
                f: f2,
                alpha,
                beta: e.pullback(&w.beta, &h)?,
                g,
                target: p.right().clone(),
            };
            Some((direct, witness))
        }
    })
}

const OPERATIONS: [IdealOperation; 4] = [
    IdealOperation::Pushforward,
    IdealOperation::LeftProduct,
    IdealOperation::RightProduct,
    IdealOperation::Pullback,
];

/// Applies each operation to every element (with seeded random data) and
/// checks that the result equals the rewritten witness.
pub fn closure_check(
    e: &dyn Bivariant,
    generators: &[SpanCycle],
    elements: &[IdealElement],
    budget: &SpanBudget,
) -> Result<ClosureReport> {
    let limits = Limits::random(budget.max_size, budget.max_fiber);
    let mut report = ClosureReport {
        elements: elements.len(),
        checked: 0,
        passed: true,
        failure: None,
    };
    for (i, el) in elements.iter().enumerate() {
        for (j, op) in OPERATIONS.into_iter().enumerate() {
            let stream = (i * OPERATIONS.len() + j) as u64;
            let result = with_seeded_draw(budget.seed, stream, limits, |d| {
                for _ in 0..ATTEMPTS {
                    if let Some(found) = apply(e, generators, el, op, d)? {
                        return Ok(Some(found));
                    }
                }
                Ok::<_, crate::error::Error>(None)
            })?;
            let Some((direct, witness)) = result else {
                continue;
            };
            report.checked += 1;
            let rewritten = witness.evaluate(e, generators)?;
            if rewritten != direct {
                report.passed = false;
                report.failure = Some(ClosureFailure {
                    element: i,
                    operation: op,
                    direct: direct.to_json(),
                    rewritten: rewritten.to_json(),
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::cycle::{to_target, SkippedPullback, Universal};
    use super::*;

    #[test]
    fn empty_generators_span_nothing() {
        assert!(ideal_span(&Universal, &[], &SpanBudget::default()).unwrap().is_empty());
    }

    #[test]
    fn equal_size_difference_is_already_zero() {
        let pt = FinMap::identity(1);
        let r = SpanCycle::from_terms(&pt, [(vec![2], 1), (vec![2], -1)]).unwrap();
        let span = ideal_span(&Universal, &[r], &SpanBudget::default()).unwrap();
        assert!(span.iter().all(|el| to_target(&el.value).unwrap().values.iter().all(|&v| v == 0)));
    }

    #[test]
    fn disjoint_union_relation_dies_in_the_target() {
        let pt = FinMap::identity(1);
        let r = SpanCycle::from_terms(&pt, [(vec![3], 1), (vec![1], -1), (vec![2], -1)]).unwrap();
        let gens = [r];
        let budget = SpanBudget {
            samples: 80,
            ..SpanBudget::default()
        };
        let span = ideal_span(&Universal, &gens, &budget).unwrap();
        assert!(span.len() > 10);
        assert!(span.iter().any(|el| !el.value.is_zero()));
        for el in &span {
            assert!(to_target(&el.value).unwrap().values.iter().all(|&v| v == 0));
        }
        let report = closure_check(&Universal, &gens, &span, &budget).unwrap();
        assert!(report.passed, "{:?}", report.failure);
        assert_eq!(report.checked, 4 * span.len() as u64);
    }

    #[test]
    fn closure_fails_for_a_broken_engine() {
        let base = FinMap::new(2, vec![0, 1, 1]).unwrap();
        let r = SpanCycle::from_terms(&base, [(vec![1, 2, 0], 1), (vec![0, 1, 1], -2)]).unwrap();
        let gens = [r];
        let budget = SpanBudget {
            samples: 40,
            ..SpanBudget::default()
        };
        let span = ideal_span(&SkippedPullback, &gens, &budget).unwrap();
        let report = closure_check(&SkippedPullback, &gens, &span, &budget).unwrap();
        assert!(!report.passed);
        let span = ideal_span(&Universal, &gens, &budget).unwrap();
        assert!(closure_check(&Universal, &gens, &span, &budget).unwrap().passed);
    }
}
