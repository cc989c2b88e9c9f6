//! Span cycles over the finite-set site, the three bivariant operations, and
//! the multiplicity-function target theory.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::site::{FibreProduct, FinMap};
use crate::error::{Error, Result};

fn overflow() -> Error {
    Error::OutOfRange("span coefficient overflow".into())
}

fn add_coeff(terms: &mut BTreeMap<Vec<u32>, i64>, fibers: Vec<u32>, c: i64) -> Result<()> {
    match terms.entry(fibers) {
        Entry::Vacant(slot) => {
            if c != 0 {
                slot.insert(c);
            }
        }
        Entry::Occupied(mut slot) => {
            let sum = slot.get().checked_add(c).ok_or_else(overflow)?;
            if sum == 0 {
                slot.remove();
            } else {
                *slot.get_mut() = sum;
            }
        }
    }
    Ok(())
}

/// A span `V -> X` in canonical form: `V` lists the fiber over `0`, then over `1`, ...
pub fn canonical_span(fibers: &[u32]) -> FinMap {
    let images = fibers
        .iter()
        .enumerate()
        .flat_map(|(x, &n)| std::iter::repeat(x).take(n as usize))
        .collect();
    FinMap::new(fibers.len(), images).expect("images in range")
}

/// An element of the universal group over a base map `f: X -> Y`: a
/// Z-combination of isomorphism classes of spans `V -> X`, each recorded by
/// its fiber sizes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanCycle {
    base: FinMap,
    degree: i32,
    terms: BTreeMap<Vec<u32>, i64>,
}

impl SpanCycle {
    pub fn zero(base: &FinMap) -> Self {
        Self {
            base: base.clone(),
            degree: 0,
            terms: BTreeMap::new(),
        }
    }

    /// `[V -> X]` with the given fiber sizes.
    pub fn span(base: &FinMap, fibers: Vec<u32>) -> Result<Self> {
        Self::from_terms(base, [(fibers, 1)])
    }

    pub fn from_terms(base: &FinMap, terms: impl IntoIterator<Item = (Vec<u32>, i64)>) -> Result<Self> {
        let mut out = Self::zero(base);
        for (fibers, c) in terms {
            if fibers.len() != base.source() {
                return Err(Error::Incompatible(format!(
                    "{} fiber sizes over a set of size {}",
                    fibers.len(),
                    base.source()
                )));
            }
            add_coeff(&mut out.terms, fibers, c)?;
        }
        Ok(out)
    }

    /// `theta(f) = [X -> X]` along `f`.
    pub fn orientation(f: &FinMap) -> Self {
        Self::span(f, vec![1; f.source()]).expect("fiber count matches")
    }

    /// `1_X = theta(id_X)`.
    pub fn unit(n: usize) -> Self {
        Self::orientation(&FinMap::identity(n))
    }

    pub fn base(&self) -> &FinMap {
        &self.base
    }

    /// Always 0: finite sets carry no dimension.
    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, i64)> {
        self.terms.iter().map(|(f, &c)| (f, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same_base(&self, other: &SpanCycle) -> Result<()> {
        if self.base != other.base {
            return Err(Error::Incompatible("cycles over different maps".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpanCycle) -> Result<SpanCycle> {
        self.check_same_base(other)?;
        let mut out = self.clone();
        for (f, c) in other.terms() {
            add_coeff(&mut out.terms, f.clone(), c)?;
        }
        Ok(out)
    }

    /// Adds `c [V -> X]` in place.
    pub fn add_span(&mut self, fibers: Vec<u32>, c: i64) -> Result<()> {
        if fibers.len() != self.base.source() {
            return Err(Error::Incompatible("fiber count does not match the base".into()));
        }
        add_coeff(&mut self.terms, fibers, c)
    }

    pub fn scale(&self, k: i64) -> Result<SpanCycle> {
        let mut out = Self::zero(&self.base);
        for (f, c) in self.terms() {
            add_coeff(&mut out.terms, f.clone(), c.checked_mul(k).ok_or_else(overflow)?)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpanCycle) -> Result<SpanCycle> {
        self.add(&other.scale(-1)?)
    }

    pub fn to_json(&self) -> CycleJson {
        CycleJson {
            base: self.base.clone(),
            degree: self.degree,
            terms: self
                .terms()
                .map(|(f, c)| CycleTermJson {
                    coeff: c,
                    fibers: f.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CycleJson) -> Result<Self> {
        Self::from_terms(&j.base, j.terms.iter().map(|t| (t.fibers.clone(), t.coeff)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleJson {
    pub base: FinMap,
    pub degree: i32,
    pub terms: Vec<CycleTermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTermJson {
    pub coeff: i64,
    pub fibers: Vec<u32>,
}

/// The three bivariant operations. Implementations other than [`Universal`]
/// exist to show that the checks catch mistakes.
pub trait Bivariant: Sync {
    /// `g_*(c)` for `c` over `f = new_base . g`.
    fn pushforward(&self, c: &SpanCycle, g: &FinMap, new_base: &FinMap) -> Result<SpanCycle>;

    /// `h^*(c)` over the projection `X x_Y Y' -> Y'`.
    fn pullback(&self, c: &SpanCycle, h: &FinMap) -> Result<SpanCycle>;

    /// `a . b` for `a` over `X -> Y` and `b` over `Y -> Z`.
    fn product(&self, a: &SpanCycle, b: &SpanCycle) -> Result<SpanCycle>;
}

fn check_pushforward(c: &SpanCycle, g: &FinMap, new_base: &FinMap) -> Result<()> {
    if g.then(new_base)? != c.base {
        return Err(Error::Incompatible("pushforward does not factor the base map".into()));
    }
    Ok(())
}

fn check_product(a: &SpanCycle, b: &SpanCycle) -> Result<()> {
    if a.base.target() != b.base.source() {
        return Err(Error::Incompatible("product of non-composable cycles".into()));
    }
    Ok(())
}

/// The universal theory of spans, computed by building the fibre products.
#[derive(Clone, Copy, Debug, Default)]
pub struct Universal;

impl Universal {
    /// `V' = V x_X (X x_Y W)` over `X`, from spans `V -> X` and `W -> Y`.
    fn double_pullback(f: &FinMap, v: &FinMap, w: &FinMap) -> Result<Vec<u32>> {
        let w_over_x = FibreProduct::new(f, w)?;
        let v_prime = FibreProduct::new(v, w_over_x.left())?;
        Ok(v_prime.left().then(v)?.fiber_sizes())
    }
}

impl Bivariant for Universal {
    fn pushforward(&self, c: &SpanCycle, g: &FinMap, new_base: &FinMap) -> Result<SpanCycle> {
        check_pushforward(c, g, new_base)?;
        let mut out = SpanCycle::zero(new_base);
        for (fibers, k) in c.terms() {
            let pushed = canonical_span(fibers).then(g)?.fiber_sizes();
            add_coeff(&mut out.terms, pushed, k)?;
        }
        Ok(out)
    }

    fn pullback(&self, c: &SpanCycle, h: &FinMap) -> Result<SpanCycle> {
        let square = FibreProduct::new(&c.base, h)?;
        let mut out = SpanCycle::zero(square.right());
        for (fibers, k) in c.terms() {
            let v = canonical_span(fibers);
            let v_prime = FibreProduct::new(&v, square.left())?;
            add_coeff(&mut out.terms, v_prime.right().fiber_sizes(), k)?;
        }
        Ok(out)
    }

    fn product(&self, a: &SpanCycle, b: &SpanCycle) -> Result<SpanCycle> {
        check_product(a, b)?;
        let mut out = SpanCycle::zero(&a.base.then(&b.base)?);
        for (fa, ka) in a.terms() {
            let v = canonical_span(fa);
            for (fb, kb) in b.terms() {
                let fibers = Self::double_pullback(&a.base, &v, &canonical_span(fb))?;
                add_coeff(&mut out.terms, fibers, ka.checked_mul(kb).ok_or_else(overflow)?)?;
            }
        }
        Ok(out)
    }
}

/// A deliberately broken engine: its product forgets to pull `W` back along
/// `V -> X`, so the result ignores `V`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SkippedPullback;

impl Bivariant for SkippedPullback {
    fn pushforward(&self, c: &SpanCycle, g: &FinMap, new_base: &FinMap) -> Result<SpanCycle> {
        Universal.pushforward(c, g, new_base)
    }

    fn pullback(&self, c: &SpanCycle, h: &FinMap) -> Result<SpanCycle> {
        Universal.pullback(c, h)
    }

    fn product(&self, a: &SpanCycle, b: &SpanCycle) -> Result<SpanCycle> {
        check_product(a, b)?;
        let mut out = SpanCycle::zero(&a.base.then(&b.base)?);
        for (_, ka) in a.terms() {
            for (fb, kb) in b.terms() {
                let w_over_x = FibreProduct::new(&a.base, &canonical_span(fb))?;
                let fibers = w_over_x.left().fiber_sizes();
                add_coeff(&mut out.terms, fibers, ka.checked_mul(kb).ok_or_else(overflow)?)?;
            }
        }
        Ok(out)
    }
}

/// An element of the target theory over `f: X -> Y`: a function `X -> Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultFn {
    pub base: FinMap,
    pub values: Vec<i64>,
}

impl MultFn {
    pub fn new(base: &FinMap, values: Vec<i64>) -> Result<Self> {
        if values.len() != base.source() {
            return Err(Error::Incompatible("one value per point".into()));
        }
        Ok(Self {
            base: base.clone(),
            values,
        })
    }

    /// Sums over fibers of `g`.
    pub fn pushforward(&self, g: &FinMap, new_base: &FinMap) -> Result<MultFn> {
        if g.then(new_base)? != self.base {
            return Err(Error::Incompatible("pushforward does not factor the base map".into()));
        }
        let mut values = vec![0i64; new_base.source()];
        for (x, &m) in self.values.iter().enumerate() {
            let slot = &mut values[g.apply(x)];
            *slot = slot.checked_add(m).ok_or_else(overflow)?;
        }
        MultFn::new(new_base, values)
    }

    /// Precomposes with the projection `X x_Y Y' -> X`.
    pub fn pullback(&self, h: &FinMap) -> Result<MultFn> {
        let square = FibreProduct::new(&self.base, h)?;
        let values = square.pairs().iter().map(|&(x, _)| self.values[x]).collect();
        MultFn::new(square.right(), values)
    }

    /// `(m . n)(x) = m(x) n(f(x))`.
    pub fn product(&self, other: &MultFn) -> Result<MultFn> {
        if self.base.target() != other.base.source() {
            return Err(Error::Incompatible("product of non-composable functions".into()));
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(x, &m)| m.checked_mul(other.values[self.base.apply(x)]).ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        MultFn::new(&self.base.then(&other.base)?, values)
    }
}

/// The Grothendieck transformation: `[V -> X]` goes to its fiber-size function.
pub fn to_target(c: &SpanCycle) -> Result<MultFn> {
    let mut values = vec![0i64; c.base.source()];
    for (fibers, k) in c.terms() {
        for (slot, &n) in values.iter_mut().zip(fibers) {
            let term = k.checked_mul(n as i64).ok_or_else(overflow)?;
            *slot = slot.checked_add(term).ok_or_else(overflow)?;
        }
    }
    MultFn::new(&c.base, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(target: usize, images: &[usize]) -> FinMap {
        FinMap::new(target, images.to_vec()).unwrap()
    }

    #[test]
    fn pushforward_examples() {
        let base = FinMap::to_point(2);
        let c = SpanCycle::span(&base, vec![2, 1]).unwrap();
        let id = FinMap::identity(2);
        assert_eq!(Universal.pushforward(&c, &id, &base).unwrap(), c);
        let collapsed = Universal.pushforward(&c, &FinMap::to_point(2), &FinMap::identity(1)).unwrap();
        assert_eq!(collapsed, SpanCycle::span(&FinMap::identity(1), vec![3]).unwrap());
        assert!(Universal.pushforward(&c, &id, &FinMap::identity(2)).is_err());
    }

    #[test]
    fn pullback_examples() {
        let id = FinMap::identity(2);
        let c = SpanCycle::span(&id, vec![2, 3]).unwrap();
        assert_eq!(Universal.pullback(&c, &id).unwrap(), c);
        let pick0 = map(2, &[0]);
        let pulled = Universal.pullback(&c, &pick0).unwrap();
        assert_eq!(pulled, SpanCycle::span(&FinMap::identity(1), vec![2]).unwrap());
    }

    #[test]
    fn product_examples() {
        let a = SpanCycle::span(&FinMap::to_point(2), vec![2, 1]).unwrap();
        let b = SpanCycle::span(&FinMap::identity(1), vec![3]).unwrap();
        let ab = Universal.product(&a, &b).unwrap();
        assert_eq!(ab, SpanCycle::span(&FinMap::to_point(2), vec![6, 3]).unwrap());
        assert_eq!(Universal.product(&a, &SpanCycle::unit(1)).unwrap(), a);
        assert_eq!(Universal.product(&SpanCycle::unit(2), &a).unwrap(), a);
        assert!(Universal.product(&b, &a).is_err());
        // the broken engine ignores the first factor
        assert_eq!(
            SkippedPullback.product(&a, &b).unwrap(),
            SpanCycle::span(&FinMap::to_point(2), vec![3, 3]).unwrap()
        );
    }

    #[test]
    fn cancellation_and_json() {
        let base = map(1, &[0, 0]);
        let a = SpanCycle::from_terms(&base, [(vec![1, 0], 2), (vec![0, 1], -1)]).unwrap();
        assert!(a.sub(&a).unwrap().is_zero());
        let j = serde_json::to_string(&a.to_json()).unwrap();
        let back: CycleJson = serde_json::from_str(&j).unwrap();
        assert_eq!(SpanCycle::from_json(&back).unwrap(), a);
        assert!(SpanCycle::span(&base, vec![1]).is_err());
    }

    #[test]
    fn target_values() {
        assert_eq!(to_target(&SpanCycle::unit(3)).unwrap().values, vec![1, 1, 1]);
        let c = SpanCycle::span(&FinMap::to_point(2), vec![2, 1]).unwrap();
        assert_eq!(to_target(&c).unwrap().values, vec![2, 1]);
        // disjoint union is a sum only after the transformation
        let base = FinMap::to_point(1);
        let r = SpanCycle::from_terms(&base, [(vec![3], 1), (vec![1], -1), (vec![2], -1)]).unwrap();
        assert!(!r.is_zero());
        assert_eq!(to_target(&r).unwrap().values, vec![0]);
    }
}
