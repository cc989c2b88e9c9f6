//! Property checks for the bivariant axioms, orientations and the
//! Grothendieck transformation.
//!
//! Every check is written once against a [`Chooser`]. The exhaustive driver
//! walks the whole tree of choices (small sets, fibers in `{0,1}`, single
//! spans, which suffices by multilinearity of the operations); the random
//! driver feeds choices from a ChaCha stream keyed by seed and trial index.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cycle::{to_target, Bivariant, MultFn, SpanCycle};
use super::site::{FibreProduct, FinMap};
use crate::error::{Error, Result};

/// A source of bounded choices.
pub trait Chooser {
    /// Some value in `0..n`, `n >= 1`.
    fn pick(&mut self, n: usize) -> usize;
}

/// Walks every choice sequence depth first.
#[derive(Default)]
struct Replay {
    trail: Vec<(usize, usize)>,
    pos: usize,
}

impl Chooser for Replay {
    fn pick(&mut self, n: usize) -> usize {
        let c = match self.trail.get(self.pos) {
            Some(&(c, _)) => c,
            None => {
                self.trail.push((0, n));
                0
            }
        };
        self.pos += 1;
        c
    }
}

impl Replay {
    /// Moves to the next sequence; false when the tree is exhausted.
    fn advance(&mut self) -> bool {
        self.trail.truncate(self.pos);
        self.pos = 0;
        while let Some((c, n)) = self.trail.pop() {
            if c + 1 < n {
                self.trail.push((c + 1, n));
                return true;
            }
        }
        false
    }

    fn rewind(&self) -> Replay {
        Replay {
            trail: self.trail.clone(),
            pos: 0,
        }
    }
}

struct Seeded(ChaCha8Rng);

impl Seeded {
    fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Seeded(rng)
    }
}

impl Chooser for Seeded {
    fn pick(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }
}

/// Bounds on what a [`Draw`] may produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_size: usize,
    pub max_fiber: u32,
    pub max_terms: usize,
    pub max_coeff: i64,
}

impl Limits {
    /// Single spans with fibers in `{0, 1}` over sets of size at most `max_size`.
    pub fn exhaustive(max_size: usize) -> Self {
        Self {
            max_size,
            max_fiber: 1,
            max_terms: 1,
            max_coeff: 1,
        }
    }

    pub fn random(max_size: usize, max_fiber: u32) -> Self {
        Self {
            max_size,
            max_fiber,
            max_terms: 2,
            max_coeff: 2,
        }
    }
}

/// The named sets, maps and cycles of one test case.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub sets: BTreeMap<String, usize>,
    pub maps: BTreeMap<String, FinMap>,
    pub cycles: BTreeMap<String, super::cycle::CycleJson>,
}

/// Draws sets, maps and cycles from a chooser, optionally recording them.
pub struct Draw<'a> {
    chooser: &'a mut dyn Chooser,
    limits: Limits,
    record: Option<Diagram>,
}

impl Draw<'_> {
    pub(crate) fn size(&mut self, name: &str) -> usize {
        let n = 1 + self.chooser.pick(self.limits.max_size);
        if let Some(d) = &mut self.record {
            d.sets.insert(name.into(), n);
        }
        n
    }

    pub(crate) fn map(&mut self, name: &str, source: usize, target: usize) -> FinMap {
        let images = (0..source).map(|_| self.chooser.pick(target)).collect();
        let f = FinMap::new(target, images).expect("picked images are in range");
        if let Some(d) = &mut self.record {
            d.maps.insert(name.into(), f.clone());
        }
        f
    }

    pub(crate) fn pick(&mut self, n: usize) -> usize {
        self.chooser.pick(n)
    }

    fn fibers(&mut self, n: usize) -> Vec<u32> {
        let bound = self.limits.max_fiber as usize + 1;
        (0..n).map(|_| self.chooser.pick(bound) as u32).collect()
    }

    pub(crate) fn cycle(&mut self, name: &str, base: &FinMap) -> SpanCycle {
        let terms = 1 + self.chooser.pick(self.limits.max_terms);
        let mut out = SpanCycle::zero(base);
        for _ in 0..terms {
            let coeff = if self.limits.max_coeff <= 1 {
                1
            } else {
                let k = self.chooser.pick(2 * self.limits.max_coeff as usize) as i64;
                if k < self.limits.max_coeff {
                    k + 1
                } else {
                    self.limits.max_coeff - 1 - k
                }
            };
            let fibers = self.fibers(base.source());
            out.add_span(fibers, coeff).expect("fiber count matches");
        }
        if let Some(d) = &mut self.record {
            d.cycles.insert(name.into(), out.to_json());
        }
        out
    }
}

/// Runs `f` on a draw fed by the ChaCha stream `(seed, trial)`.
pub(crate) fn with_seeded_draw<T>(seed: u64, trial: u64, limits: Limits, f: impl FnOnce(&mut Draw) -> T) -> T {
    let mut chooser = Seeded::new(seed, trial);
    let mut d = Draw {
        chooser: &mut chooser,
        limits,
        record: None,
    };
    f(&mut d)
}

/// The result of one case.
pub enum Outcome {
    Pass,
    /// The drawn data does not satisfy the check's hypotheses.
    Skip,
    Fail {
        note: String,
        lhs: serde_json::Value,
        rhs: serde_json::Value,
    },
}

fn cycle_value(c: &SpanCycle) -> serde_json::Value {
    serde_json::to_value(c.to_json()).expect("cycles serialize")
}

fn expect_equal(note: &str, lhs: &SpanCycle, rhs: &SpanCycle) -> Option<Outcome> {
    (lhs != rhs).then(|| Outcome::Fail {
        note: note.into(),
        lhs: cycle_value(lhs),
        rhs: cycle_value(rhs),
    })
}

fn expect_equal_fn(note: &str, lhs: &MultFn, rhs: &MultFn) -> Option<Outcome> {
    (lhs != rhs).then(|| Outcome::Fail {
        note: note.into(),
        lhs: serde_json::to_value(lhs).expect("functions serialize"),
        rhs: serde_json::to_value(rhs).expect("functions serialize"),
    })
}

/// Everything the checker can test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Pushforward commutes with the product.
    A12,
    /// Pullback commutes with the product.
    A13,
    /// Pullback commutes with pushforward.
    A23,
    /// Projection (push-pull) formula.
    A123,
    Commutativity,
    /// `theta(f) . theta(g) = theta(g f)` and units.
    Orientation,
    /// Orientations are stable under pullback.
    NiceOrientation,
    /// `s^!(s_*(a)) = s^*(s_!(1)) . a` for sections with a retraction.
    SectionLemma,
    /// Right multiplication by `theta(f)` is inverted by the graph construction.
    StrongOrientation,
    /// `. theta(X -> pt)` is a ring isomorphism onto homology with the diagonal product.
    PoincareDuality,
    TransformProduct,
    TransformPushforward,
    TransformPullback,
    /// Distinct canonical spans have distinct fiber functions.
    TransformInjective,
}

impl Check {
    pub const ALL: [Check; 14] = [
        Check::A12,
        Check::A13,
        Check::A23,
        Check::A123,
        Check::Commutativity,
        Check::Orientation,
        Check::NiceOrientation,
        Check::SectionLemma,
        Check::StrongOrientation,
        Check::PoincareDuality,
        Check::TransformProduct,
        Check::TransformPushforward,
        Check::TransformPullback,
        Check::TransformInjective,
    ];

    pub fn axioms() -> &'static [Check] {
        &Self::ALL[..10]
    }

    pub fn transform() -> &'static [Check] {
        &Self::ALL[10..]
    }

    pub fn name(self) -> &'static str {
        match self {
            Check::A12 => "a12",
            Check::A13 => "a13",
            Check::A23 => "a23",
            Check::A123 => "a123",
            Check::Commutativity => "commutativity",
            Check::Orientation => "orientation",
            Check::NiceOrientation => "nice-orientation",
            Check::SectionLemma => "section-lemma",
            Check::StrongOrientation => "strong-orientation",
            Check::PoincareDuality => "poincare-duality",
            Check::TransformProduct => "transform-product",
            Check::TransformPushforward => "transform-pushforward",
            Check::TransformPullback => "transform-pullback",
            Check::TransformInjective => "transform-injective",
        }
    }

    pub fn from_name(name: &str) -> Option<Check> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    fn run(self, e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
        match self {
            Check::A12 => a12(e, d),
            Check::A13 => a13(e, d),
            Check::A23 => a23(e, d),
            Check::A123 => a123(e, d),
            Check::Commutativity => commutativity(e, d),
            Check::Orientation => orientation(e, d),
            Check::NiceOrientation => nice_orientation(e, d),
            Check::SectionLemma => section_lemma(e, d),
            Check::StrongOrientation => strong_orientation(e, d),
            Check::PoincareDuality => poincare_duality(e, d),
            Check::TransformProduct => transform_product(e, d),
            Check::TransformPushforward => transform_pushforward(e, d),
            Check::TransformPullback => transform_pullback(e, d),
            Check::TransformInjective => transform_injective(d),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn done(failures: impl IntoIterator<Item = Option<Outcome>>) -> Result<Outcome> {
    Ok(failures.into_iter().flatten().next().unwrap_or(Outcome::Pass))
}

fn a12(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, nx2, ny, nz) = (d.size("X"), d.size("X'"), d.size("Y"), d.size("Z"));
    let h = d.map("h: X -> X'", nx, nx2);
    let f2 = d.map("f': X' -> Y", nx2, ny);
    let g = d.map("g: Y -> Z", ny, nz);
    let f = h.then(&f2)?;
    let alpha = d.cycle("alpha over f' h", &f);
    let beta = d.cycle("beta over g", &g);
    let lhs = e.pushforward(&e.product(&alpha, &beta)?, &h, &f2.then(&g)?)?;
    let rhs = e.product(&e.pushforward(&alpha, &h, &f2)?, &beta)?;
    done([expect_equal("h_*(alpha . beta) = h_*(alpha) . beta", &lhs, &rhs)])
}

fn a13(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, nz, nz2) = (d.size("X"), d.size("Y"), d.size("Z"), d.size("Z'"));
    let f = d.map("f: X -> Y", nx, ny);
    let g = d.map("g: Y -> Z", ny, nz);
    let h = d.map("h: Z' -> Z", nz2, nz);
    let alpha = d.cycle("alpha over f", &f);
    let beta = d.cycle("beta over g", &g);
    let lhs = e.pullback(&e.product(&alpha, &beta)?, &h)?;
    let y2 = FibreProduct::new(&g, &h)?;
    let x2 = FibreProduct::new(&f, y2.left())?;
    let rhs = e.product(&e.pullback(&alpha, y2.left())?, &e.pullback(&beta, &h)?)?;
    // identify X x_Y (Y x_Z Z') with X x_Z Z'
    let p = FibreProduct::new(&f.then(&g)?, &h)?;
    let iso = p.factor(x2.left(), &x2.right().then(y2.right())?)?;
    let rhs = e.pushforward(&rhs, &iso, p.right())?;
    done([expect_equal("h^*(alpha . beta) = h'^*(alpha) . h^*(beta)", &lhs, &rhs)])
}

fn a23(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, nx2, ny, ny2) = (d.size("X"), d.size("X'"), d.size("Y"), d.size("Y'"));
    let h = d.map("h: X -> X'", nx, nx2);
    let f2 = d.map("f': X' -> Y", nx2, ny);
    let g = d.map("g: Y' -> Y", ny2, ny);
    let f = h.then(&f2)?;
    let alpha = d.cycle("alpha over f' h", &f);
    let lhs = e.pullback(&e.pushforward(&alpha, &h, &f2)?, &g)?;
    let sq = FibreProduct::new(&f, &g)?;
    let sq2 = FibreProduct::new(&f2, &g)?;
    let h2 = sq2.factor(&sq.left().then(&h)?, sq.right())?;
    let rhs = e.pushforward(&e.pullback(&alpha, &g)?, &h2, sq2.right())?;
    done([expect_equal("g^*(h_*(alpha)) = h'_*(g^*(alpha))", &lhs, &rhs)])
}

fn a123(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, ny2, nz) = (d.size("X"), d.size("Y"), d.size("Y'"), d.size("Z"));
    let f = d.map("f: X -> Y", nx, ny);
    let g = d.map("g: Y' -> Y", ny2, ny);
    let h = d.map("h: Y -> Z", ny, nz);
    let alpha = d.cycle("alpha over f", &f);
    let beta = d.cycle("beta over h g", &g.then(&h)?);
    let sq = FibreProduct::new(&f, &g)?;
    let lhs = e.pushforward(&e.product(&e.pullback(&alpha, &g)?, &beta)?, sq.left(), &f.then(&h)?)?;
    let rhs = e.product(&alpha, &e.pushforward(&beta, &g, &h)?)?;
    done([expect_equal("g'_*(g^*(alpha) . beta) = alpha . g_*(beta)", &lhs, &rhs)])
}

fn commutativity(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, nz) = (d.size("X"), d.size("Y"), d.size("Z"));
    let f = d.map("f: X -> Z", nx, nz);
    let g = d.map("g: Y -> Z", ny, nz);
    let alpha = d.cycle("alpha over f", &f);
    let beta = d.cycle("beta over g", &g);
    let w = FibreProduct::new(&f, &g)?;
    let lhs = e.product(&e.pullback(&alpha, &g)?, &beta)?;
    let rhs = e.product(&e.pullback(&beta, &f)?, &alpha)?;
    let rhs = e.pushforward(&rhs, &w.swap(), lhs.base())?;
    done([expect_equal("g^*(alpha) . beta = f^*(beta) . alpha", &lhs, &rhs)])
}

fn orientation(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, nz) = (d.size("X"), d.size("Y"), d.size("Z"));
    let f = d.map("f: X -> Y", nx, ny);
    let g = d.map("g: Y -> Z", ny, nz);
    let alpha = d.cycle("alpha over f", &f);
    let composite = e.product(&SpanCycle::orientation(&f), &SpanCycle::orientation(&g))?;
    let left_unit = e.product(&SpanCycle::unit(nx), &alpha)?;
    let right_unit = e.product(&alpha, &SpanCycle::unit(ny))?;
    done([
        expect_equal(
            "theta(f) . theta(g) = theta(g f)",
            &composite,
            &SpanCycle::orientation(&f.then(&g)?),
        ),
        expect_equal("theta(id) . alpha = alpha", &left_unit, &alpha),
        expect_equal("alpha . theta(id) = alpha", &right_unit, &alpha),
    ])
}

fn nice_orientation(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, ny2) = (d.size("X"), d.size("Y"), d.size("Y'"));
    let f = d.map("f: X -> Y", nx, ny);
    let g = d.map("g: Y' -> Y", ny2, ny);
    let lhs = e.pullback(&SpanCycle::orientation(&f), &g)?;
    let sq = FibreProduct::new(&f, &g)?;
    done([expect_equal(
        "g^*(theta(f)) = theta(f')",
        &lhs,
        &SpanCycle::orientation(sq.right()),
    )])
}

fn section_lemma(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny) = (d.size("X"), d.size("Y"));
    let s = d.map("s: X -> Y", nx, ny);
    let Some(r) = s.retraction() else {
        return Ok(Outcome::Skip);
    };
    debug_assert_eq!(s.then(&r)?, FinMap::identity(nx));
    let alpha = d.cycle("alpha over X -> pt", &FinMap::to_point(nx));
    let theta = SpanCycle::orientation(&s);
    // s^!(s_*(alpha))
    let lhs = e.product(&theta, &e.pushforward(&alpha, &s, &FinMap::to_point(ny))?)?;
    // s^*(s_!(1_X)) . alpha
    let shriek = e.pushforward(&e.product(&SpanCycle::unit(nx), &theta)?, &s, &FinMap::identity(ny))?;
    let pulled = e.pullback(&shriek, &s)?;
    let sq = FibreProduct::new(&FinMap::identity(ny), &s)?;
    let pulled = e.pushforward(&pulled, sq.right(), &FinMap::identity(nx))?;
    let rhs = e.product(&pulled, &alpha)?;
    done([expect_equal("s^!(s_*(alpha)) = s^*(s_!(1)) . alpha", &lhs, &rhs)])
}

/// `theta(graph of g) . f^*(beta)`: the inverse of `. theta(f)` on cycles over `f g`.
pub fn strong_orientation_inverse(e: &dyn Bivariant, f: &FinMap, g: &FinMap, beta: &SpanCycle) -> Result<SpanCycle> {
    if &g.then(f)? != beta.base() {
        return Err(Error::Incompatible("beta must live over f g".into()));
    }
    let sq = FibreProduct::new(beta.base(), f)?;
    let graph = sq.factor(&FinMap::identity(g.source()), g)?;
    e.product(&SpanCycle::orientation(&graph), &e.pullback(beta, f)?)
}

fn strong_orientation(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, nz) = (d.size("X"), d.size("Y"), d.size("Z"));
    let f = d.map("f: Y -> Z", ny, nz);
    let g = d.map("g: X -> Y", nx, ny);
    let alpha = d.cycle("alpha over g", &g);
    let beta = d.cycle("beta over f g", &g.then(&f)?);
    let theta = SpanCycle::orientation(&f);
    let there_and_back = strong_orientation_inverse(e, &f, &g, &e.product(&alpha, &theta)?)?;
    let back_and_there = e.product(&strong_orientation_inverse(e, &f, &g, &beta)?, &theta)?;
    done([
        expect_equal("Phi(alpha . theta(f)) = alpha", &there_and_back, &alpha),
        expect_equal("Phi(beta) . theta(f) = beta", &back_and_there, &beta),
    ])
}

/// `Delta^!(pr^*(a) . b)` for homology classes over `X -> pt`.
pub fn intersection_product(e: &dyn Bivariant, a: &SpanCycle, b: &SpanCycle) -> Result<SpanCycle> {
    let n = a.base().source();
    let pi = FinMap::to_point(n);
    if a.base() != &pi || b.base() != &pi {
        return Err(Error::Incompatible("intersection needs classes over X -> pt".into()));
    }
    let exterior = e.product(&e.pullback(a, &pi)?, b)?;
    let square = FibreProduct::new(&pi, &pi)?;
    let diagonal = square.factor(&FinMap::identity(n), &FinMap::identity(n))?;
    e.product(&SpanCycle::orientation(&diagonal), &exterior)
}

fn poincare_duality(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let nx = d.size("X");
    let id = FinMap::identity(nx);
    let pi = FinMap::to_point(nx);
    let alpha = d.cycle("alpha over id", &id);
    let beta = d.cycle("beta over id", &id);
    let theta = SpanCycle::orientation(&pi);
    let dual = |c: &SpanCycle| e.product(c, &theta);
    let same_spans = SpanCycle::from_terms(&pi, alpha.terms().map(|(f, c)| (f.clone(), c)))?;
    let inverse = strong_orientation_inverse(e, &pi, &id, &dual(&alpha)?)?;
    let ring = dual(&e.product(&alpha, &beta)?)?;
    let intersected = intersection_product(e, &dual(&alpha)?, &dual(&beta)?)?;
    done([
        expect_equal("alpha . theta(pi) has the same spans", &dual(&alpha)?, &same_spans),
        expect_equal("the inverse recovers alpha", &inverse, &alpha),
        expect_equal("PD(alpha . beta) = PD(alpha) . PD(beta)", &ring, &intersected),
    ])
}

fn transform_product(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, nz) = (d.size("X"), d.size("Y"), d.size("Z"));
    let f = d.map("f: X -> Y", nx, ny);
    let g = d.map("g: Y -> Z", ny, nz);
    let alpha = d.cycle("alpha over f", &f);
    let beta = d.cycle("beta over g", &g);
    let lhs = to_target(&e.product(&alpha, &beta)?)?;
    let rhs = to_target(&alpha)?.product(&to_target(&beta)?)?;
    done([expect_equal_fn("t(alpha . beta) = t(alpha) . t(beta)", &lhs, &rhs)])
}

fn transform_pushforward(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, nx2, ny) = (d.size("X"), d.size("X'"), d.size("Y"));
    let h = d.map("h: X -> X'", nx, nx2);
    let f2 = d.map("f': X' -> Y", nx2, ny);
    let alpha = d.cycle("alpha over f' h", &h.then(&f2)?);
    let lhs = to_target(&e.pushforward(&alpha, &h, &f2)?)?;
    let rhs = to_target(&alpha)?.pushforward(&h, &f2)?;
    done([expect_equal_fn("t(h_*(alpha)) = h_*(t(alpha))", &lhs, &rhs)])
}

fn transform_pullback(e: &dyn Bivariant, d: &mut Draw) -> Result<Outcome> {
    let (nx, ny, ny2) = (d.size("X"), d.size("Y"), d.size("Y'"));
    let f = d.map("f: X -> Y", nx, ny);
    let g = d.map("g: Y' -> Y", ny2, ny);
    let alpha = d.cycle("alpha over f", &f);
    let lhs = to_target(&e.pullback(&alpha, &g)?)?;
    let rhs = to_target(&alpha)?.pullback(&g)?;
    done([expect_equal_fn("t(g^*(alpha)) = g^*(t(alpha))", &lhs, &rhs)])
}

fn transform_injective(d: &mut Draw) -> Result<Outcome> {
    let (nx, ny) = (d.size("X"), d.size("Y"));
    let f = d.map("f: X -> Y", nx, ny);
    let a = d.fibers(nx);
    let b = d.fibers(nx);
    if a == b {
        return Ok(Outcome::Skip);
    }
    let (sa, sb) = (SpanCycle::span(&f, a)?, SpanCycle::span(&f, b)?);
    let (ta, tb) = (to_target(&sa)?, to_target(&sb)?);
    if ta == tb {
        return Ok(Outcome::Fail {
            note: "distinct spans with equal fiber functions".into(),
            lhs: cycle_value(&sa),
            rhs: cycle_value(&sb),
        });
    }
    Ok(Outcome::Pass)
}

/// Sizes and trial counts for a check run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest set in the exhaustive sweep (0 skips it).
    pub exhaustive_size: usize,
    /// Largest set in random trials.
    pub max_size: usize,
    pub max_fiber: u32,
    pub trials: u64,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            exhaustive_size: 3,
            max_size: 4,
            max_fiber: 3,
            trials: 1000,
            seed: 42,
        }
    }
}

/// Where a counterexample came from, enough to reproduce it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Origin {
    Exhaustive { case: u64, max_size: usize },
    Random { seed: u64, trial: u64, max_size: usize, max_fiber: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: Check,
    pub origin: Origin,
    pub note: String,
    pub diagram: Diagram,
    pub lhs: serde_json::Value,
    pub rhs: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub passed: bool,
    pub exhaustive_cases: u64,
    pub random_trials: u64,
    pub skipped: u64,
    pub counterexample: Option<Counterexample>,
}

fn failure_from(
    check: Check,
    origin: Origin,
    outcome: std::result::Result<Outcome, Error>,
    diagram: Diagram,
) -> Option<Counterexample> {
    let (note, lhs, rhs) = match outcome {
        Ok(Outcome::Fail { note, lhs, rhs }) => (note, lhs, rhs),
        Ok(_) => return None,
        Err(err) => (format!("operation failed: {err}"), serde_json::Value::Null, serde_json::Value::Null),
    };
    Some(Counterexample {
        check,
        origin,
        note,
        diagram,
        lhs,
        rhs,
    })
}

fn run_recorded(check: Check, e: &dyn Bivariant, chooser: &mut dyn Chooser, limits: Limits) -> (Result<Outcome>, Diagram) {
    let mut d = Draw {
        chooser,
        limits,
        record: Some(Diagram::default()),
    };
    let out = check.run(e, &mut d);
    (out, d.record.unwrap_or_default())
}

fn is_failure(out: &Result<Outcome>) -> bool {
    !matches!(out, Ok(Outcome::Pass | Outcome::Skip))
}

/// Runs one check: the exhaustive sweep first, then seeded random trials.
/// Stops at the first counterexample.
pub fn run_check(check: Check, e: &dyn Bivariant, budget: &Budget) -> CheckReport {
    let mut report = CheckReport {
        check,
        passed: true,
        exhaustive_cases: 0,
        random_trials: 0,
        skipped: 0,
        counterexample: None,
    };

    if budget.exhaustive_size > 0 {
        let limits = Limits::exhaustive(budget.exhaustive_size);
        let mut replay = Replay::default();
        loop {
            let mut d = Draw {
                chooser: &mut replay,
                limits,
                record: None,
            };
            let out = check.run(e, &mut d);
            report.exhaustive_cases += 1;
            if matches!(out, Ok(Outcome::Skip)) {
                report.skipped += 1;
            }
            if is_failure(&out) {
                let mut again = replay.rewind();
                let (out, diagram) = run_recorded(check, e, &mut again, limits);
                let origin = Origin::Exhaustive {
                    case: report.exhaustive_cases - 1,
                    max_size: budget.exhaustive_size,
                };
                report.counterexample = failure_from(check, origin, out, diagram);
                report.passed = false;
                return report;
            }
            if !replay.advance() {
                break;
            }
        }
    }

    let limits = Limits::random(budget.max_size, budget.max_fiber);
    let outcomes: Vec<(bool, bool)> = (0..budget.trials)
        .into_par_iter()
        .map(|trial| {
            let mut chooser = Seeded::new(budget.seed, trial);
            let mut d = Draw {
                chooser: &mut chooser,
                limits,
                record: None,
            };
            let out = check.run(e, &mut d);
            (is_failure(&out), matches!(out, Ok(Outcome::Skip)))
        })
        .collect();
    report.random_trials = budget.trials;
    report.skipped += outcomes.iter().filter(|o| o.1).count() as u64;
    if let Some(trial) = outcomes.iter().position(|o| o.0) {
        let trial = trial as u64;
        let (out, diagram) = run_recorded(check, e, &mut Seeded::new(budget.seed, trial), limits);
        let origin = Origin::Random {
            seed: budget.seed,
            trial,
            max_size: budget.max_size,
            max_fiber: budget.max_fiber,
        };
        report.counterexample = failure_from(check, origin, out, diagram);
        report.passed = false;
    }
    report
}

/// Re-runs the case a counterexample came from.
pub fn reproduce(c: &Counterexample, e: &dyn Bivariant) -> Option<Counterexample> {
    match c.origin {
        Origin::Random {
            seed,
            trial,
            max_size,
            max_fiber,
        } => {
            let limits = Limits::random(max_size, max_fiber);
            let (out, diagram) = run_recorded(c.check, e, &mut Seeded::new(seed, trial), limits);
            failure_from(c.check, c.origin.clone(), out, diagram)
        }
        Origin::Exhaustive { case, max_size } => {
            let limits = Limits::exhaustive(max_size);
            let mut replay = Replay::default();
            for _ in 0..case {
                let mut d = Draw {
                    chooser: &mut replay,
                    limits,
                    record: None,
                };
                let _ = c.check.run(e, &mut d);
                if !replay.advance() {
                    return None;
                }
            }
            let (out, diagram) = run_recorded(c.check, e, &mut replay, limits);
            failure_from(c.check, c.origin.clone(), out, diagram)
        }
    }
}
