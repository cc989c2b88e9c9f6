use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::lattice::{self, PivotRow};
use super::parse::{self, ExprAlgebra};
use crate::error::{Error, Result};

pub type Q = BigRational;

/// Exponent vector over the generators of a ring (always full length).
pub type Exps = Vec<u32>;

/// Coefficient domain of a [`GradedRing`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffDomain {
    Integers,
    Rationals,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub weight: i32,
}

/// A sparse polynomial in the generators of some ring. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub(crate) terms: BTreeMap<Exps, Q>,
}

impl RingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomial(exps: Exps, coeff: Q) -> Self {
        let mut e = Self::zero();
        e.add_term(exps, coeff);
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn add_term(&mut self, exps: Exps, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// The coefficient of the empty monomial.
    pub fn constant_term(&self) -> Q {
        self.terms
            .iter()
            .find(|(e, _)| e.iter().all(|&x| x == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// True when the element is `c * 1` for a rational `c` (including zero).
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    fn scaled(&self, q: &Q) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect(),
        }
    }
}

/// One weight piece of the relation ideal, reduced once at construction.
#[derive(Debug)]
struct Piece {
    columns: Vec<Exps>,
    index: HashMap<Exps, usize>,
    reducer: Reducer,
    /// Echelon basis of the ideal in this weight.
    basis: Vec<RingElement>,
    int_rows: Option<Vec<Vec<BigInt>>>,
}

#[derive(Debug)]
enum Reducer {
    /// Pivot monomial -> its normal form; all other monomials are already reduced.
    Linear(HashMap<Exps, RingElement>),
    /// Integer lattice with non-unit pivots: reduction modulo the Hermite rows.
    Lattice(Vec<PivotRow<BigInt>>),
}

#[derive(Debug)]
struct RingInner {
    gens: Vec<Generator>,
    sizes: Vec<u32>,
    relations: Vec<RingElement>,
    domain: CoeffDomain,
    cap: u32,
    pieces: HashMap<i32, Piece>,
    inverses: Vec<Option<usize>>,
    /// Products are taken in `R / R_{>cap}` instead of failing on overflow.
    truncate: bool,
    fingerprint: u64,
}

/// A finitely presented graded commutative ring with normal forms up to a size cap.
///
/// The size of a monomial is `sum(e_i * max(|w_i|, 1))`; for positively weighted
/// presentations it equals the weight. Normal forms are only defined for elements
/// whose monomials all have size at most `cap`.
#[derive(Clone)]
pub struct GradedRing {
    inner: Arc<RingInner>,
}

impl std::fmt::Debug for GradedRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GradedRing")
            .field("generators", &self.names())
            .field("relations", &self.inner.relations.len())
            .field("domain", &self.inner.domain)
            .field("cap", &self.inner.cap)
            .finish()
    }
}

impl PartialEq for GradedRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.fingerprint == other.inner.fingerprint
                && self.inner.gens == other.inner.gens
                && self.inner.domain == other.inner.domain
                && self.inner.cap == other.inner.cap
                && self.inner.truncate == other.inner.truncate
                && self.inner.relations == other.inner.relations)
    }
}

impl Eq for GradedRing {}

fn valid_name(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some(c) if c.is_ascii_alphabetic())
        && ch.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Raw polynomial arithmetic over named generators, used to read relations
/// before the ring exists.
struct RawPolys<'a> {
    names: &'a [String],
}

impl ExprAlgebra for RawPolys<'_> {
    type Elem = RingElement;
    fn constant(&self, q: Q) -> RingElement {
        RingElement::monomial(vec![0; self.names.len()], q)
    }
    fn variable(&self, name: &str) -> Result<RingElement> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        let mut e = vec![0; self.names.len()];
        e[i] = 1;
        Ok(RingElement::monomial(e, Q::one()))
    }
    fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        raw_add(a, b)
    }
    fn neg(&self, a: &RingElement) -> RingElement {
        a.scaled(&-Q::one())
    }
    fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        Ok(raw_mul(a, b))
    }
}

pub(crate) fn raw_add(a: &RingElement, b: &RingElement) -> RingElement {
    let mut out = a.clone();
    for (e, c) in &b.terms {
        out.add_term(e.clone(), c.clone());
    }
    out
}

pub(crate) fn raw_mul(a: &RingElement, b: &RingElement) -> RingElement {
    let mut out = RingElement::zero();
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let e: Exps = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            out.add_term(e, ca * cb);
        }
    }
    out
}

/// Parses a relation (or any polynomial) over the given generator names.
pub fn parse_polynomial(names: &[String], src: &str) -> Result<RingElement> {
    parse::parse_expr(&RawPolys { names }, src)
}

impl GradedRing {
    /// Builds the ring `Z[gens]/(relations)` or `Q[gens]/(relations)` with
    /// normal-form tables for every monomial of size at most `cap`.
    ///
    /// A relation with a monomial above the cap can never be multiplied into the
    /// box and is ignored.
    pub fn new(
        generators: Vec<(String, i32)>,
        relations: Vec<RingElement>,
        cap: u32,
        domain: CoeffDomain,
    ) -> Result<Self> {
        Self::build(generators, relations, cap, domain, false)
    }

    /// Like [`GradedRing::new`] but products are computed in the quotient by all
    /// elements of weight above the cap, so multiplication never overflows.
    /// Requires every generator weight to be positive.
    pub fn new_truncated(
        generators: Vec<(String, i32)>,
        relations: Vec<RingElement>,
        cap: u32,
        domain: CoeffDomain,
    ) -> Result<Self> {
        if let Some((name, _)) = generators.iter().find(|(_, w)| *w <= 0) {
            return Err(Error::Incompatible(format!(
                "truncated ring needs positive weights, `{name}` is not"
            )));
        }
        Self::build(generators, relations, cap, domain, true)
    }

    fn build(
        generators: Vec<(String, i32)>,
        relations: Vec<RingElement>,
        cap: u32,
        domain: CoeffDomain,
        truncate: bool,
    ) -> Result<Self> {
        let gens: Vec<Generator> = generators
            .into_iter()
            .map(|(name, weight)| Generator { name, weight })
            .collect();
        for (i, g) in gens.iter().enumerate() {
            if !valid_name(&g.name) {
                return Err(Error::Parse {
                    pos: 0,
                    msg: format!("invalid generator name `{}`", g.name),
                });
            }
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::DuplicateGenerator(g.name.clone()));
            }
        }
        let sizes: Vec<u32> = gens.iter().map(|g| g.weight.unsigned_abs().max(1)).collect();
        let n = gens.len();

        let mut rels = Vec::new();
        for (idx, r) in relations.into_iter().enumerate() {
            if r.terms.keys().any(|e| e.len() != n) {
                return Err(Error::Incompatible(format!(
                    "relation {idx} has the wrong number of generators"
                )));
            }
            if domain == CoeffDomain::Integers && r.terms.values().any(|c| !c.is_integer()) {
                return Err(Error::Incompatible(format!(
                    "relation {idx} has non-integral coefficients in an integral ring"
                )));
            }
            let ws: Vec<i32> = r
                .terms
                .keys()
                .map(|e| e.iter().zip(&gens).map(|(x, g)| *x as i32 * g.weight).sum())
                .collect();
            if ws.windows(2).any(|w| w[0] != w[1]) {
                let names: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
                return Err(Error::InhomogeneousRelation {
                    index: idx,
                    relation: format_with_names(&names, &sizes, &r),
                });
            }
            rels.push(r);
        }

        let mut inverses = vec![None; n];
        for r in &rels {
            if r.terms.len() != 2 {
                continue;
            }
            let mut it = r.terms.iter();
            let (e1, c1) = it.next().expect("two terms");
            let (e2, c2) = it.next().expect("two terms");
            let (mono, cm, cc) = if e1.iter().all(|&x| x == 0) {
                (e2, c2, c1)
            } else if e2.iter().all(|&x| x == 0) {
                (e1, c1, c2)
            } else {
                continue;
            };
            if (cm + cc).is_zero() && cm.abs().is_one() {
                let ones: Vec<usize> = (0..n).filter(|&i| mono[i] == 1).collect();
                if ones.len() == 2 && mono.iter().sum::<u32>() == 2 {
                    inverses[ones[0]] = Some(ones[1]);
                    inverses[ones[1]] = Some(ones[0]);
                }
            }
        }

        let mut hasher = DefaultHasher::new();
        gens.hash(&mut hasher);
        domain.hash(&mut hasher);
        cap.hash(&mut hasher);
        truncate.hash(&mut hasher);
        rels.hash(&mut hasher);
        let fingerprint = hasher.finish();

        let mut inner = RingInner {
            gens,
            sizes,
            relations: rels,
            domain,
            cap,
            pieces: HashMap::new(),
            inverses,
            truncate,
            fingerprint,
        };
        if inner.relations.iter().any(|r| !r.is_zero()) {
            build_pieces(&mut inner);
        }
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    /// Builds a ring from relations written in the text syntax.
    pub fn from_text(
        generators: Vec<(String, i32)>,
        relations: &[&str],
        cap: u32,
        domain: CoeffDomain,
    ) -> Result<Self> {
        let names: Vec<String> = generators.iter().map(|(n, _)| n.clone()).collect();
        let rels = relations
            .iter()
            .map(|s| parse_polynomial(&names, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(generators, rels, cap, domain)
    }

    /// The polynomial ring on the given generators.
    pub fn free(generators: Vec<(String, i32)>, cap: u32, domain: CoeffDomain) -> Result<Self> {
        Self::new(generators, Vec::new(), cap, domain)
    }

    pub fn integers(cap: u32) -> Self {
        Self::new(Vec::new(), Vec::new(), cap, CoeffDomain::Integers).expect("empty presentation")
    }

    pub fn rationals(cap: u32) -> Self {
        Self::new(Vec::new(), Vec::new(), cap, CoeffDomain::Rationals).expect("empty presentation")
    }

    /// `Z[beta, beta_inv]/(beta*beta_inv - 1)` with `beta` in weight 1.
    pub fn laurent_beta(domain: CoeffDomain, cap: u32) -> Self {
        Self::from_text(
            vec![("beta".into(), 1), ("beta_inv".into(), -1)],
            &["beta*beta_inv - 1"],
            cap,
            domain,
        )
        .expect("valid presentation")
    }

    /// Same presentation over the rationals.
    pub fn rationalize(&self) -> Self {
        if self.is_rational() {
            return self.clone();
        }
        Self::build(
            self.inner.gens.iter().map(|g| (g.name.clone(), g.weight)).collect(),
            self.inner.relations.clone(),
            self.inner.cap,
            CoeffDomain::Rationals,
            self.inner.truncate,
        )
        .expect("presentation already validated")
    }

    pub fn is_rational(&self) -> bool {
        self.inner.domain == CoeffDomain::Rationals
    }

    pub fn domain(&self) -> CoeffDomain {
        self.inner.domain
    }

    pub fn cap(&self) -> u32 {
        self.inner.cap
    }

    pub fn is_truncating(&self) -> bool {
        self.inner.truncate
    }

    pub fn generators(&self) -> &[Generator] {
        &self.inner.gens
    }

    pub fn relations(&self) -> &[RingElement] {
        &self.inner.relations
    }

    pub fn num_generators(&self) -> usize {
        self.inner.gens.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.inner.gens.iter().position(|g| g.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.inner.gens.iter().map(|g| g.name.clone()).collect()
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero()
    }

    pub fn one(&self) -> RingElement {
        self.scalar(Q::one())
    }

    pub fn scalar(&self, q: Q) -> RingElement {
        RingElement::monomial(vec![0; self.num_generators()], q)
    }

    pub fn int(&self, n: i64) -> RingElement {
        self.scalar(Q::from_integer(n.into()))
    }

    pub fn gen(&self, name: &str) -> Result<RingElement> {
        let i = self
            .generator_index(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        self.gen_at(i)
    }

    pub fn gen_at(&self, i: usize) -> Result<RingElement> {
        let mut e = vec![0; self.num_generators()];
        e[i] = 1;
        self.normal_form(&RingElement::monomial(e, Q::one()))
    }

    pub fn monomial_size(&self, e: &[u32]) -> u32 {
        e.iter().zip(&self.inner.sizes).map(|(x, s)| x * s).sum()
    }

    pub fn monomial_weight(&self, e: &[u32]) -> i32 {
        e.iter()
            .zip(&self.inner.gens)
            .map(|(x, g)| *x as i32 * g.weight)
            .sum()
    }

    /// True if every monomial of `e` has weight `w` (the zero element qualifies).
    pub fn is_homogeneous_of(&self, e: &RingElement, w: i32) -> bool {
        e.terms.keys().all(|m| self.monomial_weight(m) == w)
    }

    /// The common weight of all monomials, `None` for zero or inhomogeneous elements.
    pub fn homogeneous_weight(&self, e: &RingElement) -> Option<i32> {
        let mut ws = e.terms.keys().map(|m| self.monomial_weight(m));
        let first = ws.next()?;
        ws.all(|w| w == first).then_some(first)
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let s = raw_add(a, b);
        if self.has_lattice_pieces() {
            self.normal_form(&s).expect("sizes unchanged by addition")
        } else {
            s
        }
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        let n = a.scaled(&-Q::one());
        if self.has_lattice_pieces() {
            self.normal_form(&n).expect("sizes unchanged by negation")
        } else {
            n
        }
    }

    /// Multiplication by a rational. Errors over the integers when the result leaves the ring.
    pub fn scale(&self, a: &RingElement, q: &Q) -> Result<RingElement> {
        if !self.is_rational() && !q.is_integer() {
            return Err(Error::NotRational);
        }
        let s = a.scaled(q);
        if self.has_lattice_pieces() {
            self.normal_form(&s)
        } else {
            Ok(s)
        }
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        if a.is_zero() || b.is_zero() {
            return Ok(RingElement::zero());
        }
        if a.is_scalar() && a.terms.len() == 1 {
            return self.scale(b, &a.constant_term());
        }
        if b.is_scalar() && b.terms.len() == 1 {
            return self.scale(a, &b.constant_term());
        }
        let mut p = raw_mul(a, b);
        if self.inner.truncate {
            let cap = self.inner.cap;
            p.terms.retain(|m, _| self.monomial_size(m) <= cap);
        }
        self.normal_form(&p)
    }

    pub fn pow(&self, a: &RingElement, k: u32) -> Result<RingElement> {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    fn has_lattice_pieces(&self) -> bool {
        self.inner
            .pieces
            .values()
            .any(|p| matches!(p.reducer, Reducer::Lattice(_)))
    }

    /// Canonical representative modulo the relations.
    pub fn normal_form(&self, e: &RingElement) -> Result<RingElement> {
        let inner = &*self.inner;
        for m in e.terms.keys() {
            if m.len() != inner.gens.len() {
                return Err(Error::Incompatible(
                    "element has the wrong number of generators".into(),
                ));
            }
            let s = self.monomial_size(m);
            if s > inner.cap {
                return Err(Error::WeightOverflow {
                    monomial: self.format_monomial(m),
                    size: s,
                    cap: inner.cap,
                });
            }
        }
        if inner.domain == CoeffDomain::Integers && e.terms.values().any(|c| !c.is_integer()) {
            return Err(Error::NotRational);
        }
        if inner.pieces.is_empty() {
            return Ok(e.clone());
        }
        let mut out = RingElement::zero();
        let mut dense: BTreeMap<i32, Vec<BigInt>> = BTreeMap::new();
        for (m, c) in &e.terms {
            let w = self.monomial_weight(m);
            match inner.pieces.get(&w) {
                None => out.add_term(m.clone(), c.clone()),
                Some(piece) => match &piece.reducer {
                    Reducer::Linear(map) => match map.get(m) {
                        Some(rw) => {
                            for (m2, c2) in &rw.terms {
                                out.add_term(m2.clone(), c * c2);
                            }
                        }
                        None => out.add_term(m.clone(), c.clone()),
                    },
                    Reducer::Lattice(_) => {
                        let v = dense
                            .entry(w)
                            .or_insert_with(|| vec![BigInt::zero(); piece.columns.len()]);
                        v[piece.index[m]] += c.to_integer();
                    }
                },
            }
        }
        for (w, mut v) in dense {
            let piece = &inner.pieces[&w];
            if let Reducer::Lattice(rows) = &piece.reducer {
                lattice::reduce_by_hermite(&mut v, rows);
            }
            for (i, x) in v.into_iter().enumerate() {
                if !x.is_zero() {
                    out.add_term(piece.columns[i].clone(), Q::from_integer(x));
                }
            }
        }
        Ok(out)
    }

    /// Inverse of a unit of the form `c * m` where `c` is a unit of the
    /// coefficient domain and every generator in `m` has a declared inverse
    /// (a relation `g*h - 1`).
    pub fn inverse(&self, e: &RingElement) -> Result<RingElement> {
        let not_inv = || Error::NotInvertible(self.format(e));
        if e.terms.len() != 1 {
            return Err(not_inv());
        }
        let (m, c) = e.terms.iter().next().expect("one term");
        if !self.is_rational() && !c.abs().is_one() {
            return Err(not_inv());
        }
        let mut acc = self.scalar(c.recip());
        for (i, &k) in m.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let j = self.inner.inverses[i].ok_or_else(not_inv)?;
            acc = self.mul(&acc, &self.pow(&self.gen_at(j)?, k)?)?;
        }
        Ok(acc)
    }

    /// Rank of the weight-`w` piece of the quotient (monomials of size at most the cap).
    pub fn graded_rank(&self, w: i32) -> usize {
        let cols = enumerate_monomials(&self.inner.sizes, self.inner.cap)
            .into_iter()
            .filter(|m| self.monomial_weight(m) == w)
            .count();
        let rank = self.inner.pieces.get(&w).map_or(0, |p| p.basis.len());
        cols - rank
    }

    /// Invariant factors larger than one of the weight-`w` piece of the quotient.
    /// Empty means the piece is torsion-free. Always empty over the rationals.
    pub fn torsion(&self, w: i32) -> Vec<BigInt> {
        let Some(piece) = self.inner.pieces.get(&w) else {
            return Vec::new();
        };
        let Some(rows) = &piece.int_rows else {
            return Vec::new();
        };
        lattice::smith_invariants(rows, piece.columns.len())
            .into_iter()
            .filter(|d| !d.is_one())
            .collect()
    }

    /// Echelon basis of the relation ideal in weight `w`.
    pub fn ideal_basis(&self, w: i32) -> &[RingElement] {
        self.inner.pieces.get(&w).map_or(&[], |p| p.basis.as_slice())
    }

    pub fn format_monomial(&self, m: &[u32]) -> String {
        let names: Vec<String> = self.names();
        let factors: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| {
                if k == 1 {
                    names[i].clone()
                } else {
                    format!("{}^{}", names[i], k)
                }
            })
            .collect();
        if factors.is_empty() {
            "1".into()
        } else {
            factors.join("*")
        }
    }

    /// Text form, terms ordered by size and then exponents, lowest first.
    pub fn format(&self, e: &RingElement) -> String {
        format_with_names(&self.names(), &self.inner.sizes, e)
    }

    /// Parses the text syntax and reduces to normal form.
    pub fn parse(&self, src: &str) -> Result<RingElement> {
        parse::parse_expr(self, src)
    }

    pub fn to_json(&self, e: &RingElement) -> ElementJson {
        let names = self.names();
        ElementJson {
            terms: sorted_terms(&self.inner.sizes, e)
                .into_iter()
                .map(|(m, c)| TermJson {
                    coeff: parse::format_rational(c),
                    monomial: m
                        .iter()
                        .enumerate()
                        .filter(|(_, &k)| k > 0)
                        .map(|(i, &k)| (names[i].clone(), k))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(&self, j: &ElementJson) -> Result<RingElement> {
        let mut out = RingElement::zero();
        for t in &j.terms {
            let mut m = vec![0; self.num_generators()];
            for (name, &k) in &t.monomial {
                let i = self
                    .generator_index(name)
                    .ok_or_else(|| Error::UnknownGenerator(name.clone()))?;
                m[i] += k;
            }
            out.add_term(m, parse::parse_rational(&t.coeff)?);
        }
        self.normal_form(&out)
    }

    pub fn presentation(&self) -> PresentationJson {
        PresentationJson {
            generators: self.inner.gens.clone(),
            relations: self.inner.relations.iter().map(|r| self.format(r)).collect(),
            domain: self.inner.domain,
            cap: self.inner.cap,
        }
    }
}

impl ExprAlgebra for GradedRing {
    type Elem = RingElement;
    fn constant(&self, q: Q) -> RingElement {
        self.scalar(q)
    }
    fn variable(&self, name: &str) -> Result<RingElement> {
        self.gen(name)
    }
    fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        GradedRing::add(self, a, b)
    }
    fn neg(&self, a: &RingElement) -> RingElement {
        GradedRing::neg(self, a)
    }
    fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        GradedRing::mul(self, a, b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub monomial: BTreeMap<String, u32>,
}

/// `{"terms":[{"coeff":"-1/2","monomial":{"a12":1}}]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub generators: Vec<Generator>,
    pub relations: Vec<String>,
    pub domain: CoeffDomain,
    pub cap: u32,
}

fn sorted_terms<'a>(sizes: &[u32], e: &'a RingElement) -> Vec<(&'a Exps, &'a Q)> {
    let size = |m: &Exps| -> u32 { m.iter().zip(sizes).map(|(x, s)| x * s).sum() };
    let mut v: Vec<(&Exps, &Q)> = e.terms.iter().collect();
    v.sort_by(|a, b| size(a.0).cmp(&size(b.0)).then_with(|| b.0.cmp(a.0)));
    v
}

fn format_with_names(names: &[String], sizes: &[u32], e: &RingElement) -> String {
    parse::format_terms(sorted_terms(sizes, e).into_iter().map(|(m, c)| {
        (
            c.clone(),
            m.iter()
                .enumerate()
                .map(|(i, &k)| (names[i].as_str(), k))
                .collect::<Vec<_>>(),
        )
    }))
}

/// All exponent vectors with `sum(e_i * sizes_i) <= cap`.
pub(crate) fn enumerate_monomials(sizes: &[u32], cap: u32) -> Vec<Exps> {
    fn rec(sizes: &[u32], i: usize, left: u32, cur: &mut Exps, out: &mut Vec<Exps>) {
        if i == sizes.len() {
            out.push(cur.clone());
            return;
        }
        let mut k = 0;
        loop {
            cur[i] = k;
            rec(sizes, i + 1, left - k * sizes[i], cur, out);
            if (k + 1) * sizes[i] > left {
                break;
            }
            k += 1;
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; sizes.len()];
    rec(sizes, 0, cap, &mut cur, &mut out);
    out
}

/// Elimination priority: larger size first, then colex-larger exponents first.
fn priority(sizes: &[u32], a: &Exps, b: &Exps) -> Ordering {
    let sa: u32 = a.iter().zip(sizes).map(|(x, s)| x * s).sum();
    let sb: u32 = b.iter().zip(sizes).map(|(x, s)| x * s).sum();
    sb.cmp(&sa).then_with(|| {
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        Ordering::Equal
    })
}

fn build_pieces(inner: &mut RingInner) {
    let n = inner.gens.len();
    let sizes = inner.sizes.clone();
    let cap = inner.cap;
    let weight_of = |m: &Exps| -> i32 {
        m.iter()
            .zip(&inner.gens)
            .map(|(x, g)| *x as i32 * g.weight)
            .sum()
    };
    let size_of = |m: &Exps| -> u32 { m.iter().zip(&sizes).map(|(x, s)| x * s).sum() };

    let mut by_weight: BTreeMap<i32, Vec<Exps>> = BTreeMap::new();
    for m in enumerate_monomials(&sizes, cap) {
        by_weight.entry(weight_of(&m)).or_default().push(m);
    }

    let fits = |r: &RingElement| r.terms.keys().all(|m| size_of(m) <= cap);
    let positive = inner.gens.iter().all(|g| g.weight > 0);

    let mut pieces: HashMap<i32, Piece> = HashMap::new();
    if positive {
        // I_w is spanned by the raw relations of weight w and g_j * I_{w - w_j}.
        for w in 1..=cap as i32 {
            let mut rows: Vec<RingElement> = inner
                .relations
                .iter()
                .filter(|r| !r.is_zero() && fits(r) && weight_of(r.terms.keys().next().unwrap()) == w)
                .cloned()
                .collect();
            for (j, g) in inner.gens.iter().enumerate() {
                if g.weight >= w {
                    continue;
                }
                if let Some(lower) = pieces.get(&(w - g.weight)) {
                    for b in &lower.basis {
                        let mut shifted = RingElement::zero();
                        for (m, c) in &b.terms {
                            let mut m2 = m.clone();
                            m2[j] += 1;
                            shifted.add_term(m2, c.clone());
                        }
                        rows.push(shifted);
                    }
                }
            }
            if rows.is_empty() {
                continue;
            }
            let cols = by_weight.get(&w).cloned().unwrap_or_default();
            pieces.insert(w, reduce_piece(inner.domain, &sizes, cols, rows));
        }
    } else {
        let mut rows_by_weight: BTreeMap<i32, Vec<RingElement>> = BTreeMap::new();
        let all: Vec<Exps> = by_weight.values().flatten().cloned().collect();
        for r in inner.relations.iter().filter(|r| !r.is_zero() && fits(r)) {
            let rmax = r.terms.keys().map(|m| size_of(m)).max().unwrap_or(0);
            let rw = weight_of(r.terms.keys().next().unwrap());
            for m in &all {
                if size_of(m) + rmax > cap {
                    continue;
                }
                let mut row = RingElement::zero();
                for (e, c) in &r.terms {
                    let e2: Exps = e.iter().zip(m).map(|(a, b)| a + b).collect();
                    row.add_term(e2, c.clone());
                }
                rows_by_weight.entry(rw + weight_of(m)).or_default().push(row);
            }
        }
        for (w, rows) in rows_by_weight {
            let cols = by_weight.get(&w).cloned().unwrap_or_default();
            pieces.insert(w, reduce_piece(inner.domain, &sizes, cols, rows));
        }
    }
    debug_assert!(pieces.values().all(|p| p.columns.iter().all(|c| c.len() == n)));
    inner.pieces = pieces;
}

fn reduce_piece(
    domain: CoeffDomain,
    sizes: &[u32],
    mut columns: Vec<Exps>,
    rows: Vec<RingElement>,
) -> Piece {
    columns.sort_by(|a, b| priority(sizes, a, b));
    let index: HashMap<Exps, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let ncols = columns.len();
    let to_element = |row: &[Q]| -> RingElement {
        let mut e = RingElement::zero();
        for (i, c) in row.iter().enumerate() {
            e.add_term(columns[i].clone(), c.clone());
        }
        e
    };
    let linear_table = |rows: &[(usize, Vec<Q>)]| -> HashMap<Exps, RingElement> {
        rows.iter()
            .map(|(p, row)| {
                let mut nf = RingElement::zero();
                for (i, c) in row.iter().enumerate() {
                    if i != *p {
                        nf.add_term(columns[i].clone(), -c.clone());
                    }
                }
                (columns[*p].clone(), nf)
            })
            .collect()
    };

    match domain {
        CoeffDomain::Rationals => {
            let dense: Vec<Vec<Q>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![Q::zero(); ncols];
                    for (m, c) in &r.terms {
                        v[index[m]] += c;
                    }
                    v
                })
                .collect();
            let rref = lattice::rational_rref(dense, ncols);
            let pairs: Vec<(usize, Vec<Q>)> = rref.into_iter().map(|p| (p.pivot, p.row)).collect();
            Piece {
                basis: pairs.iter().map(|(_, r)| to_element(r)).collect(),
                reducer: Reducer::Linear(linear_table(&pairs)),
                columns: columns.clone(),
                index: index.clone(),
                int_rows: None,
            }
        }
        CoeffDomain::Integers => {
            let dense: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![BigInt::zero(); ncols];
                    for (m, c) in &r.terms {
                        v[index[m]] += c.to_integer();
                    }
                    v
                })
                .collect();
            let herm = lattice::hermite_rows(dense, ncols);
            let as_q: Vec<(usize, Vec<Q>)> = herm
                .iter()
                .map(|p| {
                    (
                        p.pivot,
                        p.row.iter().map(|x| Q::from_integer(x.clone())).collect(),
                    )
                })
                .collect();
            let basis = as_q.iter().map(|(_, r)| to_element(r)).collect();
            let int_rows = Some(herm.iter().map(|p| p.row.clone()).collect());
            let reducer = if herm.iter().all(|p| lattice::is_unit(&p.row[p.pivot])) {
                Reducer::Linear(linear_table(&as_q))
            } else {
                Reducer::Lattice(herm)
            };
            Piece {
                basis,
                reducer,
                columns: columns.clone(),
                index: index.clone(),
                int_rows,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn integers_have_no_generators() {
        let z = GradedRing::integers(10);
        assert_eq!(z.num_generators(), 0);
        assert_eq!(z.format(&z.int(3)), "3");
        assert_eq!(z.graded_rank(0), 1);
        assert!(z.normal_form(&z.zero()).unwrap().is_zero());
    }

    #[test]
    fn laurent_relation_reduces_to_one() {
        let r = GradedRing::laurent_beta(CoeffDomain::Integers, 6);
        let b = r.gen("beta").unwrap();
        let bi = r.gen("beta_inv").unwrap();
        assert_eq!(r.mul(&b, &bi).unwrap(), r.one());
        let b3 = r.pow(&b, 3).unwrap();
        let bi2 = r.pow(&bi, 2).unwrap();
        assert_eq!(r.mul(&b3, &bi2).unwrap(), b);
        assert_eq!(r.inverse(&r.neg(&b)).unwrap(), r.neg(&bi));
        assert_eq!(r.graded_rank(0), 1);
        assert_eq!(r.graded_rank(2), 1);
    }

    #[test]
    fn inhomogeneous_relation_is_rejected() {
        let err = GradedRing::from_text(
            vec![("a".into(), 1), ("b".into(), 2)],
            &["a - b"],
            4,
            CoeffDomain::Integers,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InhomogeneousRelation { index: 0, .. }));
    }

    #[test]
    fn overflow_is_reported() {
        let r = GradedRing::free(vec![("a".into(), 1)], 2, CoeffDomain::Integers).unwrap();
        let a = r.gen("a").unwrap();
        let a2 = r.mul(&a, &a).unwrap();
        assert!(matches!(r.mul(&a2, &a), Err(Error::WeightOverflow { size: 3, cap: 2, .. })));
    }

    #[test]
    fn parse_and_format_round_trip() {
        let r = GradedRing::free(
            vec![("a11".into(), 1), ("a12".into(), 2)],
            4,
            CoeffDomain::Rationals,
        )
        .unwrap();
        let e = r.parse("3*a11^2 - 1/2*a12").unwrap();
        assert_eq!(r.format(&e), "3*a11^2 - 1/2*a12");
        assert_eq!(r.parse(&r.format(&e)).unwrap(), e);
        let j = r.to_json(&e);
        assert_eq!(r.from_json(&j).unwrap(), e);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains(r#"{"coeff":"-1/2","monomial":{"a12":1}}"#));
        let unicode = ElementJson {
            terms: vec![TermJson {
                coeff: "\u{2212}1/2".into(),
                monomial: [("a12".to_string(), 1)].into_iter().collect(),
            }],
        };
        assert_eq!(r.from_json(&unicode).unwrap(), r.parse("-1/2*a12").unwrap());
    }

    #[test]
    fn truncated_ring_drops_high_weight() {
        let r = GradedRing::new_truncated(
            vec![("a".into(), 1)],
            Vec::new(),
            2,
            CoeffDomain::Integers,
        )
        .unwrap();
        let a = r.gen("a").unwrap();
        let a2 = r.mul(&a, &a).unwrap();
        assert!(r.mul(&a2, &a).unwrap().is_zero());
        assert!(r.normal_form(&raw_mul(&a2, &a)).is_err());
        assert!(GradedRing::new_truncated(vec![("b".into(), -1)], Vec::new(), 2, CoeffDomain::Integers).is_err());
    }

    #[test]
    fn integer_ring_rejects_fractions() {
        let z = GradedRing::integers(3);
        assert_eq!(z.scale(&z.one(), &q(1, 2)), Err(Error::NotRational));
    }

    #[test]
    fn torsion_in_a_quotient() {
        // Z[t]/(2t) in weight 1 has Z/2 torsion
        let r = GradedRing::from_text(vec![("t".into(), 1)], &["2*t"], 3, CoeffDomain::Integers)
            .unwrap();
        assert_eq!(r.torsion(1), vec![BigInt::from(2)]);
        assert_eq!(r.graded_rank(1), 0);
        let t = r.gen("t").unwrap();
        let three_t = r.scale(&t, &q(3, 1)).unwrap();
        assert_eq!(three_t, t);
    }
}
