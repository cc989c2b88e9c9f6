//! Truncated multivariate power series with coefficients in a [`GradedRing`].
//!
//! Every variable carries a positive degree (default 1) and the cap bounds the
//! weighted total degree. A variable of degree `k` has ring weight `-k`, so a
//! formal group law is homogeneous of weight -1.

mod sym;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::parse::{self, ExprAlgebra};
use crate::exactalg::{ElementJson, Exps, GradedRing, RingElement, RingHom, Q};

pub use sym::{elementary_symmetric, sym_expand, sym_reduce, sym_space, SymSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub degree: u32,
}

impl Var {
    pub fn new(name: &str, degree: u32) -> Self {
        Self {
            name: name.to_string(),
            degree,
        }
    }

    pub fn weight(&self) -> i32 {
        -(self.degree as i32)
    }
}

/// Ring, variables and cap shared by a family of series.
#[derive(Clone, Debug)]
pub struct SeriesSpace {
    ring: GradedRing,
    vars: Arc<Vec<Var>>,
    cap: u32,
}

impl PartialEq for SeriesSpace {
    fn eq(&self, other: &Self) -> bool {
        self.cap == other.cap && self.ring == other.ring && self.vars == other.vars
    }
}

impl SeriesSpace {
    /// Variables of degree one.
    pub fn new(ring: &GradedRing, names: &[&str], cap: u32) -> Result<Self> {
        let vars = names.iter().map(|n| Var::new(n, 1)).collect();
        Self::with_vars(ring, vars, cap)
    }

    pub fn with_vars(ring: &GradedRing, vars: Vec<Var>, cap: u32) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if v.degree == 0 {
                return Err(Error::Incompatible(format!("variable `{}` has degree 0", v.name)));
            }
            if vars[..i].iter().any(|w| w.name == v.name) || ring.generator_index(&v.name).is_some()
            {
                return Err(Error::DuplicateGenerator(v.name.clone()));
            }
        }
        Ok(Self {
            ring: ring.clone(),
            vars: Arc::new(vars),
            cap,
        })
    }

    pub fn ring(&self) -> &GradedRing {
        &self.ring
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Same ring and variables, another cap.
    pub fn with_cap(&self, cap: u32) -> Self {
        Self {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            cap,
        }
    }

    pub fn zero(&self) -> Series {
        Series {
            space: self.clone(),
            exact: true,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(&self, c: RingElement) -> Series {
        let mut s = self.zero();
        s.insert(vec![0; self.vars.len()], c);
        s
    }

    pub fn one(&self) -> Series {
        self.constant(self.ring.one())
    }

    pub fn var(&self, name: &str) -> Result<Series> {
        let i = self
            .var_index(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        Ok(self.var_at(i))
    }

    pub fn var_at(&self, i: usize) -> Series {
        let mut e = vec![0; self.vars.len()];
        e[i] = 1;
        self.monomial(e, self.ring.one())
    }

    /// `c * x^e`, dropped if above the cap.
    pub fn monomial(&self, e: Exps, c: RingElement) -> Series {
        let mut s = self.zero();
        if self.degree_of(&e) <= self.cap {
            s.insert(e, c);
        } else if !c.is_zero() {
            s.exact = false;
        }
        s
    }

    pub fn degree_of(&self, e: &[u32]) -> u32 {
        e.iter().zip(self.vars.iter()).map(|(k, v)| k * v.degree).sum()
    }

    pub fn parse(&self, src: &str) -> Result<Series> {
        parse::parse_expr(self, src)
    }

    /// Builds a series from `(exponents, coefficient)` pairs.
    pub fn from_terms(&self, terms: impl IntoIterator<Item = (Exps, RingElement)>) -> Result<Series> {
        let mut s = self.zero();
        for (e, c) in terms {
            if e.len() != self.vars.len() {
                return Err(Error::Incompatible("exponent vector length".into()));
            }
            let c = self.ring.normal_form(&c)?;
            s = s.add(&self.monomial(e, c))?;
        }
        Ok(s)
    }

    pub fn from_json(&self, j: &SeriesJson) -> Result<Series> {
        if j.vars != self.vars.iter().map(|v| v.name.clone()).collect::<Vec<_>>() {
            return Err(Error::Incompatible("variables differ from the JSON document".into()));
        }
        let space = self.with_cap(j.cap.min(self.cap));
        let mut terms = Vec::new();
        for t in &j.terms {
            let mut e = vec![0; self.vars.len()];
            for (name, &k) in &t.monomial {
                let i = self
                    .var_index(name)
                    .ok_or_else(|| Error::UnknownGenerator(name.clone()))?;
                e[i] += k;
            }
            terms.push((e, self.ring.from_json(&t.coeff)?));
        }
        let mut s = space.from_terms(terms)?;
        s.exact = false;
        Ok(s)
    }
}

impl ExprAlgebra for SeriesSpace {
    type Elem = Series;
    fn constant(&self, q: Q) -> Series {
        self.constant(self.ring.scalar(q))
    }
    fn variable(&self, name: &str) -> Result<Series> {
        match self.var_index(name) {
            Some(i) => Ok(self.var_at(i)),
            None => Ok(self.constant(self.ring.gen(name)?)),
        }
    }
    fn add(&self, a: &Series, b: &Series) -> Series {
        a.add(b).expect("same space")
    }
    fn neg(&self, a: &Series) -> Series {
        a.neg()
    }
    fn mul(&self, a: &Series, b: &Series) -> Result<Series> {
        a.mul(b)
    }
}

/// A truncated power series. Coefficients are kept in ring normal form.
#[derive(Clone, Debug)]
pub struct Series {
    space: SeriesSpace,
    /// No term has been dropped by truncation: the series is a polynomial.
    exact: bool,
    terms: BTreeMap<Exps, RingElement>,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.terms == other.terms
    }
}

impl Series {
    fn insert(&mut self, e: Exps, c: RingElement) {
        if !c.is_zero() {
            self.terms.insert(e, c);
        }
    }

    fn add_term(&mut self, e: Exps, c: &RingElement) {
        let ring = &self.space.ring;
        match self.terms.get_mut(&e) {
            Some(old) => {
                *old = ring.add(old, c);
                if old.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => self.insert(e, c.clone()),
        }
    }

    pub fn space(&self) -> &SeriesSpace {
        &self.space
    }

    pub fn ring(&self) -> &GradedRing {
        &self.space.ring
    }

    pub fn vars(&self) -> &[Var] {
        &self.space.vars
    }

    pub fn cap(&self) -> u32 {
        self.space.cap
    }

    /// Marks a series as a complete polynomial, for quotients where every
    /// monomial above the cap vanishes anyway.
    pub(crate) fn assume_exact(mut self) -> Series {
        self.exact = true;
        self
    }

    /// True when the series is a polynomial known exactly (nothing was truncated).
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &RingElement)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> RingElement {
        self.terms.get(e).cloned().unwrap_or_else(RingElement::zero)
    }

    /// Coefficient of `name^k`, the other variables at exponent zero.
    pub fn coeff_of(&self, name: &str, k: u32) -> Result<RingElement> {
        let i = self
            .space
            .var_index(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        let mut e = vec![0; self.vars().len()];
        e[i] = k;
        Ok(self.coeff(&e))
    }

    pub fn constant_term(&self) -> RingElement {
        self.coeff(&vec![0; self.vars().len()])
    }

    /// Lowest weighted degree of a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| self.space.degree_of(e)).min()
    }

    /// Drops every term above `cap`; only ever lowers the cap.
    pub fn truncate(&self, cap: u32) -> Series {
        if cap >= self.cap() {
            return self.clone();
        }
        let space = self.space.with_cap(cap);
        let mut exact = self.exact;
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| {
                let keep = space.degree_of(e) <= cap;
                exact &= keep;
                keep
            })
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Series { space, exact, terms }
    }

    fn check_same(&self, other: &Series) -> Result<()> {
        if self.space.ring != other.space.ring || self.space.vars != other.space.vars {
            return Err(Error::Incompatible(
                "series over different rings or variables".into(),
            ));
        }
        Ok(())
    }

    /// Brings both operands to the smaller cap.
    fn align(&self, other: &Series) -> Result<(Series, Series)> {
        self.check_same(other)?;
        let cap = self.cap().min(other.cap());
        Ok((self.truncate(cap), other.truncate(cap)))
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        let (mut a, b) = self.align(other)?;
        for (e, c) in &b.terms {
            a.add_term(e.clone(), c);
        }
        a.exact &= b.exact;
        Ok(a)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        let ring = self.ring();
        Series {
            space: self.space.clone(),
            exact: self.exact,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), ring.neg(c))).collect(),
        }
    }

    /// Multiplies every coefficient by a ring element.
    pub fn scale(&self, c: &RingElement) -> Result<Series> {
        let ring = self.ring();
        let mut out = self.space.zero();
        out.exact = self.exact;
        for (e, x) in &self.terms {
            out.insert(e.clone(), ring.mul(c, x)?);
        }
        Ok(out)
    }

    pub fn scale_q(&self, q: &Q) -> Result<Series> {
        self.scale(&self.ring().scalar(q.clone()))
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        let (a, b) = self.align(other)?;
        let space = a.space.clone();
        let cap = space.cap;
        let ring = space.ring.clone();
        let mut exact = a.exact && b.exact;
        let bdeg: Vec<(u32, &Exps, &RingElement)> = b
            .terms
            .iter()
            .map(|(e, c)| (space.degree_of(e), e, c))
            .collect();
        let mut acc: HashMap<Exps, RingElement> = HashMap::new();
        for (ea, ca) in &a.terms {
            let da = space.degree_of(ea);
            for (db, eb, cb) in &bdeg {
                if da + db > cap {
                    exact = false;
                    continue;
                }
                let e: Exps = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let p = ring.mul(ca, cb)?;
                match acc.get_mut(&e) {
                    Some(old) => *old = ring.add(old, &p),
                    None => {
                        acc.insert(e, p);
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Series { space, exact, terms })
    }

    pub fn pow(&self, k: u32) -> Result<Series> {
        let mut acc = self.space.one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse; the constant term must be a unit of the ring.
    pub fn inverse(&self) -> Result<Series> {
        let ring = self.ring().clone();
        let c0 = self.constant_term();
        let c0_inv = ring
            .inverse(&c0)
            .map_err(|_| Error::NotInvertible(self.to_string()))?;
        // 1/(c0 + r) = c0^{-1} * sum_k (-c0^{-1} r)^k
        let r = self.sub(&self.space.constant(c0))?;
        let t = r.scale(&ring.neg(&c0_inv))?;
        let mut acc = self.space.one();
        let mut power = self.space.one();
        let steps = match t.order() {
            Some(o) if o > 0 => self.cap() / o,
            Some(_) => unreachable!("constant term removed"),
            None => 0,
        };
        for _ in 0..steps {
            power = power.mul(&t)?;
            acc = acc.add(&power)?;
        }
        let mut out = acc.scale(&c0_inv)?;
        out.exact = self.exact && t.is_zero();
        Ok(out)
    }

    pub fn derivative(&self, name: &str) -> Result<Series> {
        let i = self
            .space
            .var_index(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        let ring = self.ring();
        // Terms above the cap are unknown, so the result is known one degree less.
        let cap = if self.exact {
            self.cap()
        } else {
            self.cap().saturating_sub(self.vars()[i].degree)
        };
        let mut out = self.space.with_cap(cap).zero();
        out.exact = self.exact;
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.insert(e2, ring.scale(c, &Q::from_integer(e[i].into()))?);
        }
        Ok(out)
    }

    /// Antiderivative with zero constant of integration. Needs rational coefficients.
    /// The cap grows by the variable's degree, since nothing above it was lost.
    pub fn integrate(&self, name: &str) -> Result<Series> {
        if !self.ring().is_rational() {
            return Err(Error::NotRational);
        }
        let i = self
            .space
            .var_index(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        let space = self.space.with_cap(self.cap() + self.vars()[i].degree);
        let ring = self.ring();
        let mut out = space.zero();
        out.exact = self.exact;
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] += 1;
            out.insert(e2, ring.scale(c, &Q::new(1.into(), (e[i] + 1).into()))?);
        }
        Ok(out)
    }

    /// `e^self`, the constant term must vanish. Rational coefficients only.
    pub fn exp(&self) -> Result<Series> {
        if !self.ring().is_rational() {
            return Err(Error::NotRational);
        }
        if !self.constant_term().is_zero() {
            return Err(Error::NotNilpotent);
        }
        let mut acc = self.space.one();
        let mut term = self.space.one();
        let steps = self.order().map_or(0, |o| self.cap() / o);
        for k in 1..=steps {
            term = term.mul(self)?.scale_q(&Q::new(1.into(), k.into()))?;
            acc = acc.add(&term)?;
        }
        acc.exact = self.is_zero();
        Ok(acc)
    }

    /// `log(1 + self)`, the constant term must vanish. Rational coefficients only.
    pub fn log1p(&self) -> Result<Series> {
        if !self.ring().is_rational() {
            return Err(Error::NotRational);
        }
        if !self.constant_term().is_zero() {
            return Err(Error::NotNilpotent);
        }
        let mut acc = self.space.zero();
        let mut power = self.space.one();
        let steps = self.order().map_or(0, |o| self.cap() / o);
        for k in 1..=steps {
            power = power.mul(self)?;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&power.scale_q(&Q::new(sign.into(), k.into()))?)?;
        }
        acc.exact = self.is_zero();
        Ok(acc)
    }

    /// Substitutes series for variables. All assigned series must live over the
    /// same ring and variables; variables of `self` that are not assigned are
    /// sent to the variable of the same name there.
    ///
    /// A series with nonzero constant term may only be substituted into an exact
    /// (polynomial) series. The result cap is lowered when an assigned series has
    /// lower order than the variable it replaces.
    pub fn substitute(&self, assignments: &[(&str, &Series)]) -> Result<Series> {
        let Some((_, first)) = assignments.first() else {
            return Ok(self.clone());
        };
        let target = first.space.clone();
        let mut cap = target.cap;
        for (_, s) in assignments {
            s.check_same(first)?;
            cap = cap.min(s.cap());
        }
        let n = self.vars().len();
        let mut images: Vec<Option<Series>> = vec![None; n];
        for (name, s) in assignments {
            let i = self
                .space
                .var_index(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            images[i] = Some((*s).clone());
        }
        let target = target.with_cap(cap);
        let mut imgs = Vec::with_capacity(n);
        for (i, img) in images.into_iter().enumerate() {
            let img = match img {
                Some(s) => s.truncate(cap),
                None => {
                    let v = &self.vars()[i];
                    let j = target.var_index(&v.name).ok_or_else(|| {
                        Error::Incompatible(format!("no image for variable `{}`", v.name))
                    })?;
                    target.var_at(j)
                }
            };
            imgs.push(img);
        }

        // Terms of self above its cap are unknown; find how low they can land.
        if !self.exact {
            let used: Vec<usize> = (0..n).collect();
            let mut ratio: Option<(u32, u32)> = None; // min order/degree as a fraction
            for &i in &used {
                let d = self.vars()[i].degree;
                match imgs[i].order() {
                    None => {}
                    Some(0) => {
                        return Err(Error::NonzeroConstantSubstitution(
                            self.vars()[i].name.clone(),
                        ))
                    }
                    Some(o) => {
                        if ratio.map_or(true, |(a, b)| o * b < a * d) {
                            ratio = Some((o, d));
                        }
                    }
                }
            }
            if let Some((o, d)) = ratio {
                // exact below ceil((N + 1) * o / d)
                let bound = ((self.cap() + 1) * o).div_ceil(d) - 1;
                if bound < cap {
                    return self.substitute_into(&imgs, &target.with_cap(bound));
                }
            }
        }
        self.substitute_into(&imgs, &target)
    }

    fn substitute_into(&self, imgs: &[Series], target: &SeriesSpace) -> Result<Series> {
        let imgs: Vec<Series> = imgs.iter().map(|s| s.truncate(target.cap)).collect();
        let ring = target.ring.clone();
        // Map coefficients into the target ring when the rings differ (e.g. Z -> Q).
        let coerce = if ring == *self.ring() {
            None
        } else if ring == self.ring().rationalize() {
            Some(RingHom::rationalization(self.ring()))
        } else {
            return Err(Error::Incompatible("substitution across rings".into()));
        };
        let mut powers: Vec<Vec<Series>> = imgs.iter().map(|s| vec![target.one(), s.clone()]).collect();
        let mut cache: HashMap<Exps, Series> = HashMap::new();
        let mut out = target.zero();
        let mut exact = self.exact && imgs.iter().all(|s| s.exact);
        for (e, c) in &self.terms {
            let c = match &coerce {
                Some(h) => h.apply(c)?,
                None => c.clone(),
            };
            let prod = monomial_product(e, &imgs, &mut powers, &mut cache, target)?;
            exact &= prod.exact;
            let scaled = prod.scale(&c)?;
            out = out.add(&scaled)?;
        }
        out.exact = exact;
        Ok(out)
    }

    /// Applies a ring homomorphism to every coefficient.
    pub fn map_coefficients(&self, h: &RingHom) -> Result<Series> {
        if h.source() != self.ring() {
            return Err(Error::Incompatible("homomorphism source differs".into()));
        }
        let space = SeriesSpace {
            ring: h.target().clone(),
            vars: self.space.vars.clone(),
            cap: self.cap(),
        };
        let mut out = space.zero();
        out.exact = self.exact;
        for (e, c) in &self.terms {
            out.insert(e.clone(), h.apply(c)?);
        }
        Ok(out)
    }

    /// Re-expresses the series over other variables, matched by name.
    /// Variables of `self` missing from `space` must not occur.
    pub fn embed(&self, space: &SeriesSpace) -> Result<Series> {
        if &space.ring != self.ring() {
            return Err(Error::Incompatible("embedding across rings".into()));
        }
        let mut map = Vec::new();
        for v in self.vars() {
            map.push(space.var_index(&v.name).map(|j| (j, space.vars[j].degree == v.degree)));
        }
        let cap = if self.exact { space.cap } else { space.cap.min(self.cap()) };
        let mut out = space.with_cap(cap).zero();
        out.exact = self.exact;
        for (e, c) in &self.terms {
            let mut e2 = vec![0; space.vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[i] {
                    Some((j, true)) => e2[j] = k,
                    _ => {
                        return Err(Error::Incompatible(format!(
                            "variable `{}` has no counterpart",
                            self.vars()[i].name
                        )))
                    }
                }
            }
            let d = out.space.degree_of(&e2);
            if d <= out.cap() {
                out.insert(e2, c.clone());
            } else {
                out.exact = false;
            }
        }
        Ok(out)
    }

    /// Compositional inverse of a one-variable series `u*x + O(x^2)`.
    pub fn reversion(&self) -> Result<Series> {
        if self.vars().len() != 1 {
            return Err(Error::Incompatible("reversion needs one variable".into()));
        }
        let name = self.vars()[0].name.clone();
        if !self.constant_term().is_zero() {
            return Err(Error::NonzeroConstantSubstitution(name));
        }
        let ring = self.ring().clone();
        let u = self.coeff(&[1]);
        let u_inv = ring
            .inverse(&u)
            .map_err(|_| Error::NotInvertible(ring.format(&u)))?;
        let x = self.space.var_at(0);
        let mut h = x.scale(&u_inv)?;
        for k in 2..=self.cap() {
            let comp = self.substitute(&[(&name, &h)])?;
            let err = comp.coeff(&[k]);
            if err.is_zero() {
                continue;
            }
            let fix = ring.mul(&u_inv, &err)?;
            h = h.sub(&self.space.monomial(vec![k], fix))?;
        }
        h.exact = false;
        Ok(h)
    }

    /// Weight of each term: coefficient weight plus the variable weights.
    pub fn homogeneous_weight(&self) -> Option<i32> {
        let ring = self.ring();
        let mut w = None;
        for (e, c) in &self.terms {
            let cw = ring.homogeneous_weight(c)?;
            let tw = cw - self.space.degree_of(e) as i32;
            match w {
                None => w = Some(tw),
                Some(x) if x != tw => return None,
                _ => {}
            }
        }
        w
    }

    /// Terms in graded order, lowest degree first.
    pub fn sorted_terms(&self) -> Vec<(&Exps, &RingElement)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            self.space
                .degree_of(a.0)
                .cmp(&self.space.degree_of(b.0))
                .then_with(|| b.0.cmp(a.0))
        });
        v
    }

    pub fn to_json(&self) -> SeriesJson {
        let ring = self.ring();
        SeriesJson {
            vars: self.vars().iter().map(|v| v.name.clone()).collect(),
            cap: self.cap(),
            text: self.to_string(),
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(e, c)| SeriesTermJson {
                    coeff: ring.to_json(c),
                    monomial: e
                        .iter()
                        .enumerate()
                        .filter(|(_, &k)| k > 0)
                        .map(|(i, &k)| (self.vars()[i].name.clone(), k))
                        .collect(),
                })
                .collect(),
        }
    }
}

fn monomial_product(
    e: &Exps,
    imgs: &[Series],
    powers: &mut [Vec<Series>],
    cache: &mut HashMap<Exps, Series>,
    target: &SeriesSpace,
) -> Result<Series> {
    if let Some(s) = cache.get(e) {
        return Ok(s.clone());
    }
    let Some(last) = e.iter().rposition(|&k| k > 0) else {
        return Ok(target.one());
    };
    let mut rest = e.clone();
    let k = rest[last] as usize;
    rest[last] = 0;
    while powers[last].len() <= k {
        let next = powers[last].last().expect("nonempty").mul(&imgs[last])?;
        powers[last].push(next);
    }
    let head = monomial_product(&rest, imgs, powers, cache, target)?;
    let p = head.mul(&powers[last][k])?;
    cache.insert(e.clone(), p.clone());
    Ok(p)
}

impl std::fmt::Display for Series {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ring = self.ring();
        let mut out = String::new();
        for (e, c) in self.sorted_terms() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let n = &self.vars()[i].name;
                    if k == 1 {
                        n.clone()
                    } else {
                        format!("{n}^{k}")
                    }
                })
                .collect();
            let mono = mono.join("*");
            let cs = ring.format(c);
            let (neg, body) = if c.num_terms() == 1 {
                match cs.strip_prefix('-') {
                    Some(rest) => (true, rest.to_string()),
                    None => (false, cs),
                }
            } else {
                (false, format!("({cs})"))
            };
            let term = match (mono.is_empty(), body.as_str()) {
                (true, _) => body,
                (false, "1") => mono,
                (false, _) => format!("{body}*{mono}"),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub coeff: ElementJson,
    pub monomial: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub vars: Vec<String>,
    pub cap: u32,
    /// The series in text syntax; informational, ignored when reading.
    #[serde(default)]
    pub text: String,
    pub terms: Vec<SeriesTermJson>,
}

/// `e^x - 1` in one variable over a rational ring.
pub fn exp_minus_one(ring: &GradedRing, var: &str, cap: u32) -> Result<Series> {
    let sp = SeriesSpace::new(ring, &[var], cap)?;
    sp.var_at(0).exp()?.sub(&sp.one())
}

/// `log(1 + x)` in one variable over a rational ring.
pub fn log_one_plus(ring: &GradedRing, var: &str, cap: u32) -> Result<Series> {
    let sp = SeriesSpace::new(ring, &[var], cap)?;
    sp.var_at(0).log1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::CoeffDomain;

    fn qq() -> GradedRing {
        GradedRing::rationals(0)
    }

    fn lazard1() -> GradedRing {
        GradedRing::free(vec![("a11".into(), 1)], 4, CoeffDomain::Integers).unwrap()
    }

    #[test]
    fn products_truncate() {
        let r = GradedRing::integers(0);
        let sp = SeriesSpace::new(&r, &["x", "y"], 3).unwrap();
        assert_eq!(sp.parse("x*y").unwrap(), sp.parse("x").unwrap().mul(&sp.parse("y").unwrap()).unwrap());
        let g = sp.parse("(1 + x)*(1 - x + x^2 - x^3)").unwrap();
        assert_eq!(g, sp.one());
        assert!(!g.is_exact());
    }

    #[test]
    fn square_of_universal_quadratic() {
        let r = lazard1();
        let sp = SeriesSpace::new(&r, &["x", "y"], 3).unwrap();
        let f = sp.parse("x + y + a11*x*y").unwrap();
        let expected = sp
            .parse("x^2 + 2*x*y + y^2 + 2*a11*x^2*y + 2*a11*x*y^2")
            .unwrap();
        assert_eq!(f.pow(2).unwrap(), expected);
        assert_eq!(f.homogeneous_weight(), Some(-1));
    }

    #[test]
    fn display_round_trips() {
        let r = GradedRing::free(
            vec![("a11".into(), 1), ("a12".into(), 2)],
            4,
            CoeffDomain::Rationals,
        )
        .unwrap();
        let sp = SeriesSpace::new(&r, &["x", "y"], 4).unwrap();
        let f = sp
            .parse("x - y + a11*x*y - (a11^2 - 1/2*a12)*x^2*y - x^3")
            .unwrap();
        let text = f.to_string();
        assert_eq!(text, "x - y + a11*x*y - x^3 + (-a11^2 + 1/2*a12)*x^2*y");
        assert_eq!(sp.parse(&text).unwrap(), f);
        let back = sp.from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn substitution_examples() {
        let r = GradedRing::integers(0);
        let sp = SeriesSpace::new(&r, &["x", "y"], 4).unwrap();
        let tu = SeriesSpace::new(&r, &["u"], 4).unwrap();
        let u = tu.var_at(0);
        let f = sp.parse("x + y").unwrap();
        assert_eq!(f.substitute(&[("x", &u), ("y", &u)]).unwrap(), tu.parse("2*u").unwrap());
        let x = sp.var("x").unwrap();
        assert!(f.substitute(&[("y", &x.neg())]).unwrap().is_zero());
    }

    #[test]
    fn multiplicative_law_is_associative() {
        let r = GradedRing::laurent_beta(CoeffDomain::Integers, 6);
        let two = SeriesSpace::new(&r, &["x", "y"], 4).unwrap();
        let three = SeriesSpace::new(&r, &["x", "y", "z"], 4).unwrap();
        let f = two.parse("x + y - beta*x*y").unwrap();
        let fxy = f.embed(&three).unwrap();
        let z = three.var("z").unwrap();
        let y = three.var("y").unwrap();
        let x = three.var("x").unwrap();
        let fyz = f.substitute(&[("x", &y), ("y", &z)]).unwrap();
        let left = f.substitute(&[("x", &fxy), ("y", &z)]).unwrap();
        let right = f.substitute(&[("x", &x), ("y", &fyz)]).unwrap();
        assert_eq!(left, right);
        let expected = three
            .parse("x + y + z - beta*(x*y + x*z + y*z) + beta^2*x*y*z")
            .unwrap();
        assert_eq!(left, expected);
        assert!(left.is_exact());
    }

    #[test]
    fn reversion_examples() {
        let sp = SeriesSpace::new(&GradedRing::integers(0), &["x"], 4).unwrap();
        assert_eq!(sp.var_at(0).reversion().unwrap(), sp.var_at(0));
        let g = sp.parse("x + x^2").unwrap();
        let h = g.reversion().unwrap();
        assert_eq!(h, sp.parse("x - x^2 + 2*x^3 - 5*x^4").unwrap());
        assert_eq!(g.substitute(&[("x", &h)]).unwrap(), sp.var_at(0));
        assert_eq!(h.substitute(&[("x", &g)]).unwrap(), sp.var_at(0));

        let sq = SeriesSpace::new(&qq(), &["x"], 3).unwrap();
        let one_minus_exp = sq.parse("x - 1/2*x^2 + 1/6*x^3").unwrap();
        assert_eq!(
            one_minus_exp.reversion().unwrap(),
            sq.parse("x + 1/2*x^2 + 1/3*x^3").unwrap()
        );
        let two = sq.parse("2*x").unwrap();
        assert!(two.reversion().is_ok());
        let sz = SeriesSpace::new(&GradedRing::integers(0), &["x"], 3).unwrap();
        assert!(matches!(
            sz.parse("2*x").unwrap().reversion(),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn exp_and_log() {
        let r = qq();
        let log = log_one_plus(&r, "x", 3).unwrap();
        let sp = log.space().clone();
        assert_eq!(log, sp.parse("x - 1/2*x^2 + 1/3*x^3").unwrap());
        let back = log.exp().unwrap().sub(&sp.one()).unwrap();
        assert_eq!(back, sp.var_at(0));
        assert!(matches!(
            SeriesSpace::new(&GradedRing::integers(0), &["x"], 3)
                .unwrap()
                .var_at(0)
                .exp(),
            Err(Error::NotRational)
        ));
    }

    #[test]
    fn tau_sum_rule() {
        // 1 - e^{-(x+y)} = u + v - uv at u = 1 - e^{-x}, v = 1 - e^{-y}
        let r = qq();
        let sp = SeriesSpace::new(&r, &["x", "y"], 6).unwrap();
        let one = sp.one();
        let c = |s: &Series| one.sub(&s.neg().exp().unwrap()).unwrap();
        let x = sp.var("x").unwrap();
        let y = sp.var("y").unwrap();
        let u = c(&x);
        let v = c(&y);
        let lhs = c(&x.add(&y).unwrap());
        let rhs = u.add(&v).unwrap().sub(&u.mul(&v).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn constant_term_substitution_needs_a_polynomial() {
        let r = GradedRing::integers(0);
        let sp = SeriesSpace::new(&r, &["x"], 3).unwrap();
        let shift = sp.parse("1 + x").unwrap();
        let poly = sp.parse("x^2 + x").unwrap();
        assert_eq!(
            poly.substitute(&[("x", &shift)]).unwrap(),
            sp.parse("2 + 3*x + x^2").unwrap()
        );
        let trunc = sp.parse("(1 + x)*(1 + x^3)").unwrap();
        assert!(!trunc.is_exact());
        assert!(matches!(
            trunc.substitute(&[("x", &shift)]),
            Err(Error::NonzeroConstantSubstitution(_))
        ));
    }

    #[test]
    fn reciprocal_and_calculus() {
        let sp = SeriesSpace::new(&qq(), &["x"], 5).unwrap();
        let g = sp.parse("1 - x").unwrap();
        assert_eq!(g.inverse().unwrap(), sp.parse("1 + x + x^2 + x^3 + x^4 + x^5").unwrap());
        let f = sp.parse("x^3 + 2*x").unwrap();
        assert_eq!(f.derivative("x").unwrap(), sp.parse("3*x^2 + 2").unwrap());
        let i = f.derivative("x").unwrap().integrate("x").unwrap();
        assert_eq!(i.truncate(5), f);
        let g = g.inverse().unwrap();
        assert_eq!(g.derivative("x").unwrap().cap(), 4);
        assert_eq!(g.derivative("x").unwrap().integrate("x").unwrap().cap(), 5);
    }

    #[test]
    fn weighted_degree_truncation() {
        let r = GradedRing::integers(0);
        let sp = SeriesSpace::with_vars(&r, vec![Var::new("s1", 1), Var::new("s2", 2)], 3).unwrap();
        let s2 = sp.var("s2").unwrap();
        assert!(s2.mul(&s2).unwrap().is_zero());
        let s1 = sp.var("s1").unwrap();
        assert_eq!(s1.mul(&s2).unwrap().order(), Some(3));
    }
}
