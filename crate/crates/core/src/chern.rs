//! Chern classes of formal bundles over a formal group law.
//!
//! A bundle is its list of Chern classes in an ambient truncated power-series
//! ring: the ambient variables satisfy "every monomial of degree `k` vanishes",
//! which is the nilpotency order. Operations on bundles are computed on formal
//! Chern roots and rewritten in elementary symmetric functions.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, TwistData};
use crate::series::{sym_reduce, Series, SeriesJson, SeriesSpace, Var};

fn names(prefix: &str, r: usize) -> Vec<String> {
    (1..=r).map(|i| format!("{prefix}{i}")).collect()
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Chern data `(c_1, ..., c_r)` of a formal bundle of rank `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernVector {
    ambient: SeriesSpace,
    classes: Vec<Series>,
}

impl ChernVector {
    /// `c_i` must lie in the ambient space and have order at least `i`.
    pub fn new(ambient: &SeriesSpace, classes: Vec<Series>) -> Result<Self> {
        let classes = classes
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                if c.space().ring() != ambient.ring() || c.vars() != ambient.vars() {
                    return Err(Error::Incompatible("class outside the ambient ring".into()));
                }
                let c = c.truncate(ambient.cap());
                if c.space() != ambient {
                    return Err(Error::Incompatible("class known below the ambient cap".into()));
                }
                match c.order() {
                    Some(0) => Err(Error::NotNilpotent),
                    Some(o) if (o as usize) < k + 1 => Err(Error::ClassOrder {
                        index: k + 1,
                        order: o,
                    }),
                    _ => Ok(c),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ambient: ambient.clone(),
            classes,
        })
    }

    /// The bundle with the given Chern roots: `c_i = e_i(roots)`.
    pub fn from_roots(ambient: &SeriesSpace, roots: &[Series]) -> Result<Self> {
        let mut e = vec![ambient.one()];
        for root in roots {
            let mut next = e.clone();
            next.push(ambient.zero());
            for k in 1..next.len() {
                next[k] = e.get(k).cloned().unwrap_or_else(|| ambient.zero()).add(&e[k - 1].mul(root)?)?;
            }
            e = next;
        }
        Self::new(ambient, e.into_iter().skip(1).collect())
    }

    pub fn line_bundle(ambient: &SeriesSpace, c1: Series) -> Result<Self> {
        Self::new(ambient, vec![c1])
    }

    pub fn trivial(ambient: &SeriesSpace, rank: usize) -> Self {
        Self {
            ambient: ambient.clone(),
            classes: vec![ambient.zero(); rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.classes.len()
    }

    pub fn ambient(&self) -> &SeriesSpace {
        &self.ambient
    }

    /// The order `k` with all degree-`k` monomials zero.
    pub fn nilpotency(&self) -> u32 {
        self.ambient.cap() + 1
    }

    pub fn classes(&self) -> &[Series] {
        &self.classes
    }

    /// `c_i`, with `c_0 = 1` and `c_i = 0` above the rank.
    pub fn class(&self, i: usize) -> Series {
        match i {
            0 => self.ambient.one(),
            i if i <= self.rank() => self.classes[i - 1].clone(),
            _ => self.ambient.zero(),
        }
    }

    /// `c(E) = 1 + c_1 + ... + c_r`.
    pub fn total_class(&self) -> Result<Series> {
        self.classes.iter().try_fold(self.ambient.one(), |acc, c| acc.add(c))
    }

    /// `e(E) = c_r`.
    pub fn euler_class(&self) -> Series {
        self.class(self.rank())
    }

    /// Classes of `E + E'`: the total class is the product of total classes.
    pub fn whitney_sum(&self, other: &ChernVector) -> Result<ChernVector> {
        if self.ambient != other.ambient {
            return Err(Error::Incompatible("bundles over different ambients".into()));
        }
        let r = self.rank() + other.rank();
        let mut classes = Vec::with_capacity(r);
        for k in 1..=r {
            let mut ck = self.ambient.zero();
            for i in 0..=k {
                ck = ck.add(&self.class(i).mul(&other.class(k - i))?)?;
            }
            classes.push(ck);
        }
        Self::new(&self.ambient, classes)
    }

    /// Substitutes `s_k = c_k` (and `x = extra`) into a table series.
    fn evaluate(&self, table: &Series, extra: &[(&str, &Series)]) -> Result<Series> {
        let s = names("s", self.rank());
        let mut assignments: Vec<(&str, &Series)> =
            s.iter().map(String::as_str).zip(self.classes.iter()).collect();
        assignments.extend_from_slice(extra);
        if assignments.is_empty() {
            return table.embed(&self.ambient.with_cap(table.cap())).map(|t| t.truncate(self.ambient.cap()));
        }
        Ok(table.substitute(&assignments)?.truncate(self.ambient.cap()))
    }

    pub fn to_json(&self) -> ChernVectorJson {
        ChernVectorJson {
            rank: self.rank(),
            nilpotency: self.nilpotency(),
            classes: self.classes.iter().map(Series::to_json).collect(),
        }
    }

    pub fn from_json(ambient: &SeriesSpace, j: &ChernVectorJson) -> Result<Self> {
        if j.classes.len() != j.rank || j.nilpotency != ambient.cap() + 1 {
            return Err(Error::Incompatible("rank or nilpotency mismatch".into()));
        }
        let classes = j
            .classes
            .iter()
            .map(|c| ambient.from_json(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient, classes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChernVectorJson {
    pub rank: usize,
    pub nilpotency: u32,
    pub classes: Vec<SeriesJson>,
}

/// The virtual bundle `E0 - E1` of a two-term complex `E1 -> E0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoTermComplex {
    pub e0: ChernVector,
    pub e1: ChernVector,
}

impl TwoTermComplex {
    pub fn new(e0: ChernVector, e1: ChernVector) -> Result<Self> {
        if e0.ambient != e1.ambient {
            return Err(Error::Incompatible("complex terms over different ambients".into()));
        }
        Ok(Self { e0, e1 })
    }
}

/// Which expansion of the twisted first Chern class to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TwistConvention {
    /// `c_1 -> g(c_1)`, the reading compatible with Riemann-Roch.
    #[default]
    Coordinate,
    /// `c_1 -> c_1 + b_1 c_1^2 + b_2 c_1^3 + ...`.
    Expansion,
}

/// Symmetric-function tables for one formal group law up to a cap.
///
/// Tables are built on first use and cached.
pub struct ChernCalculus {
    law: FormalGroupLaw,
    cap: u32,
    h: Mutex<HashMap<(usize, bool), Vec<Series>>>,
    duals: Mutex<HashMap<usize, Vec<Series>>>,
    tensors: Mutex<HashMap<(usize, usize), Vec<Series>>>,
}

impl ChernCalculus {
    /// Tables are valid for ambients with cap at most `cap <= law.cap()`.
    pub fn new(law: &FormalGroupLaw, cap: u32) -> Result<Self> {
        if cap > law.cap() {
            return Err(Error::OutOfRange(format!(
                "calculus cap {cap} above the law cap {}",
                law.cap()
            )));
        }
        Ok(Self {
            law: law.clone(),
            cap,
            h: Mutex::new(HashMap::new()),
            duals: Mutex::new(HashMap::new()),
            tensors: Mutex::new(HashMap::new()),
        })
    }

    pub fn law(&self) -> &FormalGroupLaw {
        &self.law
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// The space `(mu1..mur, extras...)` of formal roots.
    pub fn root_space(&self, r: usize, extras: &[&str]) -> Result<SeriesSpace> {
        let mut v: Vec<&str> = Vec::new();
        let mu = names("mu", r);
        v.extend(strs(&mu));
        v.extend_from_slice(extras);
        SeriesSpace::new(self.law.ring(), &v, self.cap)
    }

    /// `G^i(mu, x) = e_i(F(mu_1, x), ..., F(mu_r, x))`, or with `F_-` when `minus`.
    pub fn g_series(&self, r: usize, minus: bool) -> Result<Vec<Series>> {
        let sp = self.root_space(r, &["x"])?;
        let x = sp.var("x")?;
        let shifted = (1..=r)
            .map(|j| {
                let mu = sp.var(&format!("mu{j}"))?;
                if minus {
                    self.law.apply_difference(&mu, &x)
                } else {
                    self.law.apply(&mu, &x)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        elementary_of(&sp, &shifted)
    }

    fn check_index(r: usize, i: usize) -> Result<()> {
        if i == 0 || i > r {
            return Err(Error::IndexOutOfRange { index: i, rank: r });
        }
        Ok(())
    }

    fn h_table(&self, r: usize, minus: bool) -> Result<Vec<Series>> {
        if let Some(t) = self.h.lock().expect("cache lock").get(&(r, minus)) {
            return Ok(t.clone());
        }
        let mu = names("mu", r);
        let s = names("s", r);
        let table = self
            .g_series(r, minus)?
            .iter()
            .map(|g| sym_reduce(g, &strs(&mu), &strs(&s)))
            .collect::<Result<Vec<_>>>()?;
        self.h.lock().expect("cache lock").insert((r, minus), table.clone());
        Ok(table)
    }

    /// `H^i(s_1..s_r, x)`: `G^i` rewritten in elementary symmetric functions of the roots.
    pub fn h_series(&self, r: usize, i: usize) -> Result<Series> {
        Self::check_index(r, i)?;
        Ok(self.h_table(r, false)?[i - 1].clone())
    }

    /// `H^i_-` built from the difference law.
    pub fn h_minus_series(&self, r: usize, i: usize) -> Result<Series> {
        Self::check_index(r, i)?;
        Ok(self.h_table(r, true)?[i - 1].clone())
    }

    fn check_ambient(&self, e: &ChernVector) -> Result<()> {
        if e.ambient.ring() != self.law.ring() {
            return Err(Error::Incompatible("bundle over another coefficient ring".into()));
        }
        if e.ambient.cap() > self.cap {
            return Err(Error::OutOfRange(format!(
                "ambient cap {} above the calculus cap {}",
                e.ambient.cap(),
                self.cap
            )));
        }
        Ok(())
    }

    fn check_line_class(e: &ChernVector, l: &Series) -> Result<()> {
        if l.space().ring() != e.ambient.ring() || l.vars() != e.ambient.vars() {
            return Err(Error::Incompatible("line class outside the ambient".into()));
        }
        if !l.constant_term().is_zero() {
            return Err(Error::NotNilpotent);
        }
        Ok(())
    }

    /// Classes of `E (x) L` from `c_1(L) = l`.
    pub fn twist(&self, e: &ChernVector, l: &Series) -> Result<ChernVector> {
        self.twist_with(e, l, false)
    }

    /// Classes of `E` from those of `E (x) L` and `c_1(L) = l`.
    pub fn untwist(&self, e: &ChernVector, l: &Series) -> Result<ChernVector> {
        self.twist_with(e, l, true)
    }

    fn twist_with(&self, e: &ChernVector, l: &Series, minus: bool) -> Result<ChernVector> {
        self.check_ambient(e)?;
        Self::check_line_class(e, l)?;
        let r = e.rank();
        if r == 0 {
            return Ok(e.clone());
        }
        let l = l.truncate(e.ambient.cap());
        let table = self.h_table(r, minus)?;
        let classes = table
            .iter()
            .map(|h| e.evaluate(h, &[("x", &l)]))
            .collect::<Result<Vec<_>>>()?;
        ChernVector::new(&e.ambient, classes)
    }

    fn dual_table(&self, r: usize) -> Result<Vec<Series>> {
        if let Some(t) = self.duals.lock().expect("cache lock").get(&r) {
            return Ok(t.clone());
        }
        let sp = self.root_space(r, &[])?;
        let mu = names("mu", r);
        let s = names("s", r);
        let inv = mu
            .iter()
            .map(|m| self.law.apply_inverse(&sp.var(m)?))
            .collect::<Result<Vec<_>>>()?;
        let table = elementary_of(&sp, &inv)?
            .iter()
            .map(|g| sym_reduce(g, &strs(&mu), &strs(&s)))
            .collect::<Result<Vec<_>>>()?;
        self.duals.lock().expect("cache lock").insert(r, table.clone());
        Ok(table)
    }

    /// `E^v`: roots go to their formal inverses.
    pub fn dual(&self, e: &ChernVector) -> Result<ChernVector> {
        self.check_ambient(e)?;
        let classes = self
            .dual_table(e.rank())?
            .iter()
            .map(|d| e.evaluate(d, &[]))
            .collect::<Result<Vec<_>>>()?;
        ChernVector::new(&e.ambient, classes)
    }

    fn tensor_table(&self, r: usize, q: usize) -> Result<Vec<Series>> {
        if let Some(t) = self.tensors.lock().expect("cache lock").get(&(r, q)) {
            return Ok(t.clone());
        }
        let mu = names("mu", r);
        let nu = names("nu", q);
        let s = names("s", r);
        let t = names("t", q);
        let sp = self.root_space(r, &strs(&nu))?;
        let mut roots = Vec::new();
        for m in &mu {
            for n in &nu {
                roots.push(self.law.apply(&sp.var(m)?, &sp.var(n)?)?);
            }
        }
        let table = elementary_of(&sp, &roots)?
            .iter()
            .map(|g| {
                let once = sym_reduce(g, &strs(&mu), &strs(&s))?;
                sym_reduce(&once, &strs(&nu), &strs(&t))
            })
            .collect::<Result<Vec<_>>>()?;
        self.tensors.lock().expect("cache lock").insert((r, q), table.clone());
        Ok(table)
    }

    /// Classes of `E (x) E'`, roots `F(mu_i, nu_j)`.
    pub fn tensor(&self, e: &ChernVector, f: &ChernVector) -> Result<ChernVector> {
        self.check_ambient(e)?;
        self.check_ambient(f)?;
        if e.ambient != f.ambient {
            return Err(Error::Incompatible("bundles over different ambients".into()));
        }
        let t = names("t", f.rank());
        let extra: Vec<(&str, &Series)> = t.iter().map(String::as_str).zip(f.classes.iter()).collect();
        let classes = self
            .tensor_table(e.rank(), f.rank())?
            .iter()
            .map(|h| e.evaluate(h, &extra))
            .collect::<Result<Vec<_>>>()?;
        ChernVector::new(&e.ambient, classes)
    }

    /// `r(E) + a11 c_1(E^v)`: the class of a bundle under `K^0 -> cobordism`.
    /// After `a11 -> -beta` this reads `r - beta c_1(E^v)`.
    pub fn cobordism_class_of_k(&self, e: &ChernVector) -> Result<Series> {
        let a11 = self.law.coefficient(1, 1);
        let r = e.ambient.ring().int(e.rank() as i64);
        let c1_dual = self.dual(e)?.class(1);
        e.ambient.constant(r).add(&c1_dual.scale(&a11)?)
    }

    /// `sum_j [L_j]` over the Chern roots, each line class read as `1 + a11 c_1(L_j^v)`.
    pub fn k_class_of_bundle(&self, e: &ChernVector) -> Result<Series> {
        self.check_ambient(e)?;
        let r = e.rank();
        let a11 = self.law.coefficient(1, 1);
        let sp = self.root_space(r, &[])?;
        let mu = names("mu", r);
        let mut sum = sp.zero();
        for m in &mu {
            let inv = self.law.apply_inverse(&sp.var(m)?)?;
            sum = sum.add(&sp.one().add(&inv.scale(&a11)?)?)?;
        }
        let table = sym_reduce(&sum, &strs(&mu), &strs(&names("s", r)))?;
        e.evaluate(&table, &[])
    }
}

/// `e_1..e_n` of the given series.
fn elementary_of(sp: &SeriesSpace, xs: &[Series]) -> Result<Vec<Series>> {
    let mut e = vec![sp.one()];
    for x in xs {
        let mut next = e.clone();
        next.push(sp.zero());
        for k in 1..next.len() {
            let prev = e.get(k).cloned().unwrap_or_else(|| sp.zero());
            next[k] = prev.add(&e[k - 1].mul(x)?)?;
        }
        e = next;
    }
    Ok(e.into_iter().skip(1).collect())
}

/// Rewrites `prod_j p(mu_j)` for a one-variable series `p` in the classes of `e`.
fn multiplicative_class(e: &ChernVector, p: &Series) -> Result<Series> {
    let r = e.rank();
    let ring = e.ambient.ring();
    let mu = names("mu", r);
    let cap = e.ambient.cap();
    let sp = SeriesSpace::new(ring, &strs(&mu), cap)?;
    let mut prod = sp.one();
    for m in &mu {
        prod = prod.mul(&p.substitute(&[("x", &sp.var(m)?)])?)?;
    }
    let table = sym_reduce(&prod, &strs(&mu), &strs(&names("s", r)))?;
    e.evaluate(&table, &[])
}

/// `Td^-1(E) = prod_j B(mu_j)` with `B(x) = sum b_i x^i`.
pub fn todd_inverse(t: &TwistData, e: &ChernVector) -> Result<Series> {
    if t.ring() != e.ambient.ring() {
        return Err(Error::Incompatible("twist over another ring".into()));
    }
    multiplicative_class(e, &t.b_series()?)
}

/// `Td^-1(E0^v) / Td^-1(E1^v)` for the complex `E1 -> E0`, duals taken in `calc`'s law.
pub fn todd_inverse_qs(calc: &ChernCalculus, t: &TwistData, c: &TwoTermComplex) -> Result<Series> {
    let top = todd_inverse(t, &calc.dual(&c.e0)?)?;
    let bottom = todd_inverse(t, &calc.dual(&c.e1)?)?;
    top.mul(&bottom.inverse()?)
}

/// First Chern class in the twisted theory.
pub fn twisted_first_chern(t: &TwistData, c1: &Series, convention: TwistConvention) -> Result<Series> {
    if !c1.constant_term().is_zero() {
        return Err(Error::NotNilpotent);
    }
    match convention {
        TwistConvention::Coordinate => t.series().substitute(&[("x", c1)]),
        TwistConvention::Expansion => {
            let b = t.b_series()?.substitute(&[("x", c1)])?;
            c1.mul(&b)
        }
    }
}

/// `ch(E) = sum_j e^{mu_j}` over the Chern roots. Needs rational coefficients.
pub fn chern_character(e: &ChernVector) -> Result<Series> {
    let ring = e.ambient.ring();
    if !ring.is_rational() {
        return Err(Error::NotRational);
    }
    let r = e.rank();
    let mu = names("mu", r);
    let sp = SeriesSpace::new(ring, &strs(&mu), e.ambient.cap())?;
    let mut sum = sp.zero();
    for m in &mu {
        sum = sum.add(&sp.var(m)?.exp()?)?;
    }
    let table = sym_reduce(&sum, &strs(&mu), &strs(&names("s", r)))?;
    e.evaluate(&table, &[])
}

/// The ambient `R[[vars]]` with every monomial of degree `nilpotency` zero.
pub fn ambient_space(ring: &crate::exactalg::GradedRing, vars: &[&str], nilpotency: u32) -> Result<SeriesSpace> {
    if nilpotency == 0 {
        return Err(Error::OutOfRange("nilpotency order must be positive".into()));
    }
    SeriesSpace::with_vars(ring, vars.iter().map(|v| Var::new(v, 1)).collect(), nilpotency - 1)
}
