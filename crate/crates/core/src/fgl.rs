//! Formal group laws: the universal law over a truncated Lazard ring, its
//! inverse, difference law, n-series, logarithm, specializations and twists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::{CoeffDomain, GradedRing, PresentationJson, RingElement, RingHom};
use crate::series::{Series, SeriesJson, SeriesSpace};

/// Name of the Lazard generator `a_ij`, `i <= j`.
pub fn lazard_name(i: u32, j: u32) -> String {
    if i < 10 && j < 10 {
        format!("a{i}{j}")
    } else {
        format!("a{i}_{j}")
    }
}

/// Index pairs `(i, j)`, `1 <= i <= j`, `i + j - 1 <= w`, ordered by weight then `(i, j)`.
pub fn lazard_indices(w: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for weight in 1..=w {
        for i in 1..=weight {
            let j = weight + 1 - i;
            if i <= j {
                out.push((i, j));
            }
        }
    }
    out
}

fn lazard_generators(w: u32) -> Vec<(String, i32)> {
    lazard_indices(w)
        .into_iter()
        .map(|(i, j)| (lazard_name(i, j), (i + j - 1) as i32))
        .collect()
}

/// `x + y + sum a_ij x^i y^j` over any ring carrying the `a_ij` as generators.
fn generic_law(space: &SeriesSpace, w: u32) -> Result<Series> {
    let ring = space.ring();
    let mut f = space.var("x")?.add(&space.var("y")?)?;
    for (i, j) in lazard_indices(w) {
        let a = ring.gen(&lazard_name(i, j))?;
        f = f.add(&space.monomial(vec![i, j], a.clone()))?;
        if i != j {
            f = f.add(&space.monomial(vec![j, i], a))?;
        }
    }
    Ok(f)
}

/// The Lazard ring in weights up to `w`: generators `a_ij` modulo the
/// coefficients of `F(F(x,y),z) - F(x,F(y,z))` in degrees up to `w + 1`.
///
/// Products are taken modulo everything of weight above `w`.
pub fn lazard_ring(w: u32) -> Result<GradedRing> {
    if w == 0 {
        return Err(Error::OutOfRange("Lazard weight must be at least 1".into()));
    }
    let gens = lazard_generators(w);
    let free = GradedRing::new_truncated(gens.clone(), Vec::new(), w, CoeffDomain::Integers)?;
    let two = SeriesSpace::new(&free, &["x", "y"], w + 1)?;
    let f = generic_law(&two, w)?;
    let defect = associativity_defect(&f)?;
    let mut relations: Vec<RingElement> = Vec::new();
    for (_, c) in defect.sorted_terms() {
        if !relations.contains(c) && !relations.contains(&free.neg(c)) {
            relations.push(c.clone());
        }
    }
    GradedRing::new_truncated(gens, relations, w, CoeffDomain::Integers)
}

fn associativity_defect(f: &Series) -> Result<Series> {
    let three = SeriesSpace::new(f.ring(), &["x", "y", "z"], f.cap())?;
    let (x, y, z) = (three.var("x")?, three.var("y")?, three.var("z")?);
    let fxy = f.substitute(&[("x", &x), ("y", &y)])?;
    let fyz = f.substitute(&[("x", &y), ("y", &z)])?;
    let left = f.substitute(&[("x", &fxy), ("y", &z)])?;
    let right = f.substitute(&[("x", &x), ("y", &fyz)])?;
    left.sub(&right)
}

/// A formal group law `F(x, y)` together with its formal inverse and difference law.
#[derive(Clone, Debug)]
pub struct FormalGroupLaw {
    law: Series,
    inverse: Series,
    difference: Series,
}

impl PartialEq for FormalGroupLaw {
    fn eq(&self, other: &Self) -> bool {
        self.law == other.law
    }
}

impl FormalGroupLaw {
    /// Checks the axioms on the given series in `x, y` and caches derived laws.
    pub fn new(law: Series) -> Result<Self> {
        let names: Vec<&str> = law.vars().iter().map(|v| v.name.as_str()).collect();
        if names != ["x", "y"] || law.vars().iter().any(|v| v.degree != 1) {
            return Err(Error::Incompatible("a law is a series in `x, y`".into()));
        }
        let sp = law.space().clone();
        let (x, y) = (sp.var("x")?, sp.var("y")?);
        let zero = sp.zero();
        if law.substitute(&[("x", &x), ("y", &zero)])? != x.truncate(law.cap())
            || law.substitute(&[("x", &zero), ("y", &y)])? != y.truncate(law.cap())
        {
            return Err(Error::NotAFormalGroupLaw("unit"));
        }
        if law.substitute(&[("x", &y), ("y", &x)])? != law {
            return Err(Error::NotAFormalGroupLaw("commutativity"));
        }
        if !associativity_defect(&law)?.is_zero() {
            return Err(Error::NotAFormalGroupLaw("associativity"));
        }
        Self::with_caches(law)
    }

    fn with_caches(law: Series) -> Result<Self> {
        let inverse = solve_inverse(&law)?;
        let sp = law.space().clone();
        let y = sp.var("y")?;
        let iota_y = inverse.substitute(&[("x", &y)])?;
        let difference = law.substitute(&[("x", &sp.var("x")?), ("y", &iota_y)])?;
        Ok(Self {
            law,
            inverse,
            difference,
        })
    }

    /// The universal law over [`lazard_ring`]`(w)`, with series cap `w + 1`.
    pub fn universal(w: u32) -> Result<Self> {
        let ring = lazard_ring(w)?;
        let sp = SeriesSpace::new(&ring, &["x", "y"], w + 1)?;
        Self::new(generic_law(&sp, w)?)
    }

    /// `x + y` over `ring`.
    pub fn additive(ring: &GradedRing, cap: u32) -> Result<Self> {
        let sp = SeriesSpace::new(ring, &["x", "y"], cap)?;
        Self::new(sp.parse("x + y")?)
    }

    /// `x + y - beta*x*y` for an element `beta` of `ring`.
    pub fn multiplicative(ring: &GradedRing, beta: &RingElement, cap: u32) -> Result<Self> {
        let sp = SeriesSpace::new(ring, &["x", "y"], cap)?;
        let xy = sp.parse("x*y")?.scale(beta)?;
        Self::new(sp.parse("x + y")?.sub(&xy)?)
    }

    /// `x + y - beta*x*y` over `Z[beta, beta^-1]`.
    pub fn multiplicative_periodic(cap: u32) -> Result<Self> {
        let ring = GradedRing::laurent_beta(CoeffDomain::Integers, cap);
        let beta = ring.gen("beta")?;
        Self::multiplicative(&ring, &beta, cap)
    }

    pub fn ring(&self) -> &GradedRing {
        self.law.ring()
    }

    pub fn cap(&self) -> u32 {
        self.law.cap()
    }

    /// `F(x, y)`.
    pub fn series(&self) -> &Series {
        &self.law
    }

    /// The formal inverse `i(x)` with `F(x, i(x)) = 0`.
    pub fn inverse(&self) -> &Series {
        &self.inverse
    }

    /// `F_-(x, y) = F(x, i(y))`.
    pub fn difference(&self) -> &Series {
        &self.difference
    }

    /// Coefficient `a_ij` of `x^i y^j`.
    pub fn coefficient(&self, i: u32, j: u32) -> RingElement {
        self.law.coeff(&[i, j])
    }

    /// `F(a, b)` for two series over the same space.
    pub fn apply(&self, a: &Series, b: &Series) -> Result<Series> {
        self.law.substitute(&[("x", a), ("y", b)])
    }

    /// `F_-(a, b)`.
    pub fn apply_difference(&self, a: &Series, b: &Series) -> Result<Series> {
        self.difference.substitute(&[("x", a), ("y", b)])
    }

    /// `i(a)`.
    pub fn apply_inverse(&self, a: &Series) -> Result<Series> {
        self.inverse.substitute(&[("x", a)])
    }

    /// The one-variable space of the inverse and n-series.
    pub fn line_space(&self) -> &SeriesSpace {
        self.inverse.space()
    }

    /// `[d](x)`: the `d`-fold formal sum of `x`, negative `d` through the inverse.
    pub fn n_series(&self, d: i64) -> Result<Series> {
        let sp = self.line_space();
        let x = sp.var("x")?;
        let mut acc = sp.zero();
        for _ in 0..d.unsigned_abs() {
            acc = self.apply(&acc, &x)?;
        }
        if d < 0 {
            acc = self.apply_inverse(&acc)?;
        }
        Ok(acc)
    }

    /// The same law with coefficients pushed through `h`.
    pub fn specialize(&self, h: &RingHom) -> Result<Self> {
        Self::with_caches(self.law.map_coefficients(h)?)
    }

    /// The same law over the rationals.
    pub fn rationalize(&self) -> Result<Self> {
        if self.ring().is_rational() {
            return Ok(self.clone());
        }
        self.specialize(&RingHom::rationalization(self.ring()))
    }

    /// `1 / F_y(x, 0)`. Its coefficients are the pushforward weights `p_m`.
    pub fn invariant_differential(&self) -> Result<Series> {
        let sp = self.law.space();
        let fy = self.law.derivative("y")?;
        let line = self.line_space().with_cap(fy.cap());
        let at_zero = fy.substitute(&[("x", &line.var("x")?), ("y", &line.zero())])?;
        at_zero.inverse().map_err(|_| {
            Error::NotInvertible(format!("F_y(x, 0) for {}", sp.vars()[0].name))
        })
    }

    /// `p_0, p_1, ...` through the cap of the invariant differential, with
    /// `log(x) = sum p_m x^{m+1} / (m+1)`.
    pub fn pm_coefficients(&self) -> Result<Vec<RingElement>> {
        let w = self.invariant_differential()?;
        (0..=w.cap()).map(|m| w.coeff_of("x", m)).collect()
    }

    /// The logarithm `l` with `l(F(x,y)) = l(x) + l(y)`. Needs rational coefficients.
    pub fn log(&self) -> Result<Series> {
        if !self.ring().is_rational() {
            return Err(Error::NotRational);
        }
        Ok(self.invariant_differential()?.integrate("x")?.truncate(self.cap()))
    }

    /// Compositional inverse of the logarithm.
    pub fn exp(&self) -> Result<Series> {
        self.log()?.reversion()
    }

    /// `F_t(x, y) = g(F(g^-1(x), g^-1(y)))`.
    pub fn twist(&self, t: &TwistData) -> Result<Self> {
        if t.g.ring() != self.ring() {
            return Err(Error::Incompatible("twist over another ring".into()));
        }
        let cap = self.cap().min(t.cap());
        let sp = self.law.space().with_cap(cap);
        let (x, y) = (sp.var("x")?, sp.var("y")?);
        let ginv = t.inverse_series()?;
        let gx = ginv.substitute(&[("x", &x)])?;
        let gy = ginv.substitute(&[("x", &y)])?;
        let inner = self.law.truncate(cap).substitute(&[("x", &gx), ("y", &gy)])?;
        let twisted = t.g.substitute(&[("x", &inner)])?;
        Self::new(twisted)
    }

    /// The twist `g = exp_G . log_F` carrying this law to `target`.
    pub fn tau_for_target(&self, target: &FormalGroupLaw) -> Result<TwistData> {
        if self.ring() != target.ring() {
            return Err(Error::Incompatible("laws over different rings".into()));
        }
        let log_f = self.log()?;
        let exp_g = target.exp()?;
        let g = exp_g.substitute(&[("x", &log_f)])?;
        TwistData::from_g(g)
    }

    pub fn to_json(&self) -> FglJson {
        FglJson {
            cap: self.cap(),
            ring: self.ring().presentation(),
            law: self.law.to_json(),
            inverse: self.inverse.to_json(),
            difference: self.difference.to_json(),
        }
    }
}

/// Solves `F(x, i) = 0` one degree at a time, using `F_y(0,0) = 1`.
fn solve_inverse(law: &Series) -> Result<Series> {
    let line = SeriesSpace::new(law.ring(), &["x"], law.cap())?;
    let x = line.var("x")?;
    let mut iota = x.neg();
    for k in 2..=law.cap() {
        let err = law.substitute(&[("x", &x), ("y", &iota)])?.coeff(&[k]);
        if !err.is_zero() {
            iota = iota.sub(&line.monomial(vec![k], err))?;
        }
    }
    Ok(iota)
}

/// A change of coordinates `g(x) = x + O(x^2)`; the sequence `b` is given by
/// `x / g(x) = sum b_i x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistData {
    g: Series,
}

impl TwistData {
    pub fn from_g(g: Series) -> Result<Self> {
        if g.vars().len() != 1 || g.vars()[0].name != "x" {
            return Err(Error::Incompatible("twist series must be in `x`".into()));
        }
        let ring = g.ring();
        if !g.constant_term().is_zero() || g.coeff(&[1]) != ring.one() {
            return Err(Error::NotInvertible(format!("twist {g} is not x + O(x^2)")));
        }
        Ok(Self { g })
    }

    /// From `b_0 = 1, b_1, ...`; the cap is the number of entries.
    pub fn from_b(ring: &GradedRing, b: &[RingElement]) -> Result<Self> {
        if b.first() != Some(&ring.one()) {
            return Err(Error::OutOfRange("b_0 must be 1".into()));
        }
        let cap = b.len() as u32;
        let sp = SeriesSpace::new(ring, &["x"], cap - 1)?;
        let bs = sp.from_terms(b.iter().enumerate().map(|(i, c)| (vec![i as u32], c.clone())))?;
        let inv = bs.inverse()?;
        let full = SeriesSpace::new(ring, &["x"], cap)?;
        let mut g = full.zero();
        for (e, c) in inv.terms() {
            g = g.add(&full.monomial(vec![e[0] + 1], c.clone()))?;
        }
        Self::from_g(g)
    }

    pub fn identity(ring: &GradedRing, cap: u32) -> Result<Self> {
        Self::from_g(SeriesSpace::new(ring, &["x"], cap)?.var("x")?)
    }

    pub fn cap(&self) -> u32 {
        self.g.cap()
    }

    pub fn ring(&self) -> &GradedRing {
        self.g.ring()
    }

    pub fn series(&self) -> &Series {
        &self.g
    }

    /// `g^-1`.
    pub fn inverse_series(&self) -> Result<Series> {
        self.g.reversion()
    }

    /// The twist undoing this one.
    pub fn inverse(&self) -> Result<Self> {
        Self::from_g(self.inverse_series()?)
    }

    /// `sum b_i x^i = x / g(x)`, known to degree `cap - 1`.
    pub fn b_series(&self) -> Result<Series> {
        let sp = SeriesSpace::new(self.ring(), &["x"], self.cap() - 1)?;
        let mut shifted = sp.zero();
        for (e, c) in self.g.terms() {
            shifted = shifted.add(&sp.monomial(vec![e[0] - 1], c.clone()))?;
        }
        shifted.inverse()
    }

    /// `b_0, ..., b_{cap-1}`.
    pub fn b_sequence(&self) -> Result<Vec<RingElement>> {
        let b = self.b_series()?;
        (0..self.cap()).map(|i| b.coeff_of("x", i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FglJson {
    pub cap: u32,
    pub ring: PresentationJson,
    #[serde(rename = "F")]
    pub law: SeriesJson,
    pub inverse: SeriesJson,
    pub difference: SeriesJson,
}

/// `L -> target` sending every `a_ij` to zero.
pub fn additive_specialization(lazard: &GradedRing, target: &GradedRing) -> Result<RingHom> {
    RingHom::new(lazard, target, &[])
}

/// `L -> target` with `a11 -> -beta` and every other `a_ij` to zero.
pub fn multiplicative_specialization(
    lazard: &GradedRing,
    target: &GradedRing,
    beta: &RingElement,
) -> Result<RingHom> {
    let img = target.neg(beta);
    if target.homogeneous_weight(beta) == Some(1) {
        RingHom::new(lazard, target, &[("a11", img)])
    } else {
        RingHom::new_ungraded(lazard, target, &[("a11", img)])
    }
}
