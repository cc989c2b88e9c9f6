//! Products of projective spaces as test models: `R[x_1..x_k]/(x_i^{n_i+1})`
//! with `x_i = c_1(O(1))` pulled back from the `i`-th factor.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::chern::{chern_character, todd_inverse_qs, ChernCalculus, ChernVector, TwoTermComplex};
use crate::error::{Error, Result};
use crate::exactalg::{GradedRing, RingElement};
use crate::fgl::FormalGroupLaw;
use crate::series::{Series, SeriesSpace};

#[derive(Clone, Debug)]
pub struct ProjModel {
    dims: Vec<u32>,
    law: FormalGroupLaw,
    space: SeriesSpace,
    /// `p_m`: the pushforward of `1` from `P^m`.
    weights: Vec<RingElement>,
}

impl PartialEq for ProjModel {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.law == other.law
    }
}

fn axis_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

impl ProjModel {
    /// The model of `P^{n_1} x ... x P^{n_k}` over the law's coefficient ring.
    pub fn new(dims: &[u32], law: &FormalGroupLaw) -> Result<Self> {
        let total: u32 = dims.iter().sum();
        if total > law.cap() {
            return Err(Error::OutOfRange(format!(
                "total dimension {total} above the law cap {}",
                law.cap()
            )));
        }
        let names = axis_names(dims.len());
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let space = SeriesSpace::new(law.ring(), &refs, total)?;
        let max = dims.iter().copied().max().unwrap_or(0);
        let weights: Vec<RingElement> = law.pm_coefficients()?.into_iter().take(max as usize + 1).collect();
        if weights.len() <= max as usize {
            return Err(Error::OutOfRange(format!("pushforward weights known below P^{max} only")));
        }
        let model = Self {
            dims: dims.to_vec(),
            law: law.clone(),
            space,
            weights,
        };
        model.check_basis()?;
        Ok(model)
    }

    /// The monomials `x^a`, `a_i <= n_i`, are reduced and independent, and
    /// every `x_i^{n_i+1}` vanishes.
    fn check_basis(&self) -> Result<()> {
        let basis = self.basis();
        let expected: usize = self.dims.iter().map(|&n| n as usize + 1).product();
        let one = self.law.ring().one();
        let mut sum = self.space.zero();
        for e in &basis {
            let m = self.space.monomial(e.clone(), one.clone());
            if self.reduce(&m) != m || m.is_zero() {
                return Err(Error::Incompatible("basis monomial is not reduced".into()));
            }
            sum = sum.add(&m)?;
        }
        if basis.len() != expected || sum.num_terms() != expected {
            return Err(Error::Incompatible("model is not free of the expected rank".into()));
        }
        for (i, &n) in self.dims.iter().enumerate() {
            let x = self.space.var_at(i);
            if !self.reduce(&x.pow(n + 1)?).is_zero() {
                return Err(Error::Incompatible("hyperplane class is not nilpotent".into()));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn law(&self) -> &FormalGroupLaw {
        &self.law
    }

    pub fn space(&self) -> &SeriesSpace {
        &self.space
    }

    pub fn rank(&self) -> usize {
        self.dims.iter().map(|&n| n as usize + 1).product()
    }

    /// Exponent vectors `a` with `a_i <= n_i`, in lexicographic order.
    pub fn basis(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for &n in &self.dims {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..=n).map(move |k| {
                        let mut e2 = e.clone();
                        e2.push(k);
                        e2
                    })
                })
                .collect();
        }
        out
    }

    /// Drops monomials with some `x_i` exponent above `n_i`.
    pub fn reduce(&self, s: &Series) -> Series {
        let keep = s
            .terms()
            .filter(|(e, _)| e.iter().zip(&self.dims).all(|(k, n)| k <= n))
            .map(|(e, c)| (e.clone(), c.clone()));
        self.space
            .from_terms(keep)
            .expect("terms already in normal form")
            .assume_exact()
    }

    pub fn mul(&self, a: &Series, b: &Series) -> Result<Series> {
        Ok(self.reduce(&a.mul(b)?))
    }

    /// The hyperplane class of axis `i`.
    pub fn hyperplane(&self, i: usize) -> Result<Series> {
        if i >= self.dims.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                rank: self.dims.len(),
            });
        }
        Ok(self.space.var_at(i))
    }

    /// `c_1(O(d_1, ..., d_k)) = [d_1](x_1) +F ... +F [d_k](x_k)`.
    pub fn line_bundle(&self, degrees: &[i64]) -> Result<Series> {
        if degrees.len() != self.dims.len() {
            return Err(Error::Incompatible("one degree per factor".into()));
        }
        let mut c1 = self.space.zero();
        for (i, &d) in degrees.iter().enumerate() {
            let nd = self.law.n_series(d)?;
            let here = nd.substitute(&[("x", &self.space.var_at(i))])?;
            c1 = self.law.apply(&c1, &here)?;
        }
        Ok(self.reduce(&c1))
    }

    /// The model with axis `i` removed.
    pub fn remove_axis(&self, i: usize) -> Result<ProjModel> {
        if i >= self.dims.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                rank: self.dims.len(),
            });
        }
        let mut dims = self.dims.clone();
        dims.remove(i);
        ProjModel::new(&dims, &self.law)
    }

    /// `pi_*` along the `i`-th factor: `x_i^j * a -> p_{n_i - j} * a`.
    pub fn pushforward(&self, i: usize, s: &Series) -> Result<(ProjModel, Series)> {
        let target = self.remove_axis(i)?;
        let s = self.reduce(s);
        let n = self.dims[i];
        let ring = self.law.ring();
        let mut terms = Vec::new();
        for (e, c) in s.terms() {
            let j = e[i];
            let w = &self.weights[(n - j) as usize];
            let mut e2 = e.clone();
            e2.remove(i);
            terms.push((e2, ring.mul(c, w)?));
        }
        let out = target.space.from_terms(terms)?;
        Ok((target, out))
    }

    /// Pushes forward along every factor, last axis first.
    pub fn pushforward_to_point(&self, s: &Series) -> Result<RingElement> {
        let mut model = self.clone();
        let mut s = s.clone();
        while !model.dims.is_empty() {
            let last = model.dims.len() - 1;
            let (m, t) = model.pushforward(last, &s)?;
            model = m;
            s = t;
        }
        Ok(s.constant_term())
    }

    /// For a single-factor model `P^m`: the element `x^{n-m} g` of the `P^n` model
    /// (pushforward along a linear embedding).
    pub fn linear_embedding_pushforward(&self, target: &ProjModel, g: &Series) -> Result<Series> {
        let (m, n) = match (self.dims.as_slice(), target.dims.as_slice()) {
            ([m], [n]) => (*m, *n),
            _ => return Err(Error::Incompatible("linear embeddings need one factor".into())),
        };
        if m > n {
            return Err(Error::OutOfRange(format!("cannot embed P^{m} in P^{n}")));
        }
        if target.law != self.law {
            return Err(Error::Incompatible("models over different laws".into()));
        }
        let g = self.reduce(g).embed(&target.space)?;
        let shift = target.space.var_at(0).pow(n - m)?;
        target.mul(&g, &shift)
    }

    /// Restriction to this single-factor model along a linear embedding into a
    /// larger projective space.
    pub fn restrict(&self, a: &Series) -> Result<Series> {
        if self.dims.len() != 1 || a.vars().len() != 1 {
            return Err(Error::Incompatible("linear embeddings need one factor".into()));
        }
        Ok(self.reduce(&a.truncate(self.space.cap()).embed(&self.space)?))
    }
}

/// Both sides of Riemann-Roch for `O(d)` on `P^n` and the binomial value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HrrReport {
    pub n: u32,
    pub d: i64,
    pub k_side: String,
    pub ch_side: String,
    pub binomial: String,
    pub agree: bool,
}

/// `binom(n + d, n)` for any integer `d`, as a polynomial in `d`.
pub fn generalized_binomial(n: u32, d: i64) -> BigInt {
    let mut acc = BigRational::one();
    for j in 1..=n as i64 {
        acc *= BigRational::new((d + j).into(), j.into());
    }
    acc.to_integer()
}

fn check_bounds(n: u32, d: i64) -> Result<()> {
    if n > 8 || d.abs() > 8 {
        return Err(Error::OutOfRange(format!(
            "hrr needs 0 <= n <= 8 and |d| <= 8, got n = {n}, d = {d}"
        )));
    }
    Ok(())
}

/// `chi(P^n, O(d))` from K-theory: `pi_*(1 - [-d](x))` in the `beta = 1` multiplicative model.
pub fn euler_characteristic(n: u32, d: i64) -> Result<BigInt> {
    check_bounds(n, d)?;
    let z = GradedRing::integers(0);
    let law = FormalGroupLaw::multiplicative(&z, &z.one(), n + 1)?;
    let model = ProjModel::new(&[n], &law)?;
    // [O(d)] = 1 - c_1(O(d)^v) when beta = 1
    let class = model.space.one().sub(&model.line_bundle(&[-d])?)?;
    let value = model.pushforward_to_point(&class)?;
    Ok(value.constant_term().to_integer())
}

/// `chi(P^n, O(d))` from Chow groups: the degree of `ch(O(d)) Td^-1(pi)`, where the
/// cotangent complex of `P^n -> pt` is `O -> O(-1)^{n+1}` and the twist turns the
/// additive law into the multiplicative one.
pub fn chow_euler_characteristic(n: u32, d: i64) -> Result<BigRational> {
    check_bounds(n, d)?;
    let q = GradedRing::rationals(0);
    let cap = n + 1;
    let add = FormalGroupLaw::additive(&q, cap)?;
    let mult = FormalGroupLaw::multiplicative(&q, &q.one(), cap)?;
    let tau = add.tau_for_target(&mult)?;
    let model = ProjModel::new(&[n], &add)?;
    let amb = model.space.clone();
    let x = amb.var_at(0);
    let calc = ChernCalculus::new(&add, n)?;
    // O(-1)^{n+1} splits into line bundles and Td^-1 is multiplicative on sums.
    let factor = TwoTermComplex::new(
        ChernVector::line_bundle(&amb, x.neg())?,
        ChernVector::trivial(&amb, 0),
    )?;
    let td = todd_inverse_qs(&calc, &tau, &factor)?.pow(n + 1)?;
    let line = ChernVector::line_bundle(&amb, model.line_bundle(&[d])?)?;
    let ch = chern_character(&line)?;
    let integrand = model.mul(&ch, &td)?;
    Ok(model.pushforward_to_point(&integrand)?.constant_term())
}

/// Computes both sides and the binomial oracle.
pub fn grr_check(n: u32, d: i64) -> Result<HrrReport> {
    let k = euler_characteristic(n, d)?;
    let ch = chow_euler_characteristic(n, d)?;
    let b = generalized_binomial(n, d);
    let agree = BigRational::from_integer(k.clone()) == ch && k == b;
    Ok(HrrReport {
        n,
        d,
        k_side: k.to_string(),
        ch_side: crate::exactalg::parse::format_rational(&ch),
        binomial: b.to_string(),
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add_law() -> FormalGroupLaw {
        FormalGroupLaw::additive(&GradedRing::integers(0), 4).unwrap()
    }

    #[test]
    fn point_and_line_models() {
        let law = add_law();
        let pt = ProjModel::new(&[0], &law).unwrap();
        assert_eq!(pt.rank(), 1);
        let p1 = ProjModel::new(&[1], &law).unwrap();
        assert_eq!(p1.rank(), 2);
        let x = p1.hyperplane(0).unwrap();
        assert!(p1.mul(&x, &x).unwrap().is_zero());
        let u = FormalGroupLaw::universal(3).unwrap();
        assert_eq!(ProjModel::new(&[2, 1], &u).unwrap().rank(), 6);
    }

    #[test]
    fn pushforward_examples() {
        let law = add_law();
        let p1 = ProjModel::new(&[1], &law).unwrap();
        let elem = p1.space().parse("5 + 7*x1").unwrap();
        assert_eq!(p1.pushforward_to_point(&elem).unwrap(), law.ring().int(7));

        let per = FormalGroupLaw::multiplicative_periodic(3).unwrap();
        let p1 = ProjModel::new(&[1], &per).unwrap();
        assert_eq!(
            p1.pushforward_to_point(&p1.space().one()).unwrap(),
            per.ring().gen("beta").unwrap()
        );

        let z = GradedRing::integers(0);
        let m1 = FormalGroupLaw::multiplicative(&z, &z.one(), 2).unwrap();
        let p1 = ProjModel::new(&[1], &m1).unwrap();
        assert_eq!(
            p1.pushforward_to_point(&p1.space().parse("1 + x1").unwrap()).unwrap(),
            z.int(2)
        );
    }

    #[test]
    fn embedding_examples() {
        let law = add_law();
        let p0 = ProjModel::new(&[0], &law).unwrap();
        let p1 = ProjModel::new(&[1], &law).unwrap();
        let p2 = ProjModel::new(&[2], &law).unwrap();
        let one = p0.space().one();
        assert_eq!(
            p0.linear_embedding_pushforward(&p1, &one).unwrap(),
            p1.hyperplane(0).unwrap()
        );
        let pushed = p0.linear_embedding_pushforward(&p2, &one).unwrap();
        assert_eq!(p2.pushforward_to_point(&pushed).unwrap(), law.ring().one());
        let g = p2.space().parse("3 + x1").unwrap();
        assert_eq!(p2.linear_embedding_pushforward(&p2, &g).unwrap(), g);
        assert!(p2.linear_embedding_pushforward(&p1, &g).is_err());
    }

    #[test]
    fn small_euler_characteristics() {
        assert_eq!(euler_characteristic(1, 1).unwrap(), BigInt::from(2));
        assert_eq!(euler_characteristic(1, 2).unwrap(), BigInt::from(3));
        assert_eq!(euler_characteristic(0, 0).unwrap(), BigInt::from(1));
        let r = grr_check(2, 2).unwrap();
        assert_eq!((r.k_side.as_str(), r.ch_side.as_str(), r.binomial.as_str()), ("6", "6", "6"));
        assert!(r.agree);
        assert!(grr_check(9, 0).is_err());
        assert_eq!(generalized_binomial(2, -3), BigInt::from(1));
        assert!(grr_check(3, -5).unwrap().agree);
    }
}
