//! Rewriting symmetric series in elementary symmetric polynomials.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Series, SeriesSpace, Var};
use crate::error::{Error, Result};
use crate::exactalg::{Exps, RingElement, Q};

/// The space `(s_1..s_r, extras)` that [`sym_reduce`] maps into: `s_k` has
/// `k` times the degree of a root and the extras keep their degrees.
pub fn sym_space(space: &SeriesSpace, roots: &[&str], sym_names: &[&str]) -> Result<SeriesSpace> {
    let (idx, d) = root_indices(space, roots)?;
    if sym_names.len() != roots.len() {
        return Err(Error::Incompatible("one name per elementary symmetric function".into()));
    }
    let mut vars: Vec<Var> = sym_names
        .iter()
        .enumerate()
        .map(|(k, n)| Var::new(n, (k as u32 + 1) * d))
        .collect();
    for (i, v) in space.vars().iter().enumerate() {
        if !idx.contains(&i) {
            vars.push(v.clone());
        }
    }
    SeriesSpace::with_vars(space.ring(), vars, space.cap())
}

fn root_indices(space: &SeriesSpace, roots: &[&str]) -> Result<(Vec<usize>, u32)> {
    let idx = roots
        .iter()
        .map(|n| {
            space
                .var_index(n)
                .ok_or_else(|| Error::UnknownGenerator(n.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = idx.first().map_or(1, |&i| space.vars()[i].degree);
    if idx.iter().any(|&i| space.vars()[i].degree != d) {
        return Err(Error::Incompatible("roots must share one degree".into()));
    }
    Ok((idx, d))
}

/// `e_k` of the given root variables.
pub fn elementary_symmetric(space: &SeriesSpace, roots: &[&str], k: usize) -> Result<Series> {
    let (idx, _) = root_indices(space, roots)?;
    let mut out = space.zero();
    for subset in k_subsets(idx.len(), k) {
        let mut e = vec![0; space.vars().len()];
        for j in subset {
            e[idx[j]] = 1;
        }
        out = out.add(&space.monomial(e, space.ring().one()))?;
    }
    Ok(out)
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

type IntPoly = BTreeMap<Exps, BigInt>;

/// Integer expansions of `prod e_k^{b_k}` in `r` roots, cached by `b`.
struct ElementaryCache {
    r: usize,
    table: HashMap<Exps, IntPoly>,
}

impl ElementaryCache {
    fn new(r: usize) -> Self {
        let mut table = HashMap::new();
        table.insert(vec![0; r], BTreeMap::from([(vec![0; r], BigInt::one())]));
        Self { r, table }
    }

    fn elementary(&self, k: usize) -> IntPoly {
        k_subsets(self.r, k)
            .into_iter()
            .map(|s| {
                let mut e = vec![0; self.r];
                s.into_iter().for_each(|j| e[j] = 1);
                (e, BigInt::one())
            })
            .collect()
    }

    fn get(&mut self, b: &Exps) -> &IntPoly {
        if !self.table.contains_key(b) {
            let k = b.iter().position(|&x| x > 0).expect("nonzero exponent");
            let mut lower = b.clone();
            lower[k] -= 1;
            let base = self.get(&lower).clone();
            let ek = self.elementary(k + 1);
            let mut prod: IntPoly = BTreeMap::new();
            for (m1, c1) in &base {
                for (m2, c2) in &ek {
                    let m: Exps = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                    *prod.entry(m).or_insert_with(BigInt::zero) += c1 * c2;
                }
            }
            prod.retain(|_, c| !c.is_zero());
            self.table.insert(b.clone(), prod);
        }
        &self.table[b]
    }
}

/// Rewrites `f`, symmetric in `roots`, as a series in elementary symmetric
/// functions `sym_names` (named `s_1..s_r` by callers) and the remaining variables.
///
/// Works by repeatedly cancelling the lexicographically leading root monomial.
pub fn sym_reduce(f: &Series, roots: &[&str], sym_names: &[&str]) -> Result<Series> {
    let space = f.space();
    let out_space = sym_space(space, roots, sym_names)?;
    let (idx, _) = root_indices(space, roots)?;
    let r = idx.len();
    let extras: Vec<usize> = (0..space.vars().len()).filter(|i| !idx.contains(i)).collect();

    for w in 0..r.saturating_sub(1) {
        let (a, b) = (idx[w], idx[w + 1]);
        let symmetric = f.terms().all(|(e, c)| {
            let mut t = e.clone();
            t.swap(a, b);
            f.coeff(&t) == *c
        });
        if !symmetric {
            return Err(Error::NotSymmetric(
                space.vars()[a].name.clone(),
                space.vars()[b].name.clone(),
            ));
        }
    }

    let ring = f.ring().clone();
    let mut groups: BTreeMap<Exps, BTreeMap<Exps, RingElement>> = BTreeMap::new();
    for (e, c) in f.terms() {
        let ex: Exps = extras.iter().map(|&i| e[i]).collect();
        let mu: Exps = idx.iter().map(|&i| e[i]).collect();
        groups.entry(ex).or_default().insert(mu, c.clone());
    }

    let mut cache = ElementaryCache::new(r);
    let mut out = out_space.zero();
    for (ex, mut poly) in groups {
        while let Some((lead, c)) = poly.pop_last() {
            // The leading monomial of a symmetric polynomial is non-increasing.
            debug_assert!(lead.windows(2).all(|w| w[0] >= w[1]));
            let b: Exps = (0..r)
                .map(|k| lead[k] - if k + 1 < r { lead[k + 1] } else { 0 })
                .collect();
            let expansion = cache.get(&b);
            for (m, n) in expansion {
                if *m == lead {
                    continue;
                }
                let t = ring.scale(&c, &Q::from_integer(n.clone()))?;
                let entry = poly.entry(m.clone()).or_insert_with(RingElement::zero);
                *entry = ring.sub(entry, &t);
                if entry.is_zero() {
                    poly.remove(m);
                }
            }
            let mut e = b.clone();
            e.extend(ex.iter().copied());
            out = out.add(&out_space.monomial(e, c))?;
        }
    }
    out.exact = f.exact;
    Ok(out)
}

/// Inverse of [`sym_reduce`]: substitutes `s_k = e_k(roots)` into `h`.
/// `target` holds the roots and the same extra variables as `h`.
pub fn sym_expand(h: &Series, target: &SeriesSpace, roots: &[&str], sym_names: &[&str]) -> Result<Series> {
    let images = (1..=roots.len())
        .map(|k| Ok(elementary_symmetric(target, roots, k)?.truncate(h.cap())))
        .collect::<Result<Vec<_>>>()?;
    let assignments: Vec<(&str, &Series)> = sym_names.iter().copied().zip(images.iter()).collect();
    if assignments.is_empty() {
        return h.embed(target);
    }
    h.substitute(&assignments)
}

/// Convenience record of root and symmetric-function names.
#[derive(Clone, Debug)]
pub struct SymSpec {
    pub roots: Vec<String>,
    pub sym_names: Vec<String>,
}

impl SymSpec {
    /// Roots `mu1..mur` and functions `s1..sr`.
    pub fn standard(r: usize) -> Self {
        Self {
            roots: (1..=r).map(|i| format!("mu{i}")).collect(),
            sym_names: (1..=r).map(|i| format!("s{i}")).collect(),
        }
    }

    pub fn roots(&self) -> Vec<&str> {
        self.roots.iter().map(String::as_str).collect()
    }

    pub fn sym_names(&self) -> Vec<&str> {
        self.sym_names.iter().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::GradedRing;

    fn space(names: &[&str], cap: u32) -> SeriesSpace {
        SeriesSpace::new(&GradedRing::integers(0), names, cap).unwrap()
    }

    #[test]
    fn small_examples() {
        let sp = space(&["mu1", "mu2", "x"], 4);
        let roots = ["mu1", "mu2"];
        let names = ["s1", "s2"];
        let out = sym_space(&sp, &roots, &names).unwrap();

        let h = sym_reduce(&sp.parse("mu1*mu2").unwrap(), &roots, &names).unwrap();
        assert_eq!(h, out.parse("s2").unwrap());

        let h = sym_reduce(&sp.parse("mu1^2 + mu2^2").unwrap(), &roots, &names).unwrap();
        assert_eq!(h, out.parse("s1^2 - 2*s2").unwrap());

        let h = sym_reduce(&sp.parse("(mu1 + x)*(mu2 + x)").unwrap(), &roots, &names).unwrap();
        assert_eq!(h, out.parse("s2 + s1*x + x^2").unwrap());
    }

    #[test]
    fn asymmetric_input_names_a_transposition() {
        let sp = space(&["mu1", "mu2", "mu3"], 3);
        let err = sym_reduce(
            &sp.parse("mu1 + mu2").unwrap(),
            &["mu1", "mu2", "mu3"],
            &["s1", "s2", "s3"],
        )
        .unwrap_err();
        assert_eq!(err, Error::NotSymmetric("mu2".into(), "mu3".into()));
    }

    #[test]
    fn expand_inverts_reduce() {
        let sp = space(&["mu1", "mu2", "mu3", "x"], 5);
        let roots = ["mu1", "mu2", "mu3"];
        let names = ["s1", "s2", "s3"];
        let f = sp
            .parse("(1 + mu1*x)*(1 + mu2*x)*(1 + mu3*x) + mu1^3 + mu2^3 + mu3^3")
            .unwrap();
        let h = sym_reduce(&f, &roots, &names).unwrap();
        assert_eq!(sym_expand(&h, &sp, &roots, &names).unwrap(), f);
    }
}
