//! The site of finite sets `{0..n-1}` and total functions. Every map is
//! confined and specialized, and every Cartesian square is independent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A total function `{0..source-1} -> {0..target-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawMap")]
pub struct FinMap {
    target: usize,
    images: Vec<usize>,
}

#[derive(Deserialize)]
struct RawMap {
    target: usize,
    images: Vec<usize>,
}

impl TryFrom<RawMap> for FinMap {
    type Error = Error;

    fn try_from(raw: RawMap) -> Result<Self> {
        FinMap::new(raw.target, raw.images)
    }
}

impl FinMap {
    pub fn new(target: usize, images: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = images.iter().find(|&&i| i >= target) {
            return Err(Error::Incompatible(format!("image {bad} outside a set of size {target}")));
        }
        Ok(Self { target, images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            target: n,
            images: (0..n).collect(),
        }
    }

    /// The unique map to the one-point set.
    pub fn to_point(n: usize) -> Self {
        Self {
            target: 1,
            images: vec![0; n],
        }
    }

    pub fn source(&self) -> usize {
        self.images.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `next . self`.
    pub fn then(&self, next: &FinMap) -> Result<FinMap> {
        if self.target != next.source() {
            return Err(Error::Incompatible(format!(
                "cannot compose a map into {} elements with one from {}",
                self.target,
                next.source()
            )));
        }
        Ok(FinMap {
            target: next.target,
            images: self.images.iter().map(|&i| next.images[i]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target];
        self.images.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
    }

    pub fn is_bijective(&self) -> bool {
        self.source() == self.target && self.is_injective()
    }

    /// Sizes of the fibers over each target point.
    pub fn fiber_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0; self.target];
        for &i in &self.images {
            sizes[i] += 1;
        }
        sizes
    }

    /// Some left inverse, if the map is injective.
    pub fn retraction(&self) -> Option<FinMap> {
        if !self.is_injective() || (self.source() == 0 && self.target > 0) {
            return None;
        }
        let mut images = vec![0; self.target];
        for (x, &y) in self.images.iter().enumerate() {
            images[y] = x;
        }
        Some(FinMap {
            target: self.source(),
            images,
        })
    }
}

/// `X x_Z Y` for `f: X -> Z` and `g: Y -> Z`, its points the pairs `(x, y)`
/// with `f(x) = g(y)` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreProduct {
    pairs: Vec<(usize, usize)>,
    left: FinMap,
    right: FinMap,
}

impl FibreProduct {
    pub fn new(f: &FinMap, g: &FinMap) -> Result<Self> {
        if f.target != g.target {
            return Err(Error::Incompatible("fibre product over different bases".into()));
        }
        let mut pairs = Vec::new();
        for (x, &fx) in f.images.iter().enumerate() {
            for (y, &gy) in g.images.iter().enumerate() {
                if fx == gy {
                    pairs.push((x, y));
                }
            }
        }
        let left = FinMap {
            target: f.source(),
            images: pairs.iter().map(|p| p.0).collect(),
        };
        let right = FinMap {
            target: g.source(),
            images: pairs.iter().map(|p| p.1).collect(),
        };
        Ok(Self { pairs, left, right })
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Projection to `X`.
    pub fn left(&self) -> &FinMap {
        &self.left
    }

    /// Projection to `Y`.
    pub fn right(&self) -> &FinMap {
        &self.right
    }

    pub fn index_of(&self, x: usize, y: usize) -> Option<usize> {
        self.pairs.binary_search(&(x, y)).ok()
    }

    /// The unique `u: T -> X x_Z Y` with `left . u = p` and `right . u = q`.
    pub fn factor(&self, p: &FinMap, q: &FinMap) -> Result<FinMap> {
        if p.source() != q.source() {
            return Err(Error::Incompatible("cone legs from different sets".into()));
        }
        let images = p
            .images
            .iter()
            .zip(&q.images)
            .map(|(&x, &y)| {
                self.index_of(x, y)
                    .ok_or_else(|| Error::Incompatible("cone does not commute".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FinMap {
            target: self.size(),
            images,
        })
    }

    /// The canonical bijection `Y x_Z X -> X x_Z Y`.
    pub fn swap(&self) -> FinMap {
        let mut swapped: Vec<(usize, usize)> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        swapped.sort_unstable();
        FinMap {
            target: self.size(),
            images: swapped
                .iter()
                .map(|&(y, x)| self.index_of(x, y).expect("pair present"))
                .collect(),
        }
    }
}

/// All maps `{0..source-1} -> {0..target-1}`, in lexicographic order of images.
pub fn all_maps(source: usize, target: usize) -> Vec<FinMap> {
    let mut out = Vec::new();
    if target == 0 && source > 0 {
        return out;
    }
    let mut images = vec![0; source];
    loop {
        out.push(FinMap {
            target,
            images: images.clone(),
        });
        let mut k = source;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            images[k] += 1;
            if images[k] < target {
                break;
            }
            images[k] = 0;
        }
    }
}
