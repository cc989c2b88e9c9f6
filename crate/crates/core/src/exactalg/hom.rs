use num_traits::One;

use super::ring::{GradedRing, RingElement};
use crate::error::{Error, Result};

/// A ring homomorphism given by the images of the source generators.
#[derive(Clone, Debug)]
pub struct RingHom {
    src: GradedRing,
    dst: GradedRing,
    images: Vec<RingElement>,
    /// Weight of `g`'s image is `weight(g) * scale`; `None` disables the grading check.
    scale: Option<i32>,
}

impl RingHom {
    /// A graded homomorphism: each image must be homogeneous of its generator's weight.
    pub fn new(src: &GradedRing, dst: &GradedRing, images: &[(&str, RingElement)]) -> Result<Self> {
        Self::build(src, dst, images, Some(1))
    }

    /// Images are homogeneous of `scale` times the generator's weight.
    pub fn with_grading_twist(
        src: &GradedRing,
        dst: &GradedRing,
        images: &[(&str, RingElement)],
        scale: i32,
    ) -> Result<Self> {
        Self::build(src, dst, images, Some(scale))
    }

    /// No grading condition, for specializations such as `beta = 1`.
    pub fn new_ungraded(
        src: &GradedRing,
        dst: &GradedRing,
        images: &[(&str, RingElement)],
    ) -> Result<Self> {
        Self::build(src, dst, images, None)
    }

    /// Generators missing from `images` are sent to zero.
    fn build(
        src: &GradedRing,
        dst: &GradedRing,
        images: &[(&str, RingElement)],
        scale: Option<i32>,
    ) -> Result<Self> {
        let mut imgs = vec![RingElement::zero(); src.num_generators()];
        for (name, e) in images {
            let i = src
                .generator_index(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            imgs[i] = dst.normal_form(e)?;
        }
        if let Some(s) = scale {
            for (g, img) in src.generators().iter().zip(&imgs) {
                if !dst.is_homogeneous_of(img, g.weight * s) {
                    return Err(Error::ImageNotHomogeneous {
                        generator: g.name.clone(),
                        expected: g.weight * s,
                    });
                }
            }
        }
        let hom = Self {
            src: src.clone(),
            dst: dst.clone(),
            images: imgs,
            scale,
        };
        for (index, rel) in src.relations().iter().enumerate() {
            // Relations whose image leaves the target box cannot be tested there.
            let image = match hom.apply_raw(rel) {
                Ok(v) => v,
                Err(Error::WeightOverflow { .. }) => continue,
                Err(e) => return Err(e),
            };
            if !image.is_zero() {
                return Err(Error::RelationNotPreserved {
                    index,
                    relation: src.format(rel),
                    image: dst.format(&image),
                });
            }
        }
        Ok(hom)
    }

    pub fn identity(r: &GradedRing) -> Self {
        let images = (0..r.num_generators())
            .map(|i| r.gen_at(i).expect("generator in range"))
            .collect();
        Self {
            src: r.clone(),
            dst: r.clone(),
            images,
            scale: Some(1),
        }
    }

    /// The inclusion of a ring into the same presentation over the rationals.
    pub fn rationalization(r: &GradedRing) -> Self {
        let q = r.rationalize();
        let images = (0..r.num_generators())
            .map(|i| q.gen_at(i).expect("generator in range"))
            .collect();
        Self {
            src: r.clone(),
            dst: q,
            images,
            scale: Some(1),
        }
    }

    pub fn source(&self) -> &GradedRing {
        &self.src
    }

    pub fn target(&self) -> &GradedRing {
        &self.dst
    }

    pub fn grading_scale(&self) -> Option<i32> {
        self.scale
    }

    pub fn image_of(&self, name: &str) -> Option<&RingElement> {
        self.src.generator_index(name).map(|i| &self.images[i])
    }

    fn apply_raw(&self, e: &RingElement) -> Result<RingElement> {
        let mut out = self.dst.zero();
        for (m, c) in e.terms() {
            let mut t = self.dst.scalar(c.clone());
            for (i, &k) in m.iter().enumerate() {
                for _ in 0..k {
                    t = self.dst.mul(&t, &self.images[i])?;
                }
            }
            out = self.dst.add(&out, &t);
        }
        Ok(out)
    }

    /// Applies the map to an element of the source ring.
    pub fn apply(&self, e: &RingElement) -> Result<RingElement> {
        self.apply_raw(e)
    }

    /// Composition `other ∘ self`.
    pub fn then(&self, other: &RingHom) -> Result<RingHom> {
        if other.src != self.dst {
            return Err(Error::Incompatible("composition of homomorphisms".into()));
        }
        let images = self
            .images
            .iter()
            .map(|e| other.apply(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingHom {
            src: self.src.clone(),
            dst: other.dst.clone(),
            images,
            scale: match (self.scale, other.scale) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
        })
    }

    /// True when all images are the generators themselves.
    pub fn is_identity(&self) -> bool {
        self.src == self.dst
            && self.images.iter().enumerate().all(|(i, e)| {
                e.num_terms() == 1
                    && e.terms().all(|(m, c)| {
                        c.is_one() && m.iter().enumerate().all(|(j, &k)| k == u32::from(i == j))
                    })
            })
    }
}
