//! Exact coefficients and finitely presented graded rings.

mod hom;
pub mod lattice;
pub mod parse;
mod ring;

pub use hom::RingHom;
pub use ring::{
    parse_polynomial, CoeffDomain, ElementJson, Exps, Generator, GradedRing, PresentationJson,
    RingElement, TermJson, Q,
};
