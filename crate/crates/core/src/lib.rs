//! Exact computations with formal group laws, Chern classes and bivariant
//! theories on finite sets.

pub mod bivariant;
pub mod chern;
pub mod cli;
pub mod error;
pub mod exactalg;
pub mod fgl;
pub mod selftest;
pub mod series;
pub mod spaces;

pub use error::{Error, Result};
