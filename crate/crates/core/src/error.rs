use thiserror::Error;

/// Errors raised by the algebraic layers (rings, series, laws, Chern data, models).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("relation {index} is not homogeneous: `{relation}`")]
    InhomogeneousRelation { index: usize, relation: String },

    #[error("monomial `{monomial}` has size {size}, above the ring cap {cap}")]
    WeightOverflow {
        monomial: String,
        size: u32,
        cap: u32,
    },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),

    #[error("homomorphism does not preserve relation {index}: `{relation}` maps to `{image}`")]
    RelationNotPreserved {
        index: usize,
        relation: String,
        image: String,
    },

    #[error("image of `{generator}` is not homogeneous of weight {expected}")]
    ImageNotHomogeneous { generator: String, expected: i32 },

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("cannot substitute a series with nonzero constant term into `{0}`")]
    NonzeroConstantSubstitution(String),

    #[error("element `{0}` is not invertible")]
    NotInvertible(String),

    #[error("operation requires rational coefficients")]
    NotRational,

    #[error("series is not symmetric under the transposition of `{0}` and `{1}`")]
    NotSymmetric(String, String),

    #[error("index {index} out of range 1..={rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("element is not nilpotent (nonzero constant term)")]
    NotNilpotent,

    #[error("class c_{index} has order {order}, below its index")]
    ClassOrder { index: usize, order: u32 },

    #[error("formal group law axiom `{0}` fails")]
    NotAFormalGroupLaw(&'static str),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
