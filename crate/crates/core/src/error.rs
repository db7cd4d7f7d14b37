use thiserror::Error;

use crate::pointset::PointSet;

/// Errors raised by the engine. Verification failures are data, not errors;
/// these are input and precondition violations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a topology: {0}")]
    NotATopology(String),
    #[error("point index {index} out of range for a {points}-point space")]
    BadIndex { index: usize, points: usize },
    #[error("size cap exceeded: {0}")]
    TooLarge(String),
    #[error("subspace must be nonempty")]
    EmptySubspace,
    #[error("family does not cover the space; uncovered points {uncovered}")]
    NotACover { uncovered: PointSet },
    #[error("cover member {set} is not open")]
    NotOpen { set: PointSet },
    #[error("cover member {set} is not regular open")]
    NotRegular { set: PointSet },
    #[error("covers live over different spaces")]
    SpaceMismatch,
    #[error("not an R-map: preimage of regular open {witness} is not regular open")]
    NotRMap { witness: PointSet },
    #[error("target {missing} is not covered by the family")]
    Uncoverable { missing: PointSet },
    #[error("empty target")]
    EmptyTarget,
    #[error("set {set} is not invariant: image {image}")]
    NotInvariant { set: PointSet, image: PointSet },
    #[error("map is not a bijection")]
    NotBijective,
    #[error("map table has {got} entries, space has {expected} points")]
    BadTable { got: usize, expected: usize },
    #[error("shift space is empty: no bi-infinite admissible sequence")]
    EmptyShift,
    #[error("bad shift presentation: {0}")]
    BadShift(String),
    #[error("power iteration did not converge in {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("no R-map found after {attempts} draws")]
    GaveUp { attempts: usize },
    #[error("{what}: {}{message}", position(*line, *column))]
    Parse {
        what: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown document {0:?}")]
    UnknownName(String),
    #[error("document name {0:?} is already taken")]
    DuplicateName(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn position(line: usize, column: usize) -> String {
    match line {
        0 => String::new(),
        _ => format!("line {line}, column {column}: "),
    }
}
