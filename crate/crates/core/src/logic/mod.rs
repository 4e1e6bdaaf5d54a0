//! Epistemic formulas: AST, ASCII grammar, and the simplicial checker.

mod check;
mod formula;
mod parse;

pub(crate) use check::validate_signature;
pub use check::{check, satisfying_facets, CheckError};
pub use formula::Formula;
pub use parse::{parse, ParseError};
