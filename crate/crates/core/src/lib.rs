//! Label-dependent session types.
//!
//! The crate contains a parser for LDGV and LSST programs, an algorithmic
//! bidirectional type checker, a small-step concurrent interpreter and a
//! typed translation from LSST into LDGV together with a simulation harness.

pub mod ast;
pub mod checker;
pub mod env;
pub mod eval;
pub mod lsst;
pub mod parser;
