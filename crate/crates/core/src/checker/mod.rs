//! The algorithmic type system: value conversion, unfolding, kinding,
//! subtyping, bidirectional typing with output environments, process
//! checking and whole-program reports.
//!
//! All judgments are methods on [`Checker`], which carries the recursor fuel
//! and the stack of rule names used to build error traces.

mod conv;
mod kind;
mod process;
mod program;
mod sub;
mod typing;

pub use program::{check_program, CheckMode, DefReport, ErrorInfo, Report, Status};
pub use typing::SynthResult;

use std::cell::RefCell;
use std::fmt;

use crate::ast::SourcePos;
use crate::env::EnvError;

pub const DEFAULT_FUEL: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ErrorCode {
    NotConvertible,
    UnfoldFailed,
    KindMismatch,
    NotASubtype,
    LinearityViolation,
    BranchEnvMismatch,
    DependencyOnLinear,
    UnboundName,
    FuelExhausted,
    ValueRestriction,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct CheckError {
    pub code: ErrorCode,
    pub message: String,
    pub pos: Option<SourcePos>,
    /// Rule names from the outermost judgment to the failing one.
    pub trace: Vec<&'static str>,
}

impl CheckError {
    pub fn at(mut self, pos: SourcePos) -> Self {
        self.pos.get_or_insert(pos);
        self
    }
}

pub type CResult<T> = Result<T, CheckError>;

pub struct Checker {
    fuel: u32,
    depth: RefCell<u32>,
    stack: RefCell<Vec<&'static str>>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new()
    }
}

pub(crate) struct RuleGuard<'a>(&'a RefCell<Vec<&'static str>>);

impl Drop for RuleGuard<'_> {
    fn drop(&mut self) {
        self.0.borrow_mut().pop();
    }
}

pub(crate) struct FuelGuard<'a>(&'a RefCell<u32>);

impl Drop for FuelGuard<'_> {
    fn drop(&mut self) {
        *self.0.borrow_mut() -= 1;
    }
}

impl Checker {
    pub fn new() -> Self {
        Checker::with_fuel(DEFAULT_FUEL)
    }

    /// `fuel` bounds the nesting of recursor unrollings.
    pub fn with_fuel(fuel: u32) -> Self {
        Checker { fuel: fuel.max(1), depth: RefCell::new(0), stack: RefCell::new(Vec::new()) }
    }

    pub fn fuel(&self) -> u32 {
        self.fuel
    }

    pub(crate) fn rule(&self, name: &'static str) -> RuleGuard<'_> {
        self.stack.borrow_mut().push(name);
        RuleGuard(&self.stack)
    }

    pub(crate) fn unroll(&self) -> CResult<FuelGuard<'_>> {
        let mut d = self.depth.borrow_mut();
        if *d >= self.fuel {
            drop(d);
            return Err(self.err(ErrorCode::FuelExhausted, format!("more than {} nested recursor unrollings", self.fuel)));
        }
        *d += 1;
        Ok(FuelGuard(&self.depth))
    }

    pub(crate) fn err(&self, code: ErrorCode, message: impl Into<String>) -> CheckError {
        let mut trace = self.stack.borrow().clone();
        if trace.is_empty() {
            trace.push("check");
        }
        CheckError { code, message: message.into(), pos: None, trace }
    }

    pub(crate) fn env_err(&self, e: EnvError) -> CheckError {
        match e {
            EnvError::Unbound(x) => self.err(ErrorCode::UnboundName, format!("unbound name `{x}`")),
            EnvError::JoinConflict(x) => {
                self.err(ErrorCode::LinearityViolation, format!("`{x}` is used by both parallel components"))
            }
        }
    }
}
