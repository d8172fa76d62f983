use thiserror::Error;

use crate::ast::{Expr, Name, Process, Value};
use crate::checker::{CheckError, Checker};

use super::Config;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("endpoint #{0} has no recorded session type")]
    Untyped(u32),
    #[error("configuration after step {step} is ill-typed: {error}")]
    IllTyped { step: usize, error: CheckError },
}

impl Config {
    /// Renders the configuration as a process: one restriction per
    /// channel, then the threads in creation order. The main thread's
    /// value is discarded so that the process has unit type.
    pub fn to_process(&self) -> Result<Process, ReplayError> {
        let mut threads = self.threads.iter().rev().map(|t| {
            let e = if t.id == 0 {
                Expr::Let { binder: Name::new("_"), bound: Box::new(t.expr.clone()), body: Box::new(Expr::Val(Value::Unit)) }
            } else {
                t.expr.clone()
            };
            Process::Expr(e)
        });
        let last = threads.next().unwrap_or(Process::Expr(Expr::Val(Value::Unit)));
        let mut p = threads.fold(last, |acc, t| Process::par(t, acc));
        for (c, d) in self.peers.iter().rev() {
            if c.0 > d.0 {
                continue;
            }
            let session = self.sessions.get(c).ok_or(ReplayError::Untyped(c.0))?.clone();
            p = Process::Nu { c: Name::chan(*c), d: Name::chan(*d), session, body: Box::new(p) };
        }
        Ok(p)
    }

    /// Type-checks the configuration as a closed process.
    pub fn check_typed(&self) -> Result<(), ReplayError> {
        let p = self.to_process()?;
        Checker::new()
            .check_closed_process(&self.global_types, &p)
            .map_err(|error| ReplayError::IllTyped { step: self.steps, error })
    }
}
