//! Lock-step comparison of an LSST run with the run of its translation.
//!
//! After every LSST step the LDGV configuration may move only the threads
//! that took part in that step, and must reach the image of the new LSST
//! configuration within a bounded number of its own steps.

use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::ast::{alpha_eq_expr, alpha_eq_value, Expr};
use crate::checker::{CheckMode, Report};
use crate::eval::{Config, StepResult};

use super::{lsst_type_check, translate, translate_expr, translate_value, LConfig, LStepResult, LsstProgram};

/// LDGV steps allowed to catch up with one LSST step.
pub const DEFAULT_RESYNC_BOUND: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepMatch {
    pub lsst_step: usize,
    pub rule: &'static str,
    pub threads: Vec<usize>,
    pub ldgv_rules: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub lsst_steps: usize,
    pub ldgv_steps: usize,
    /// Largest number of LDGV steps taken for a single LSST step.
    pub max_resync: usize,
    pub matches: Vec<StepMatch>,
    pub lsst_outcome: &'static str,
    pub ldgv_outcome: &'static str,
    pub lsst_value: Option<String>,
    pub ldgv_value: Option<String>,
    pub values_agree: bool,
}

impl SimulationReport {
    pub fn ok(&self) -> bool {
        self.values_agree && self.lsst_outcome == self.ldgv_outcome
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.matches {
            let ids: Vec<String> = m.threads.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(s, "{} {} {} => {}", m.lsst_step, m.rule, ids.join(","), m.ldgv_rules.join(" "));
        }
        let _ = writeln!(
            s,
            "lsst steps {}, ldgv steps {}, max resync {}",
            self.lsst_steps, self.ldgv_steps, self.max_resync
        );
        let show = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "lsst: {} main = {}", self.lsst_outcome, show(&self.lsst_value));
        let _ = writeln!(s, "ldgv: {} main = {}", self.ldgv_outcome, show(&self.ldgv_value));
        let _ = writeln!(s, "{}", if self.ok() { "simulation ok" } else { "final results differ" });
        s
    }
}

/// The first pair of configurations that failed to line up.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub lsst_step: usize,
    pub reason: String,
    pub lsst: String,
    pub image: String,
    pub ldgv: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "after LSST step {}: {}\nLSST configuration:\n{}expected LDGV configuration:\n{}actual LDGV configuration:\n{}",
            self.lsst_step, self.reason, self.lsst, self.image, self.ldgv
        )
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SimulationError {
    #[error("the LSST program is ill-typed:\n{}", .0.to_text())]
    IllTyped(Report),
    #[error("{0}")]
    Load(String),
    #[error("simulation mismatch {0}")]
    SimulationMismatch(Box<Divergence>),
}

fn render<T: fmt::Display>(threads: impl Iterator<Item = (usize, T)>) -> String {
    threads.map(|(id, e)| format!("  thread {id}: {e}\n")).collect()
}

fn image(cfg: &LConfig) -> Vec<(usize, Expr)> {
    cfg.threads()
        .iter()
        .map(|t| (t.id, translate_expr(&t.expr).expect("typed programs translate").canonical()))
        .collect()
}

fn agrees(img: &[(usize, Expr)], ldgv: &Config) -> bool {
    img.len() == ldgv.threads().len()
        && img
            .iter()
            .zip(ldgv.threads())
            .all(|((id, e), t)| *id == t.id && alpha_eq_expr(e, &t.expr.clone().canonical()))
}

/// Threads among `ids` whose LDGV side still differs from its image.
fn pending(img: &[(usize, Expr)], ldgv: &Config, ids: &[usize]) -> Vec<usize> {
    ids.iter()
        .copied()
        .filter(|id| {
            let want = img.iter().find(|(i, _)| i == id).map(|(_, e)| e);
            let have = ldgv.threads().iter().find(|t| t.id == *id).map(|t| t.expr.clone().canonical());
            match (want, have) {
                (Some(w), Some(h)) => !alpha_eq_expr(w, &h),
                (None, None) => false,
                _ => true,
            }
        })
        .collect()
}

fn divergence(step: usize, reason: impl Into<String>, l: &LConfig, d: &Config) -> SimulationError {
    SimulationError::SimulationMismatch(Box::new(Divergence {
        lsst_step: step,
        reason: reason.into(),
        lsst: render(l.threads().iter().map(|t| (t.id, &t.expr))),
        image: render(image(l).into_iter()),
        ldgv: render(d.threads().iter().map(|t| (t.id, &t.expr))),
    }))
}

/// Runs `prog` and its translation side by side for at most `max_steps`
/// LSST steps, allowing [`DEFAULT_RESYNC_BOUND`] LDGV steps per LSST step.
pub fn simulate_check(prog: &LsstProgram, max_steps: usize) -> Result<SimulationReport, SimulationError> {
    simulate_with_bound(prog, max_steps, DEFAULT_RESYNC_BOUND)
}

pub fn simulate_with_bound(
    prog: &LsstProgram,
    max_steps: usize,
    bound: usize,
) -> Result<SimulationReport, SimulationError> {
    let tp = lsst_type_check(prog, CheckMode::KeepGoing);
    if !tp.is_ok() {
        return Err(SimulationError::IllTyped(tp.report));
    }
    let target = translate(&tp).map_err(|e| SimulationError::Load(e.to_string()))?;
    let mut lsst = LConfig::from_program(&tp.program).map_err(|e| SimulationError::Load(e.to_string()))?;
    let mut ldgv = Config::from_program(&target).map_err(|e| SimulationError::Load(e.to_string()))?;
    if !agrees(&image(&lsst), &ldgv) {
        return Err(divergence(0, "initial configurations differ", &lsst, &ldgv));
    }
    let mut matches = Vec::new();
    let mut max_resync = 0;
    let lsst_outcome = loop {
        if lsst.steps() >= max_steps {
            break lsst.clone().run(max_steps);
        }
        let entry = match lsst.step() {
            LStepResult::Stepped(e) => e,
            LStepResult::Terminal(o) => break o,
        };
        let img = image(&lsst);
        let mut rules = Vec::new();
        loop {
            if rules.len() == bound {
                return Err(divergence(entry.step, format!("no match within {bound} LDGV steps"), &lsst, &ldgv));
            }
            // A thread that already matches its image waits, so that it
            // does not run ahead while its partner catches up.
            let movers = pending(&img, &ldgv, &entry.threads);
            match ldgv.step_only(&movers) {
                StepResult::Stepped(e) => rules.push(e.rule),
                StepResult::Terminal(o) => {
                    return Err(divergence(entry.step, format!("LDGV side stopped: {o}"), &lsst, &ldgv));
                }
            }
            if agrees(&img, &ldgv) {
                break;
            }
        }
        max_resync = max_resync.max(rules.len());
        matches.push(StepMatch { lsst_step: entry.step, rule: entry.rule, threads: entry.threads, ldgv_rules: rules });
    };
    // Blocked LSST threads may still have administrative LDGV steps ahead.
    let ldgv_outcome = ldgv.run(ldgv.steps() + bound);
    let lsst_value = lsst_outcome.main_value();
    let ldgv_value = ldgv_outcome.main_value();
    let values_agree = match (lsst_value, ldgv_value) {
        (None, None) => true,
        (Some(a), Some(b)) => matches!(translate_value(a), Ok(Some(a)) if alpha_eq_value(&a, b)),
        _ => false,
    };
    Ok(SimulationReport {
        lsst_steps: lsst.steps(),
        ldgv_steps: ldgv.steps(),
        max_resync,
        matches,
        lsst_outcome: lsst_outcome.name(),
        ldgv_outcome: ldgv_outcome.name(),
        lsst_value: lsst_value.map(|v| v.to_string()),
        ldgv_value: ldgv_value.map(|v| v.to_string()),
        values_agree,
    })
}
