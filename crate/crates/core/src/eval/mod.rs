//! Small-step evaluation of LDGV programs.
//!
//! A configuration is a flat soup of threads plus a table pairing channel
//! endpoints. Threads are expressions; reduction substitutes values for
//! names, so every intermediate state can be printed and type-checked.

mod replay;
mod step;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ast::{subst_type, ChanId, Expr, Multiplicity, Name, Program, Type, Value};
use crate::checker::Checker;
use crate::env::TypeEnv;

pub use replay::ReplayError;
pub use step::{step_expr, step_expr_in, Ctx, Direction, ExprStep, Globals};

/// Default step budget of `run`.
pub const DEFAULT_MAX_STEPS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct Thread {
    pub id: usize,
    pub expr: Expr,
}

#[derive(Debug, Error, PartialEq)]
pub enum LoadError {
    #[error("program has no `main`")]
    NoMain,
    #[error("global `{0}` did not evaluate to a value: {1}")]
    Global(Name, Outcome),
}

/// One line of the evaluation trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub rule: &'static str,
    pub threads: Vec<usize>,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.threads.iter().map(|t| t.to_string()).collect();
        write!(f, "{} {} {}", self.step, self.rule, ids.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Blocked {
    pub thread: usize,
    pub chan: u32,
    pub dir: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    AllFinished { values: Vec<(usize, Value)> },
    /// Some threads wait on endpoints no peer will ever serve.
    Deadlocked { blocked: Vec<Blocked>, finished: Vec<(usize, Value)> },
    Stuck { thread: usize, reason: String },
    OutOfFuel { steps: usize },
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::AllFinished { .. } => "all_finished",
            Outcome::Deadlocked { .. } => "deadlocked",
            Outcome::Stuck { .. } => "stuck",
            Outcome::OutOfFuel { .. } => "out_of_fuel",
        }
    }

    /// The value of the main thread, when it has finished.
    pub fn main_value(&self) -> Option<&Value> {
        match self {
            Outcome::AllFinished { values } | Outcome::Deadlocked { finished: values, .. } => {
                values.iter().find(|(t, _)| *t == 0).map(|(_, v)| v)
            }
            _ => None,
        }
    }

    pub fn is_stuck(&self) -> bool {
        matches!(self, Outcome::Stuck { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::AllFinished { values } => {
                write!(f, "all threads finished")?;
                for (t, v) in values {
                    write!(f, "\n  thread {t}: {v}")?;
                }
                Ok(())
            }
            Outcome::Deadlocked { blocked, finished } => {
                write!(f, "deadlocked")?;
                for (t, v) in finished {
                    write!(f, "\n  thread {t}: {v}")?;
                }
                for b in blocked {
                    let dir = match b.dir {
                        Direction::Send => "send",
                        Direction::Recv => "recv",
                    };
                    write!(f, "\n  thread {}: blocked on {dir} #{}", b.thread, b.chan)?;
                }
                Ok(())
            }
            Outcome::Stuck { thread, reason } => write!(f, "thread {thread} is stuck: {reason}"),
            Outcome::OutOfFuel { steps } => write!(f, "out of fuel after {steps} steps"),
        }
    }
}

/// Outcome of a single scheduler step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    Stepped(TraceEntry),
    Terminal(Outcome),
}

#[derive(Clone, Debug)]
pub struct Config {
    threads: Vec<Thread>,
    peers: BTreeMap<ChanId, ChanId>,
    /// Current session type of each endpoint, advanced at every rendezvous.
    sessions: BTreeMap<ChanId, Type>,
    next_chan: u32,
    next_thread: usize,
    steps: usize,
    rng: Option<ChaCha8Rng>,
    globals: Globals,
    /// Types of the globals, used when type-checking a configuration.
    global_types: TypeEnv,
}

/// What the scheduler can do next.
enum Action {
    Pure(usize),
    Com { sender: usize, receiver: usize },
}

impl Config {
    /// A configuration with `main` as its only thread.
    pub fn new(main: Expr) -> Config {
        Config {
            threads: vec![Thread { id: 0, expr: main }],
            peers: BTreeMap::new(),
            sessions: BTreeMap::new(),
            next_chan: 0,
            next_thread: 1,
            steps: 0,
            rng: None,
            globals: Globals::new(),
            global_types: TypeEnv::new(),
        }
    }

    /// Loads a program: `main` becomes thread 0 and the definitions are
    /// evaluated in order to values that threads refer to by name.
    pub fn from_program(prog: &Program) -> Result<Config, LoadError> {
        let main = prog.main.as_ref().ok_or(LoadError::NoMain)?;
        let checker = Checker::new();
        let mut globals = Globals::new();
        let mut types = TypeEnv::new();
        for d in &prog.defs {
            let v = match d.body.clone().canonical() {
                Expr::Val(v) => v,
                body => {
                    let mut cfg = Config { globals: globals.clone(), ..Config::new(body) };
                    match cfg.run(DEFAULT_MAX_STEPS) {
                        Outcome::AllFinished { values } if values.len() == 1 => values[0].1.clone(),
                        o => return Err(LoadError::Global(d.name.clone(), o)),
                    }
                }
            };
            if let Some(t) = checker.check_def(&types, d).ok().or_else(|| d.declared.clone()) {
                types = types.bind(d.name.clone(), t, Multiplicity::Un);
            }
            globals.insert(d.name.clone(), v);
        }
        Ok(Config { globals, global_types: types, ..Config::new(main.body.clone()) })
    }

    /// Switches to randomized scheduling driven by `seed`.
    pub fn with_seed(mut self, seed: u64) -> Config {
        self.rng = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn peer(&self, c: ChanId) -> Option<ChanId> {
        self.peers.get(&c).copied()
    }

    pub fn session_of(&self, c: ChanId) -> Option<&Type> {
        self.sessions.get(&c)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Performs one step, or reports why none is possible.
    pub fn step(&mut self) -> StepResult {
        self.step_among(None)
    }

    /// Like [`Config::step`], but only the threads in `only` may move.
    pub fn step_only(&mut self, only: &[usize]) -> StepResult {
        self.step_among(Some(only))
    }

    fn step_among(&mut self, only: Option<&[usize]>) -> StepResult {
        let looks: Vec<ExprStep> = self
            .threads
            .iter()
            .map(|t| match only {
                Some(ids) if !ids.contains(&t.id) => ExprStep::Finished(Value::Unit),
                _ => step_expr_in(&t.expr, &self.globals),
            })
            .collect();
        if let Some((i, ExprStep::Stuck(reason))) = looks.iter().enumerate().find(|(_, s)| matches!(s, ExprStep::Stuck(_))) {
            return StepResult::Terminal(Outcome::Stuck { thread: self.threads[i].id, reason: reason.clone() });
        }
        let mut actions = Vec::new();
        for (i, s) in looks.iter().enumerate() {
            if matches!(s, ExprStep::Stepped(..) | ExprStep::Spawn { .. } | ExprStep::Alloc { .. }) {
                actions.push(Action::Pure(i));
                if self.rng.is_none() {
                    break;
                }
            }
        }
        if actions.is_empty() || self.rng.is_some() {
            match self.rendezvous(&looks, &mut actions) {
                Ok(()) => {}
                Err(o) => return StepResult::Terminal(o),
            }
        }
        if actions.is_empty() {
            return StepResult::Terminal(self.terminal(&looks));
        }
        let pick = match &mut self.rng {
            Some(rng) => rng.gen_range(0..actions.len()),
            None => 0,
        };
        let action = actions.swap_remove(pick);
        let mut looks: Vec<Option<ExprStep>> = looks.into_iter().map(Some).collect();
        self.steps += 1;
        let entry = match action {
            Action::Pure(i) => self.apply_pure(i, looks[i].take().expect("looked at")),
            Action::Com { sender, receiver } => {
                let s = looks[sender].take().expect("looked at");
                let r = looks[receiver].take().expect("looked at");
                self.apply_com(sender, s, receiver, r)
            }
        };
        self.collect_garbage();
        match self.check_aliasing() {
            Some(o) => StepResult::Terminal(o),
            None => StepResult::Stepped(entry),
        }
    }

    fn rendezvous(&self, looks: &[ExprStep], actions: &mut Vec<Action>) -> Result<(), Outcome> {
        for (i, a) in looks.iter().enumerate() {
            let ExprStep::NeedsRendezvous { chan: ca, dir: da, .. } = a else { continue };
            let Some(pa) = self.peer(*ca) else {
                return Err(Outcome::Stuck {
                    thread: self.threads[i].id,
                    reason: format!("endpoint #{} was never allocated", ca.0),
                });
            };
            for (j, b) in looks.iter().enumerate().skip(i + 1) {
                let ExprStep::NeedsRendezvous { chan: cb, dir: db, .. } = b else { continue };
                if cb == ca {
                    return Err(Outcome::Stuck {
                        thread: self.threads[j].id,
                        reason: format!("endpoint #{} is used by two threads", ca.0),
                    });
                }
                if *cb == pa && *db == da.opposite() {
                    let (sender, receiver) = if *da == Direction::Send { (i, j) } else { (j, i) };
                    actions.push(Action::Com { sender, receiver });
                    if self.rng.is_none() {
                        return Ok(());
                    }
                }
            }
        }
        Ok(())
    }

    fn terminal(&self, looks: &[ExprStep]) -> Outcome {
        let mut finished = Vec::new();
        let mut blocked = Vec::new();
        for (t, s) in self.threads.iter().zip(looks) {
            match s {
                ExprStep::Finished(Value::Var(x)) if self.globals.contains_key(x) => {
                    finished.push((t.id, self.globals[x].clone()))
                }
                ExprStep::Finished(v) => finished.push((t.id, v.clone())),
                ExprStep::NeedsRendezvous { chan, dir, .. } => {
                    blocked.push(Blocked { thread: t.id, chan: chan.0, dir: *dir })
                }
                _ => unreachable!("a runnable thread is never terminal"),
            }
        }
        if blocked.is_empty() {
            Outcome::AllFinished { values: finished }
        } else {
            Outcome::Deadlocked { blocked, finished }
        }
    }

    fn apply_pure(&mut self, i: usize, s: ExprStep) -> TraceEntry {
        let tid = self.threads[i].id;
        let entry = |step, rule, threads| TraceEntry { step, rule, threads };
        match s {
            ExprStep::Stepped(e, rule) => {
                self.threads[i].expr = e;
                entry(self.steps, rule, vec![tid])
            }
            ExprStep::Spawn { rest, child } => {
                self.threads[i].expr = rest;
                let id = self.next_thread;
                self.next_thread += 1;
                self.threads.push(Thread { id, expr: child });
                entry(self.steps, "Rl-Fork", vec![tid, id])
            }
            ExprStep::Alloc { session, ctx } => {
                let c = ChanId(self.next_chan);
                let d = ChanId(self.next_chan + 1);
                self.next_chan += 2;
                self.peers.insert(c, d);
                self.peers.insert(d, c);
                if let Ok(ds) = crate::ast::dual(&session) {
                    self.sessions.insert(d, ds);
                }
                self.sessions.insert(c, session);
                let pair = Value::Pair {
                    binder: Name::fresh("x"),
                    annot: None,
                    fst: Box::new(Value::Chan(c)),
                    snd: Box::new(Value::Chan(d)),
                };
                self.threads[i].expr = ctx.plug(Expr::Val(pair));
                entry(self.steps, "Rl-New", vec![tid])
            }
            _ => unreachable!("not a pure step"),
        }
    }

    fn apply_com(&mut self, si: usize, s: ExprStep, ri: usize, r: ExprStep) -> TraceEntry {
        let ExprStep::NeedsRendezvous { chan: c, payload: Some(v), ctx: sctx, .. } = s else { unreachable!() };
        let ExprStep::NeedsRendezvous { chan: d, ctx: rctx, .. } = r else { unreachable!() };
        self.advance(c, &v);
        self.advance(d, &v);
        self.threads[si].expr = sctx.plug(Expr::Val(Value::Chan(c)));
        let pair = Value::Pair { binder: Name::fresh("x"), annot: None, fst: Box::new(v), snd: Box::new(Value::Chan(d)) };
        self.threads[ri].expr = rctx.plug(Expr::Val(pair));
        TraceEntry { step: self.steps, rule: "Rl-Com", threads: vec![self.threads[si].id, self.threads[ri].id] }
    }

    /// Moves the recorded session type of `c` past one message carrying `v`.
    fn advance(&mut self, c: ChanId, v: &Value) {
        let Some(t) = self.sessions.remove(&c) else { return };
        let checker = Checker::new();
        if let Ok(Type::Send { binder, cont, .. } | Type::Recv { binder, cont, .. }) = checker.unfold(&TypeEnv::new(), &t) {
            self.sessions.insert(c, subst_type(&cont, &binder, v));
        }
    }

    /// Unit-valued threads other than `main` leave the soup.
    fn collect_garbage(&mut self) {
        self.threads.retain(|t| t.id == 0 || !matches!(t.expr, Expr::Val(Value::Unit)));
    }

    fn check_aliasing(&self) -> Option<Outcome> {
        let mut owner: BTreeMap<ChanId, usize> = BTreeMap::new();
        for t in &self.threads {
            let mut cs = BTreeSet::new();
            t.expr.channels(&mut cs);
            for c in cs {
                if let Some(o) = owner.insert(c, t.id) {
                    return Some(Outcome::Stuck {
                        thread: t.id,
                        reason: format!("endpoint #{} is referenced by threads {o} and {}", c.0, t.id),
                    });
                }
            }
        }
        None
    }

    /// Steps until a terminal outcome or until `max_steps` steps were taken.
    pub fn run(&mut self, max_steps: usize) -> Outcome {
        self.run_with(max_steps, |_, _| Ok::<(), ()>(())).unwrap_or_else(|_| unreachable!())
    }

    /// Like [`Config::run`], calling `observe` after every step.
    pub fn run_with<E>(
        &mut self,
        max_steps: usize,
        mut observe: impl FnMut(&Config, &TraceEntry) -> Result<(), E>,
    ) -> Result<Outcome, E> {
        loop {
            if self.steps >= max_steps {
                if let StepResult::Terminal(o) = self.clone().step() {
                    return Ok(o);
                }
                return Ok(Outcome::OutOfFuel { steps: self.steps });
            }
            match self.step() {
                StepResult::Stepped(entry) => observe(self, &entry)?,
                StepResult::Terminal(o) => return Ok(o),
            }
        }
    }
}

/// Runs a configuration to completion or until the step budget runs out.
pub fn run_config(cfg: &mut Config, max_steps: usize) -> Outcome {
    cfg.run(max_steps)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub max_steps: Option<usize>,
    pub seed: Option<u64>,
    pub trace: bool,
    /// Type-check every intermediate configuration.
    pub typed_replay: bool,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    pub steps: usize,
    pub trace: Vec<TraceEntry>,
    /// Number of configurations checked, or the first one that failed.
    pub replay: Option<Result<usize, ReplayError>>,
}

/// Evaluates `main` of a program.
pub fn run_program(prog: &Program, opts: &RunOptions) -> Result<RunResult, LoadError> {
    let mut cfg = Config::from_program(prog)?;
    if let Some(seed) = opts.seed {
        cfg = cfg.with_seed(seed);
    }
    let max = opts.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
    let mut trace = Vec::new();
    let mut checked = 0usize;
    let mut replay = if opts.typed_replay { Some(cfg.check_typed().map(|_| 1)) } else { None };
    let outcome = if matches!(replay, Some(Err(_))) {
        cfg.run(max)
    } else {
        let r = cfg.run_with(max, |c, e| {
            if opts.trace {
                trace.push(e.clone());
            }
            if opts.typed_replay {
                c.check_typed()?;
                checked += 1;
            }
            Ok::<(), ReplayError>(())
        });
        match r {
            Ok(o) => {
                if let Some(Ok(n)) = &mut replay {
                    *n += checked;
                }
                o
            }
            Err(e) => {
                replay = Some(Err(e));
                cfg.run(max)
            }
        }
    };
    Ok(RunResult { outcome, steps: cfg.steps(), trace, replay })
}
