//! Synchronous reduction of LSST configurations.
//!
//! The scheduler mirrors the LDGV one: threads live in a flat soup, the
//! first thread with a local redex moves, and otherwise the least pair of
//! threads ready to synchronise on peer endpoints does.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{ChanId, Label, Name};
use crate::eval::{Direction, TraceEntry, DEFAULT_MAX_STEPS};

use super::subst::subst_lexpr;
use super::{LExpr, LsstProgram};

#[derive(Clone, Debug)]
pub struct LThread {
    pub id: usize,
    pub expr: LExpr,
}

#[derive(Clone, Debug)]
enum Frame {
    AppFun(LExpr),
    AppArg(LExpr),
    PairFst(LExpr),
    PairSnd(LExpr),
    Let(Name, LExpr),
    LetPair(Name, Name, LExpr),
    Send,
    Recv,
    Rcase(BTreeMap<Label, (Name, LExpr)>),
    Close,
    Wait,
    Neg,
    AddL(LExpr),
    AddR(LExpr),
}

#[derive(Clone, Debug)]
struct Ctx(Vec<Frame>);

impl Ctx {
    fn plug(self, hole: LExpr) -> LExpr {
        self.0.into_iter().rev().fold(hole, |e, f| {
            let b = Box::new(e);
            match f {
                Frame::AppFun(a) => LExpr::App(b, Box::new(a)),
                Frame::AppArg(g) => LExpr::App(Box::new(g), b),
                Frame::PairFst(n) => LExpr::Pair(b, Box::new(n)),
                Frame::PairSnd(v) => LExpr::Pair(Box::new(v), b),
                Frame::Let(binder, body) => LExpr::Let { binder, bound: b, body: Box::new(body) },
                Frame::LetPair(fst, snd, body) => LExpr::LetPair { fst, snd, bound: b, body: Box::new(body) },
                Frame::Send => LExpr::Send(b),
                Frame::Recv => LExpr::Recv(b),
                Frame::Rcase(branches) => LExpr::Rcase { scrutinee: b, branches },
                Frame::Close => LExpr::Close(b),
                Frame::Wait => LExpr::Wait(b),
                Frame::Neg => LExpr::Neg(b),
                Frame::AddL(n) => LExpr::Add(b, Box::new(n)),
                Frame::AddR(v) => LExpr::Add(Box::new(v), b),
            }
        })
    }
}

/// What a thread offers on an endpoint.
#[derive(Clone, Debug)]
enum Offer {
    Send(LExpr),
    Recv,
    Select(Label),
    Rcase(BTreeMap<Label, (Name, LExpr)>),
    Close,
    Wait,
}

impl Offer {
    fn direction(&self) -> Direction {
        match self {
            Offer::Send(_) | Offer::Select(_) | Offer::Close => Direction::Send,
            Offer::Recv | Offer::Rcase(_) | Offer::Wait => Direction::Recv,
        }
    }
}

#[derive(Clone, Debug)]
enum Look {
    Stepped(LExpr, &'static str),
    Spawn { rest: LExpr, child: LExpr },
    Alloc(Ctx),
    Ready { chan: ChanId, offer: Offer, ctx: Ctx },
    Finished(LExpr),
    Stuck(String),
}

/// Splits `e` into an evaluation context and its redex, or returns the value.
fn decompose(mut e: LExpr) -> Result<LExpr, (Ctx, LExpr)> {
    let mut frames = Vec::new();
    loop {
        if e.is_value() {
            if frames.is_empty() {
                return Ok(e);
            }
            unreachable!("a value is never put in focus below a frame");
        }
        e = match e {
            LExpr::App(f, a) if !f.is_value() => {
                frames.push(Frame::AppFun(*a));
                *f
            }
            LExpr::App(f, a) if !a.is_value() => {
                frames.push(Frame::AppArg(*f));
                *a
            }
            LExpr::Pair(a, b) if !a.is_value() => {
                frames.push(Frame::PairFst(*b));
                *a
            }
            LExpr::Pair(a, b) => {
                frames.push(Frame::PairSnd(*a));
                *b
            }
            LExpr::Let { binder, bound, body } if !bound.is_value() => {
                frames.push(Frame::Let(binder, *body));
                *bound
            }
            LExpr::LetPair { fst, snd, bound, body } if !bound.is_value() => {
                frames.push(Frame::LetPair(fst, snd, *body));
                *bound
            }
            LExpr::Send(m) => {
                frames.push(Frame::Send);
                *m
            }
            LExpr::Recv(m) if !m.is_value() => {
                frames.push(Frame::Recv);
                *m
            }
            LExpr::Rcase { scrutinee, branches } if !scrutinee.is_value() => {
                frames.push(Frame::Rcase(branches));
                *scrutinee
            }
            LExpr::Close(m) if !m.is_value() => {
                frames.push(Frame::Close);
                *m
            }
            LExpr::Wait(m) if !m.is_value() => {
                frames.push(Frame::Wait);
                *m
            }
            LExpr::Neg(m) if !m.is_value() => {
                frames.push(Frame::Neg);
                *m
            }
            LExpr::Add(a, b) if !a.is_value() => {
                frames.push(Frame::AddL(*b));
                *a
            }
            LExpr::Add(a, b) if !b.is_value() => {
                frames.push(Frame::AddR(*a));
                *b
            }
            redex => return Err((Ctx(frames), redex)),
        };
    }
}

pub type LGlobals = BTreeMap<Name, LExpr>;

/// Renames both binders apart before substituting, so that the two
/// substitutions cannot interfere.
fn subst_pair(body: &LExpr, fst: &Name, snd: &Name, v: &LExpr, w: &LExpr) -> LExpr {
    let y = Name::fresh(snd.as_str());
    let body = if snd.is_wildcard() { body.clone() } else { subst_lexpr(body, snd, &LExpr::Var(y.clone())) };
    let body = if fst.is_wildcard() { body } else { subst_lexpr(&body, fst, v) };
    if snd.is_wildcard() {
        body
    } else {
        subst_lexpr(&body, &y, w)
    }
}

fn look(e: &LExpr, globals: &LGlobals) -> Look {
    let (ctx, redex) = match decompose(e.clone()) {
        Ok(v) => return Look::Finished(v),
        Err(split) => split,
    };
    let get = |v: LExpr| match v {
        LExpr::Var(x) if globals.contains_key(&x) => globals[&x].clone(),
        v => v,
    };
    let chan = |v: LExpr, what: &str| match get(v) {
        LExpr::Chan(c) => Ok(c),
        v => Err(Look::Stuck(format!("{what} on a non-channel `{v}`"))),
    };
    let ready = |m: LExpr, what: &str, offer: Offer, ctx: Ctx| match chan(m, what) {
        Ok(chan) => Look::Ready { chan, offer, ctx },
        Err(s) => s,
    };
    match redex {
        LExpr::App(f, a) => match get(*f) {
            LExpr::Lam { binder, body, .. } => Look::Stepped(ctx.plug(subst_lexpr(&body, &binder, &a)), "Rl-Betav"),
            LExpr::Select { label, .. } => ready(*a, "select", Offer::Select(label), ctx),
            LExpr::Send(c) => ready(*c, "send", Offer::Send(*a), ctx),
            f => Look::Stuck(format!("`{f}` applied to `{a}`")),
        },
        LExpr::Let { binder, bound, body } => Look::Stepped(ctx.plug(subst_lexpr(&body, &binder, &bound)), "Rl-Let"),
        LExpr::LetPair { fst, snd, bound, body } => match get(*bound) {
            LExpr::Pair(v, w) => Look::Stepped(ctx.plug(subst_pair(&body, &fst, &snd, &v, &w)), "Rl-Prod-Elim"),
            v => Look::Stuck(format!("pair pattern against `{v}`")),
        },
        LExpr::Recv(m) => ready(*m, "recv", Offer::Recv, ctx),
        LExpr::Rcase { scrutinee, branches } => ready(*scrutinee, "rcase", Offer::Rcase(branches), ctx),
        LExpr::Close(m) => ready(*m, "close", Offer::Close, ctx),
        LExpr::Wait(m) => ready(*m, "wait", Offer::Wait, ctx),
        LExpr::Neg(m) => match get(*m) {
            LExpr::Int(n) => Look::Stepped(ctx.plug(LExpr::Int(n.wrapping_neg())), "Rl-Neg"),
            v => Look::Stuck(format!("negation of `{v}`")),
        },
        LExpr::Add(a, b) => match (get(*a), get(*b)) {
            (LExpr::Int(n), LExpr::Int(k)) => Look::Stepped(ctx.plug(LExpr::Int(n.wrapping_add(k))), "Rl-Add"),
            (a, b) => Look::Stuck(format!("addition of `{a}` and `{b}`")),
        },
        LExpr::Fork(m) => Look::Spawn { rest: ctx.plug(LExpr::Unit), child: *m },
        LExpr::New(_) => Look::Alloc(ctx),
        e => Look::Stuck(format!("no rule applies to `{e}`")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LBlocked {
    pub thread: usize,
    pub chan: u32,
    pub dir: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LOutcome {
    AllFinished { values: Vec<(usize, LExpr)> },
    Deadlocked { blocked: Vec<LBlocked>, finished: Vec<(usize, LExpr)> },
    Stuck { thread: usize, reason: String },
    OutOfFuel { steps: usize },
}

impl LOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            LOutcome::AllFinished { .. } => "all_finished",
            LOutcome::Deadlocked { .. } => "deadlocked",
            LOutcome::Stuck { .. } => "stuck",
            LOutcome::OutOfFuel { .. } => "out_of_fuel",
        }
    }

    pub fn main_value(&self) -> Option<&LExpr> {
        match self {
            LOutcome::AllFinished { values } | LOutcome::Deadlocked { finished: values, .. } => {
                values.iter().find(|(t, _)| *t == 0).map(|(_, v)| v)
            }
            _ => None,
        }
    }
}

impl fmt::Display for LOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LOutcome::AllFinished { values } => {
                write!(f, "all threads finished")?;
                for (t, v) in values {
                    write!(f, "\n  thread {t}: {v}")?;
                }
                Ok(())
            }
            LOutcome::Deadlocked { blocked, finished } => {
                write!(f, "deadlocked")?;
                for (t, v) in finished {
                    write!(f, "\n  thread {t}: {v}")?;
                }
                for b in blocked {
                    let dir = if b.dir == Direction::Send { "send" } else { "recv" };
                    write!(f, "\n  thread {}: blocked on {dir} #{}", b.thread, b.chan)?;
                }
                Ok(())
            }
            LOutcome::Stuck { thread, reason } => write!(f, "thread {thread} is stuck: {reason}"),
            LOutcome::OutOfFuel { steps } => write!(f, "out of fuel after {steps} steps"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LStepResult {
    Stepped(TraceEntry),
    Terminal(LOutcome),
}

#[derive(Clone, Debug)]
pub struct LConfig {
    threads: Vec<LThread>,
    peers: BTreeMap<ChanId, ChanId>,
    next_chan: u32,
    next_thread: usize,
    steps: usize,
    globals: LGlobals,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LLoadError {
    #[error("program has no `main`")]
    NoMain,
    #[error("global `{0}` did not evaluate to a value: {1}")]
    Global(Name, LOutcome),
}

impl LConfig {
    pub fn new(main: LExpr) -> LConfig {
        LConfig {
            threads: vec![LThread { id: 0, expr: main }],
            peers: BTreeMap::new(),
            next_chan: 0,
            next_thread: 1,
            steps: 0,
            globals: LGlobals::new(),
        }
    }

    /// Loads a program the same way as the LDGV evaluator: definitions
    /// become named values and `main` is thread 0.
    pub fn from_program(prog: &LsstProgram) -> Result<LConfig, LLoadError> {
        let main = prog.main.as_ref().ok_or(LLoadError::NoMain)?;
        let mut globals = LGlobals::new();
        for d in &prog.defs {
            let v = if d.body.is_value() {
                d.body.clone()
            } else {
                let mut cfg = LConfig { globals: globals.clone(), ..LConfig::new(d.body.clone()) };
                match cfg.run(DEFAULT_MAX_STEPS) {
                    LOutcome::AllFinished { values } if values.len() == 1 => values[0].1.clone(),
                    o => return Err(LLoadError::Global(d.name.clone(), o)),
                }
            };
            globals.insert(d.name.clone(), v);
        }
        Ok(LConfig { globals, ..LConfig::new(main.body.clone()) })
    }

    pub fn threads(&self) -> &[LThread] {
        &self.threads
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self) -> LStepResult {
        let looks: Vec<Look> = self.threads.iter().map(|t| look(&t.expr, &self.globals)).collect();
        if let Some((i, Look::Stuck(reason))) = looks.iter().enumerate().find(|(_, l)| matches!(l, Look::Stuck(_))) {
            return LStepResult::Terminal(LOutcome::Stuck { thread: self.threads[i].id, reason: reason.clone() });
        }
        let mut looks: Vec<Option<Look>> = looks.into_iter().map(Some).collect();
        let pure = looks.iter().position(|l| matches!(l, Some(Look::Stepped(..) | Look::Spawn { .. } | Look::Alloc(_))));
        let entry = if let Some(i) = pure {
            self.steps += 1;
            let tid = self.threads[i].id;
            match looks[i].take().expect("looked at") {
                Look::Stepped(e, rule) => {
                    self.threads[i].expr = e;
                    TraceEntry { step: self.steps, rule, threads: vec![tid] }
                }
                Look::Spawn { rest, child } => {
                    self.threads[i].expr = rest;
                    let id = self.next_thread;
                    self.next_thread += 1;
                    self.threads.push(LThread { id, expr: child });
                    TraceEntry { step: self.steps, rule: "Rl-Fork", threads: vec![tid, id] }
                }
                Look::Alloc(ctx) => {
                    let c = ChanId(self.next_chan);
                    let d = ChanId(self.next_chan + 1);
                    self.next_chan += 2;
                    self.peers.insert(c, d);
                    self.peers.insert(d, c);
                    self.threads[i].expr = ctx.plug(LExpr::Pair(Box::new(LExpr::Chan(c)), Box::new(LExpr::Chan(d))));
                    TraceEntry { step: self.steps, rule: "Rl-New", threads: vec![tid] }
                }
                _ => unreachable!("not a local step"),
            }
        } else {
            match self.rendezvous(&looks) {
                Err(o) => return LStepResult::Terminal(o),
                Ok(None) => return LStepResult::Terminal(self.terminal(looks)),
                Ok(Some((i, j))) => {
                    self.steps += 1;
                    let a = looks[i].take().expect("looked at");
                    let b = looks[j].take().expect("looked at");
                    match self.synchronise(i, a, j, b) {
                        Ok(entry) => entry,
                        Err(o) => return LStepResult::Terminal(o),
                    }
                }
            }
        };
        self.threads.retain(|t| t.id == 0 || t.expr != LExpr::Unit);
        LStepResult::Stepped(entry)
    }

    fn rendezvous(&self, looks: &[Option<Look>]) -> Result<Option<(usize, usize)>, LOutcome> {
        for (i, a) in looks.iter().enumerate() {
            let Some(Look::Ready { chan: ca, offer: oa, .. }) = a else { continue };
            let Some(pa) = self.peers.get(ca) else {
                return Err(LOutcome::Stuck {
                    thread: self.threads[i].id,
                    reason: format!("endpoint #{} was never allocated", ca.0),
                });
            };
            for (j, b) in looks.iter().enumerate().skip(i + 1) {
                let Some(Look::Ready { chan: cb, offer: ob, .. }) = b else { continue };
                if cb == ca {
                    return Err(LOutcome::Stuck {
                        thread: self.threads[j].id,
                        reason: format!("endpoint #{} is used by two threads", ca.0),
                    });
                }
                if cb == pa && ob.direction() == oa.direction().opposite() {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    fn synchronise(&mut self, i: usize, a: Look, j: usize, b: Look) -> Result<TraceEntry, LOutcome> {
        let (Look::Ready { chan: ca, offer: oa, ctx: ka }, Look::Ready { chan: cb, offer: ob, ctx: kb }) = (a, b) else {
            unreachable!("both threads are ready")
        };
        let ids = vec![self.threads[i].id, self.threads[j].id];
        let (si, sc, so, sk, ri, rc, ro, rk) = if oa.direction() == Direction::Send {
            (i, ca, oa, ka, j, cb, ob, kb)
        } else {
            (j, cb, ob, kb, i, ca, oa, ka)
        };
        let ids = if si == i { ids } else { vec![ids[1], ids[0]] };
        let mismatch = |what: String| LOutcome::Stuck { thread: self.threads[ri].id, reason: what };
        let rule = match (so, ro) {
            (Offer::Send(v), Offer::Recv) => {
                self.threads[si].expr = sk.plug(LExpr::Chan(sc));
                self.threads[ri].expr = rk.plug(LExpr::Pair(Box::new(v), Box::new(LExpr::Chan(rc))));
                "Rl-Com"
            }
            (Offer::Select(l), Offer::Rcase(mut branches)) => {
                let Some((x, body)) = branches.remove(&l) else {
                    return Err(mismatch(format!("no branch for label {l}")));
                };
                self.threads[si].expr = sk.plug(LExpr::Chan(sc));
                self.threads[ri].expr = rk.plug(subst_lexpr(&body, &x, &LExpr::Chan(rc)));
                "Rl-Branch"
            }
            (Offer::Close, Offer::Wait) => {
                self.threads[si].expr = sk.plug(LExpr::Unit);
                self.threads[ri].expr = rk.plug(LExpr::Unit);
                "Rl-Close"
            }
            (s, r) => return Err(mismatch(format!("protocol mismatch between {s:?} and {r:?}"))),
        };
        Ok(TraceEntry { step: self.steps, rule, threads: ids })
    }

    fn terminal(&self, looks: Vec<Option<Look>>) -> LOutcome {
        let mut finished = Vec::new();
        let mut blocked = Vec::new();
        for (t, l) in self.threads.iter().zip(looks) {
            match l {
                Some(Look::Finished(LExpr::Var(x))) if self.globals.contains_key(&x) => {
                    finished.push((t.id, self.globals[&x].clone()))
                }
                Some(Look::Finished(v)) => finished.push((t.id, v)),
                Some(Look::Ready { chan, offer, .. }) => {
                    blocked.push(LBlocked { thread: t.id, chan: chan.0, dir: offer.direction() })
                }
                _ => unreachable!("a runnable thread is never terminal"),
            }
        }
        if blocked.is_empty() {
            LOutcome::AllFinished { values: finished }
        } else {
            LOutcome::Deadlocked { blocked, finished }
        }
    }

    pub fn run(&mut self, max_steps: usize) -> LOutcome {
        loop {
            if self.steps >= max_steps {
                if let LStepResult::Terminal(o) = self.clone().step() {
                    return o;
                }
                return LOutcome::OutOfFuel { steps: self.steps };
            }
            if let LStepResult::Terminal(o) = self.step() {
                return o;
            }
        }
    }
}

/// Performs one scheduler step on an LSST configuration.
pub fn lsst_step(cfg: &mut LConfig) -> LStepResult {
    cfg.step()
}
