//! Bidirectional typing for LSST with output environments.

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::ast::{Label, Multiplicity, Name};
use crate::checker::{CheckError, CheckMode, DefReport, ErrorCode, ErrorInfo, Report, Status};

use super::{lsst_dual, lsst_sub, LExpr, LType, LsstDef, LsstProgram};

type LResult<T> = Result<T, CheckError>;

/// A typing environment; linear entries disappear once used.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LEnv(Vec<(Name, LType)>);

impl LEnv {
    pub fn new() -> LEnv {
        LEnv::default()
    }

    pub fn bind(&self, x: Name, t: LType) -> LEnv {
        let mut v: Vec<_> = self.0.iter().filter(|(y, _)| *y != x).cloned().collect();
        v.push((x, t));
        LEnv(v)
    }

    pub fn lookup(&self, x: &Name) -> Option<&LType> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    fn remove(&self, x: &Name) -> LEnv {
        LEnv(self.0.iter().filter(|(y, _)| y != x).cloned().collect())
    }

    pub fn linear_names(&self) -> Vec<Name> {
        self.0.iter().filter(|(_, t)| t.mult() == Multiplicity::Lin).map(|(x, _)| x.clone()).collect()
    }
}

/// A checked program: `select` nodes carry the choice type they select
/// from, and every definition its type.
#[derive(Clone, Debug)]
pub struct TypedLsstProgram {
    pub program: LsstProgram,
    pub types: Vec<(Name, LType)>,
    pub report: Report,
}

impl TypedLsstProgram {
    pub fn is_ok(&self) -> bool {
        self.report.ok
    }
}

struct LChecker {
    stack: RefCell<Vec<&'static str>>,
}

struct Guard<'a>(&'a RefCell<Vec<&'static str>>);

impl Drop for Guard<'_> {
    fn drop(&mut self) {
        self.0.borrow_mut().pop();
    }
}

impl LChecker {
    fn rule(&self, name: &'static str) -> Guard<'_> {
        self.stack.borrow_mut().push(name);
        Guard(&self.stack)
    }

    fn err(&self, code: ErrorCode, message: impl Into<String>) -> CheckError {
        let mut trace = self.stack.borrow().clone();
        if trace.is_empty() {
            trace.push("check");
        }
        CheckError { code, message: message.into(), pos: None, trace }
    }

    fn not_sub(&self, a: &LType, b: &LType) -> CheckError {
        self.err(ErrorCode::NotASubtype, format!("{a} is not a subtype of {b}"))
    }

    fn consumed(&self, out: &LEnv, x: &Name, t: &LType) -> LResult<LEnv> {
        if t.mult() == Multiplicity::Lin && out.lookup(x).is_some() {
            return Err(self.err(ErrorCode::LinearityViolation, format!("linear variable `{x}` is not consumed")));
        }
        Ok(out.remove(x))
    }

    /// Binds `x` for the scope of a body and restores a shadowed binding.
    fn scoped(
        &self,
        g: &LEnv,
        binds: &[(&Name, &LType)],
        body: &LExpr,
        expected: Option<&LType>,
    ) -> LResult<(LType, LEnv, LExpr)> {
        let mut g1 = g.clone();
        for (x, t) in binds {
            if g.lookup(x).is_some_and(|t| t.mult() == Multiplicity::Lin) {
                return Err(self.err(
                    ErrorCode::LinearityViolation,
                    format!("binding `{x}` hides a linear variable that is still unused"),
                ));
            }
            g1 = g1.bind((*x).clone(), (*t).clone());
        }
        let (ty, mut out, body) = match expected {
            Some(e) => {
                let (out, body) = self.check(&g1, body, e)?;
                (e.clone(), out, body)
            }
            None => self.synth(&g1, body)?,
        };
        for (x, t) in binds {
            out = self.consumed(&out, x, t)?;
            if let Some(old) = g.lookup(x) {
                if old.mult() == Multiplicity::Un {
                    out = out.bind((*x).clone(), old.clone());
                }
            }
        }
        Ok((ty, out, body))
    }

    fn synth(&self, g: &LEnv, e: &LExpr) -> LResult<(LType, LEnv, LExpr)> {
        match e {
            LExpr::Var(x) => {
                let _r = self.rule("GV-Var");
                let t = g.lookup(x).ok_or_else(|| self.err(ErrorCode::UnboundName, format!("unbound name `{x}`")))?;
                let out = if t.mult() == Multiplicity::Lin { g.remove(x) } else { g.clone() };
                Ok((t.clone(), out, e.clone()))
            }
            LExpr::Chan(c) => {
                let x = Name::chan(*c);
                let t = g.lookup(&x).ok_or_else(|| self.err(ErrorCode::UnboundName, format!("unbound endpoint #{}", c.0)))?;
                Ok((t.clone(), g.remove(&x), e.clone()))
            }
            LExpr::Unit => Ok((LType::Unit, g.clone(), e.clone())),
            LExpr::Int(_) => Ok((LType::Int, g.clone(), e.clone())),
            LExpr::Lam { mult, binder, annot, body } => {
                let _r = self.rule("GV-Abs");
                let (b, out, body) = self.scoped(g, &[(binder, annot)], body, None)?;
                self.lambda_env(g, &out, *mult)?;
                let e = LExpr::Lam { mult: *mult, binder: binder.clone(), annot: annot.clone(), body: Box::new(body) };
                Ok((LType::fun(*mult, annot.clone(), b), out, e))
            }
            LExpr::App(f, a) => {
                if let LExpr::Select { label, .. } = &**f {
                    let _r = self.rule("GV-Select");
                    let (t, out, a) = self.synth(g, a)?;
                    let cont = self.select_branch(&t, label)?;
                    let f = LExpr::Select { label: label.clone(), annot: Some(t) };
                    return Ok((cont, out, LExpr::app(f, a)));
                }
                let _r = self.rule("GV-App");
                let (ft, t1, f) = self.synth(g, f)?;
                let LType::Fun { dom, cod, .. } = ft else {
                    return Err(self.err(ErrorCode::NotASubtype, format!("{ft} is not a function type")));
                };
                let (t2, a) = self.check(&t1, a, &dom)?;
                Ok((*cod, t2, LExpr::app(f, a)))
            }
            LExpr::Pair(a, b) => {
                let _r = self.rule("GV-Pair");
                let (ta, t1, a) = self.synth(g, a)?;
                let (tb, t2, b) = self.synth(&t1, b)?;
                Ok((LType::prod(ta, tb), t2, LExpr::Pair(Box::new(a), Box::new(b))))
            }
            LExpr::LetPair { .. } | LExpr::Let { .. } | LExpr::Rcase { .. } => self.elim(g, e, None),
            LExpr::Fork(m) => {
                let _r = self.rule("GV-Fork");
                let (out, m) = self.check(g, m, &LType::Unit)?;
                Ok((LType::Unit, out, LExpr::Fork(Box::new(m))))
            }
            LExpr::New(s) => {
                let _r = self.rule("GV-New");
                let d = lsst_dual(s).map_err(|e| self.err(ErrorCode::KindMismatch, e.to_string()))?;
                Ok((LType::prod(s.clone(), d), g.clone(), e.clone()))
            }
            LExpr::Send(m) => {
                let _r = self.rule("GV-Send");
                let (t, out, m) = self.synth(g, m)?;
                match t {
                    LType::Send(a, s) => Ok((LType::fun(Multiplicity::Lin, *a, *s), out, LExpr::Send(Box::new(m)))),
                    t => Err(self.err(ErrorCode::NotASubtype, format!("cannot send on a channel of type {t}"))),
                }
            }
            LExpr::Recv(m) => {
                let _r = self.rule("GV-Recv");
                let (t, out, m) = self.synth(g, m)?;
                match t {
                    LType::Recv(a, s) => Ok((LType::prod(*a, *s), out, LExpr::Recv(Box::new(m)))),
                    t => Err(self.err(ErrorCode::NotASubtype, format!("cannot receive on a channel of type {t}"))),
                }
            }
            LExpr::Select { label, annot: Some(t) } => {
                let _r = self.rule("GV-Select");
                let cont = self.select_branch(t, label)?;
                Ok((LType::fun(Multiplicity::Lin, t.clone(), cont), g.clone(), e.clone()))
            }
            LExpr::Select { label, annot: None } => Err(self.err(
                ErrorCode::NotASubtype,
                format!("cannot infer the choice type of `select {label}` without an argument"),
            )),
            LExpr::Close(m) | LExpr::Wait(m) => {
                let close = matches!(e, LExpr::Close(_));
                let _r = self.rule(if close { "GV-Close" } else { "GV-Wait" });
                let want = if close { LType::EndOut } else { LType::EndIn };
                let (out, m) = self.check(g, m, &want)?;
                let m = Box::new(m);
                Ok((LType::Unit, out, if close { LExpr::Close(m) } else { LExpr::Wait(m) }))
            }
            LExpr::Neg(m) => {
                let (out, m) = self.check(g, m, &LType::Int)?;
                Ok((LType::Int, out, LExpr::Neg(Box::new(m))))
            }
            LExpr::Add(a, b) => {
                let (t1, a) = self.check(g, a, &LType::Int)?;
                let (t2, b) = self.check(&t1, b, &LType::Int)?;
                Ok((LType::Int, t2, LExpr::Add(Box::new(a), Box::new(b))))
            }
        }
    }

    fn select_branch(&self, t: &LType, label: &Label) -> LResult<LType> {
        match t {
            LType::Select(br) => br
                .get(label)
                .cloned()
                .ok_or_else(|| self.err(ErrorCode::NotASubtype, format!("{t} offers no choice `{label}`"))),
            t => Err(self.err(ErrorCode::NotASubtype, format!("cannot select on a channel of type {t}"))),
        }
    }

    /// An unrestricted function must not capture linear bindings.
    fn lambda_env(&self, g: &LEnv, out: &LEnv, m: Multiplicity) -> LResult<()> {
        if m == Multiplicity::Un {
            if let Some(x) = g.linear_names().into_iter().find(|x| out.lookup(x).is_none()) {
                return Err(self.err(
                    ErrorCode::LinearityViolation,
                    format!("unrestricted function captures linear variable `{x}`"),
                ));
            }
        }
        Ok(())
    }

    /// Let, let-pair and rcase, in synthesis or checking mode.
    fn elim(&self, g: &LEnv, e: &LExpr, expected: Option<&LType>) -> LResult<(LType, LEnv, LExpr)> {
        match e {
            LExpr::Let { binder, bound, body } => {
                let _r = self.rule("GV-Let");
                let (a, t1, bound) = self.synth(g, bound)?;
                let (ty, out, body) = self.scoped(&t1, &[(binder, &a)], body, expected)?;
                Ok((ty, out, LExpr::Let { binder: binder.clone(), bound: Box::new(bound), body: Box::new(body) }))
            }
            LExpr::LetPair { fst, snd, bound, body } => {
                let _r = self.rule("GV-LetPair");
                let (t, t1, bound) = self.synth(g, bound)?;
                let LType::Prod(a, b) = t else {
                    return Err(self.err(ErrorCode::NotASubtype, format!("cannot destructure a value of type {t}")));
                };
                if fst == snd && !fst.is_wildcard() {
                    return Err(self.err(ErrorCode::LinearityViolation, format!("`{fst}` is bound twice")));
                }
                let (ty, out, body) = self.scoped(&t1, &[(fst, &a), (snd, &b)], body, expected)?;
                let e = LExpr::LetPair { fst: fst.clone(), snd: snd.clone(), bound: Box::new(bound), body: Box::new(body) };
                Ok((ty, out, e))
            }
            LExpr::Rcase { scrutinee, branches } => {
                let _r = self.rule("GV-Rcase");
                let (t, t1, scrutinee) = self.synth(g, scrutinee)?;
                let LType::Branch(offered) = &t else {
                    return Err(self.err(ErrorCode::NotASubtype, format!("cannot branch on a channel of type {t}")));
                };
                let mut results: Vec<(Label, LType, LEnv)> = Vec::new();
                let mut new_branches = BTreeMap::new();
                for (l, s) in offered {
                    let (x, body) = branches
                        .get(l)
                        .ok_or_else(|| self.err(ErrorCode::NotASubtype, format!("rcase has no branch for `{l}`")))?;
                    let (ty, out, body) = self.scoped(&t1, &[(x, s)], body, expected)?;
                    results.push((l.clone(), ty, out));
                    new_branches.insert(l.clone(), (x.clone(), body));
                }
                // Branches the channel never offers are kept unchecked.
                for (l, b) in branches {
                    new_branches.entry(l.clone()).or_insert_with(|| b.clone());
                }
                let (l0, _, out0) = &results[0];
                for (l, _, out) in &results[1..] {
                    if out != out0 {
                        return Err(self.err(
                            ErrorCode::BranchEnvMismatch,
                            format!("branches `{l0}` and `{l}` consume different resources"),
                        ));
                    }
                }
                let ty = match expected {
                    Some(t) => t.clone(),
                    None => {
                        let tys: Vec<&LType> = results.iter().map(|(_, t, _)| t).collect();
                        tys.iter()
                            .find(|c| tys.iter().all(|t| lsst_sub(t, c)))
                            .map(|t| (*t).clone())
                            .ok_or_else(|| self.err(ErrorCode::NotASubtype, "rcase branches have no common type"))?
                    }
                };
                let e = LExpr::Rcase { scrutinee: Box::new(scrutinee), branches: new_branches };
                Ok((ty, out0.clone(), e))
            }
            _ => unreachable!("not an eliminator"),
        }
    }

    fn check(&self, g: &LEnv, e: &LExpr, t: &LType) -> LResult<(LEnv, LExpr)> {
        match (e, t) {
            (LExpr::Lam { mult, binder, annot, body }, LType::Fun { mult: n, dom, cod }) => {
                let _r = self.rule("GV-Abs");
                if !mult.leq(*n) {
                    return Err(self.err(ErrorCode::NotASubtype, format!("{mult} function where {n} expected")));
                }
                if !lsst_sub(dom, annot) {
                    return Err(self.not_sub(dom, annot));
                }
                let (_, out, body) = self.scoped(g, &[(binder, annot)], body, Some(cod))?;
                self.lambda_env(g, &out, *mult)?;
                Ok((out, LExpr::Lam { mult: *mult, binder: binder.clone(), annot: annot.clone(), body: Box::new(body) }))
            }
            (LExpr::Select { label, annot: None }, LType::Fun { dom, cod, .. }) => {
                let _r = self.rule("GV-Select");
                let cont = self.select_branch(dom, label)?;
                if !lsst_sub(&cont, cod) {
                    return Err(self.not_sub(&cont, cod));
                }
                Ok((g.clone(), LExpr::Select { label: label.clone(), annot: Some((**dom).clone()) }))
            }
            (LExpr::Let { .. } | LExpr::LetPair { .. } | LExpr::Rcase { .. }, _) => {
                let (_, out, e) = self.elim(g, e, Some(t))?;
                Ok((out, e))
            }
            _ => {
                let _r = self.rule("GV-Sub");
                let (s, out, e) = self.synth(g, e)?;
                if lsst_sub(&s, t) {
                    Ok((out, e))
                } else {
                    Err(self.not_sub(&s, t))
                }
            }
        }
    }

    fn check_def(&self, env: &LEnv, d: &LsstDef) -> LResult<(LType, LExpr)> {
        self.stack.borrow_mut().clear();
        let (t, out, body) = match &d.declared {
            Some(t) => {
                if t.mult() == Multiplicity::Lin {
                    return Err(self.err(
                        ErrorCode::LinearityViolation,
                        format!("global `{}` must have an unrestricted type", d.name),
                    ));
                }
                let (out, body) = self.check(env, &d.body, t)?;
                (t.clone(), out, body)
            }
            None => {
                let (t, out, body) = self.synth(env, &d.body)?;
                if t.mult() == Multiplicity::Lin {
                    return Err(self.err(
                        ErrorCode::LinearityViolation,
                        format!("global `{}` has linear type {t}", d.name),
                    ));
                }
                (t, out, body)
            }
        };
        debug_assert!(out.linear_names().is_empty());
        Ok((t, body))
    }
}

/// Checks every definition and `main`, recording the choice type at each
/// `select`.
pub fn lsst_type_check(prog: &LsstProgram, mode: CheckMode) -> TypedLsstProgram {
    let c = LChecker { stack: RefCell::new(Vec::new()) };
    let mut env = LEnv::new();
    let mut report = Report { ok: true, defs: Vec::new() };
    let mut out = LsstProgram { type_defs: prog.type_defs.clone(), defs: Vec::new(), main: None };
    let mut types = Vec::new();
    let mut stop = false;
    let n = prog.defs.len();
    for (i, d) in prog.defs.iter().chain(prog.main.iter()).enumerate() {
        let name = d.name.to_string();
        let mut typed = d.clone();
        if stop {
            report.defs.push(DefReport { name, status: Status::Skipped, ty: None, error: None });
        } else {
            match c.check_def(&env, d) {
                Ok((t, body)) => {
                    report.defs.push(DefReport { name, status: Status::Ok, ty: Some(t.to_string()), error: None });
                    typed.body = body;
                    env = env.bind(d.name.clone(), t.clone());
                    types.push((d.name.clone(), t));
                }
                Err(e) => {
                    let e = e.at(d.pos);
                    report.ok = false;
                    report.defs.push(DefReport {
                        name,
                        status: Status::Failed,
                        ty: d.declared.as_ref().map(|t| t.to_string()),
                        error: Some(ErrorInfo::from(&e)),
                    });
                    if let Some(t) = &d.declared {
                        env = env.bind(d.name.clone(), t.clone());
                    }
                    stop = mode == CheckMode::FirstError;
                }
            }
        }
        if i < n {
            out.defs.push(typed);
        } else {
            out.main = Some(typed);
        }
    }
    TypedLsstProgram { program: out, types, report }
}

/// Checks a closed LSST expression under `env`, for tests and the simulator.
pub fn lsst_synth(env: &LEnv, e: &LExpr) -> Result<(LType, LExpr), CheckError> {
    let c = LChecker { stack: RefCell::new(Vec::new()) };
    let (t, out, e) = c.synth(env, e)?;
    match out.linear_names().first() {
        Some(x) => Err(c.err(ErrorCode::LinearityViolation, format!("`{x}` is never used"))),
        None => Ok((t, e)),
    }
}
