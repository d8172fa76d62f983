use std::collections::BTreeMap;

use serde::Serialize;

use crate::ast::{rename_expr, subst_expr, subst_value, ChanId, Expr, Name, Type, Value};

/// Which side of a rendezvous a blocked thread waits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Send,
    Recv,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Send => Direction::Recv,
            Direction::Recv => Direction::Send,
        }
    }
}

/// One evaluation frame; a context is a stack of them, outermost first.
#[derive(Clone, Debug)]
enum Frame {
    AppFun(Expr),
    AppArg(Value),
    Send,
    Recv,
    Neg,
    AddL(Expr),
    AddR(Value),
    Let(Name, Expr),
    LetPair(Name, Name, Expr),
    PairSnd(Name, Option<Box<Type>>, Value),
}

/// The evaluation context around a redex.
#[derive(Clone, Debug, Default)]
pub struct Ctx(Vec<Frame>);

impl Ctx {
    pub fn plug(self, hole: Expr) -> Expr {
        self.0.into_iter().rev().fold(hole, |e, f| match f {
            Frame::AppFun(a) => Expr::app(e, a),
            Frame::AppArg(v) => Expr::app(Expr::Val(v), e),
            Frame::Send => Expr::Send(Box::new(e)),
            Frame::Recv => Expr::Recv(Box::new(e)),
            Frame::Neg => Expr::Neg(Box::new(e)),
            Frame::AddL(b) => Expr::Add(Box::new(e), Box::new(b)),
            Frame::AddR(v) => Expr::Add(Box::new(Expr::Val(v)), Box::new(e)),
            Frame::Let(x, body) => Expr::Let { binder: x, bound: Box::new(e), body: Box::new(body) },
            Frame::LetPair(x, y, body) => Expr::LetPair { fst: x, snd: y, bound: Box::new(e), body: Box::new(body) },
            Frame::PairSnd(binder, annot, fst) => Expr::Pair { binder, annot, fst, snd: Box::new(e) },
        })
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

/// The result of looking at a single thread.
#[derive(Clone, Debug)]
pub enum ExprStep {
    /// A pure reduction happened.
    Stepped(Expr, &'static str),
    /// `fork M`: the thread continues with `rest`, `child` becomes a new thread.
    Spawn { rest: Expr, child: Expr },
    /// `new S`: the scheduler allocates two endpoints and plugs the pair.
    Alloc { session: Type, ctx: Ctx },
    NeedsRendezvous { chan: ChanId, dir: Direction, payload: Option<Value>, ctx: Ctx },
    Finished(Value),
    Stuck(String),
}

/// Splits `e` into a value, or an evaluation context and the redex in its hole.
fn focus(e: Expr, fr: &mut Vec<Frame>) -> Result<Value, Expr> {
    match e {
        Expr::Val(v) => Ok(v),
        Expr::App(f, a) => {
            fr.push(Frame::AppFun(*a));
            let vf = focus(*f, fr)?;
            let Some(Frame::AppFun(a)) = fr.pop() else { unreachable!() };
            fr.push(Frame::AppArg(vf));
            let va = focus(a, fr)?;
            let Some(Frame::AppArg(vf)) = fr.pop() else { unreachable!() };
            Err(Expr::app(Expr::Val(vf), Expr::Val(va)))
        }
        Expr::Send(m) => {
            fr.push(Frame::Send);
            let v = focus(*m, fr)?;
            fr.pop();
            Ok(Value::SendPartial(Box::new(v)))
        }
        Expr::Recv(m) => {
            fr.push(Frame::Recv);
            let v = focus(*m, fr)?;
            fr.pop();
            Err(Expr::Recv(Box::new(Expr::Val(v))))
        }
        Expr::Neg(m) => {
            fr.push(Frame::Neg);
            let v = focus(*m, fr)?;
            fr.pop();
            Err(Expr::Neg(Box::new(Expr::Val(v))))
        }
        Expr::Add(a, b) => {
            fr.push(Frame::AddL(*b));
            let va = focus(*a, fr)?;
            let Some(Frame::AddL(b)) = fr.pop() else { unreachable!() };
            fr.push(Frame::AddR(va));
            let vb = focus(b, fr)?;
            let Some(Frame::AddR(va)) = fr.pop() else { unreachable!() };
            Err(Expr::Add(Box::new(Expr::Val(va)), Box::new(Expr::Val(vb))))
        }
        Expr::Let { binder, bound, body } => {
            fr.push(Frame::Let(binder, *body));
            let v = focus(*bound, fr)?;
            let Some(Frame::Let(binder, body)) = fr.pop() else { unreachable!() };
            Err(Expr::Let { binder, bound: Box::new(Expr::Val(v)), body: Box::new(body) })
        }
        Expr::LetPair { fst, snd, bound, body } => {
            fr.push(Frame::LetPair(fst, snd, *body));
            let v = focus(*bound, fr)?;
            let Some(Frame::LetPair(fst, snd, body)) = fr.pop() else { unreachable!() };
            Err(Expr::LetPair { fst, snd, bound: Box::new(Expr::Val(v)), body: Box::new(body) })
        }
        Expr::Pair { binder, annot, fst, snd } => {
            fr.push(Frame::PairSnd(binder, annot, fst));
            let w = focus(*snd, fr)?;
            let Some(Frame::PairSnd(binder, annot, fst)) = fr.pop() else { unreachable!() };
            Ok(Value::Pair { binder, annot, fst: Box::new(fst), snd: Box::new(w) })
        }
        e @ (Expr::Case(..) | Expr::NatRec { .. } | Expr::Fork(_) | Expr::New(_)) => Err(e),
    }
}

fn shape(v: &Value) -> &'static str {
    match v {
        Value::Var(_) => "a free name",
        Value::Chan(_) => "a channel",
        Value::Label(_) => "a label",
        Value::Unit => "unit",
        Value::Int(_) => "an integer",
        Value::Zero | Value::Succ(_) => "a natural number",
        Value::Lam { .. } => "a function",
        Value::Pair { .. } => "a pair",
        Value::SendPartial(_) => "a partial send",
    }
}

/// The value in an operand position of a redex.
fn arg(e: Expr) -> Value {
    match e {
        Expr::Val(v) => v,
        _ => unreachable!("redex operands are values"),
    }
}

fn wrong(what: &str, v: &Value) -> ExprStep {
    ExprStep::Stuck(format!("{what} applied to {} `{v}`", shape(v)))
}

/// Values of the global definitions, looked up when a global is eliminated.
pub type Globals = BTreeMap<Name, Value>;

/// Performs at most one small step of a closed thread.
pub fn step_expr(e: &Expr) -> ExprStep {
    step_expr_in(e, &Globals::new())
}

/// Performs at most one small step; free names refer to `globals`.
pub fn step_expr_in(e: &Expr, globals: &Globals) -> ExprStep {
    let mut fr = Vec::new();
    let redex = match focus(e.clone(), &mut fr) {
        Ok(v) => return ExprStep::Finished(v),
        Err(r) => r,
    };
    let get = |v: Value| match v {
        Value::Var(x) => globals.get(&x).cloned().unwrap_or(Value::Var(x)),
        v => v,
    };
    let ctx = Ctx(fr);
    let pure = |ctx: Ctx, e: Expr, rule| ExprStep::Stepped(ctx.plug(e), rule);
    match redex {
        Expr::App(f, a) => {
            let a = arg(*a);
            match get(arg(*f)) {
                Value::Lam { binder, body, .. } => pure(ctx, subst_expr(&body, &binder, &a), "Rl-Betav"),
                Value::SendPartial(c) => match *c {
                    Value::Chan(chan) => {
                        ExprStep::NeedsRendezvous { chan, dir: Direction::Send, payload: Some(a), ctx }
                    }
                    c => wrong("send", &c),
                },
                f => wrong("application", &f),
            }
        }
        Expr::Recv(m) => match arg(*m) {
            Value::Chan(chan) => ExprStep::NeedsRendezvous { chan, dir: Direction::Recv, payload: None, ctx },
            v => wrong("recv", &v),
        },
        Expr::Neg(m) => match get(arg(*m)) {
            Value::Int(n) => pure(ctx, Expr::Val(Value::Int(n.wrapping_neg())), "Rl-Neg"),
            v => wrong("negation", &v),
        },
        Expr::Add(a, b) => match (get(arg(*a)), get(arg(*b))) {
            (Value::Int(a), Value::Int(b)) => pure(ctx, Expr::Val(Value::Int(a.wrapping_add(b))), "Rl-Add"),
            (Value::Int(_), v) | (v, _) => wrong("addition", &v),
        },
        Expr::Let { binder, bound, body } => pure(ctx, subst_expr(&body, &binder, &arg(*bound)), "Rl-Let"),
        Expr::LetPair { fst: x, snd: y, bound, body } => match get(arg(*bound)) {
            Value::Pair { binder, fst, snd, .. } => {
                let w = subst_value(&snd, &binder, &fst);
                // Renaming `y` first keeps names inside `fst` out of its reach.
                let y2 = Name::fresh(y.as_str());
                let body = subst_expr(&subst_expr(&rename_expr(&body, &y, &y2), &x, &fst), &y2, &w);
                pure(ctx, body, "Rl-Prod-Elim")
            }
            v => wrong("pair elimination", &v),
        },
        Expr::Case(v, branches) => match get(v) {
            Value::Label(l) => match branches.get(&l) {
                Some(m) => pure(ctx, m.clone(), "Rl-Case"),
                None => ExprStep::Stuck(format!("no branch for label `{l}`")),
            },
            Value::Var(x) => ExprStep::Stuck(format!("match against a non-value label `{x}`")),
            v => wrong("case", &v),
        },
        Expr::NatRec { scrutinee, zero, pred, rec, motive, succ } => match get(scrutinee) {
            Value::Zero => pure(ctx, *zero, "RL-Z"),
            Value::Succ(v) => {
                // The recursive result is bound by a let, so the unrolled
                // recursor is evaluated before the successor arm runs.
                let inner = Expr::NatRec { scrutinee: (*v).clone(), zero, pred: pred.clone(), rec: rec.clone(), motive, succ: succ.clone() };
                let arm = subst_expr(&succ, &pred, &v);
                pure(ctx, Expr::Let { binder: rec, bound: Box::new(inner), body: Box::new(arm) }, "RL-S")
            }
            v => wrong("recursor", &v),
        },
        Expr::Fork(m) => ExprStep::Spawn { rest: ctx.plug(Expr::Val(Value::Unit)), child: *m },
        Expr::New(session) => ExprStep::Alloc { session, ctx },
        Expr::Val(_) | Expr::Send(_) | Expr::Pair { .. } => unreachable!("not a redex"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn run_pure(mut m: Expr) -> (Value, Vec<&'static str>) {
        let mut rules = Vec::new();
        loop {
            match step_expr(&m) {
                ExprStep::Stepped(n, r) => {
                    rules.push(r);
                    m = n;
                }
                ExprStep::Finished(v) => return (v, rules),
                s => panic!("unexpected {s:?}"),
            }
        }
    }

    #[test]
    fn case_selects_branch() {
        let (v, rules) = run_pure(e("case 'Neg of { Neg: 1, Add: 2 }"));
        assert_eq!(v, Value::Int(1));
        assert_eq!(rules, ["Rl-Case"]);
    }

    #[test]
    fn beta_and_arith() {
        assert_eq!(run_pure(e("(lambda(x:Int). x) 5")).0, Value::Int(5));
        assert_eq!(run_pure(e("let x = 3 in -(x + 4)")).0, Value::Int(-7));
    }

    #[test]
    fn recursor_zero_and_succ() {
        let zero = e("rec Z { Z: 7, S(x) with (y:Int): y + 1 }");
        assert_eq!(run_pure(zero), (Value::Int(7), vec!["RL-Z"]));
        let two = e("rec S(S(Z)) { Z: 0, S(x) with (y:Int): y + 10 }");
        assert_eq!(run_pure(two).0, Value::Int(20));
    }

    #[test]
    fn pairs_destruct() {
        assert_eq!(run_pure(e("let (a, b) = <1, 2> in a + b")).0, Value::Int(3));
    }

    #[test]
    fn send_and_recv_block() {
        let m = Expr::app(Expr::Send(Box::new(Expr::Val(Value::Chan(ChanId(3))))), Expr::Val(Value::Int(1)));
        match step_expr(&m) {
            ExprStep::NeedsRendezvous { chan, dir, payload, .. } => {
                assert_eq!((chan, dir, payload), (ChanId(3), Direction::Send, Some(Value::Int(1))));
            }
            s => panic!("{s:?}"),
        }
        let m = Expr::Recv(Box::new(Expr::Val(Value::Chan(ChanId(4)))));
        assert!(matches!(step_expr(&m), ExprStep::NeedsRendezvous { dir: Direction::Recv, .. }));
    }

    #[test]
    fn stuck_terms() {
        assert!(matches!(step_expr(&e("case 'C of { A: 1 }")), ExprStep::Stuck(_)));
        assert!(matches!(step_expr(&e("1 2")), ExprStep::Stuck(_)));
        assert!(matches!(step_expr(&e("case x of { A: 1 }")), ExprStep::Stuck(_)));
    }
}
