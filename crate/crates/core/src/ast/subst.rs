//! Capture-avoiding substitution of values for term variables and of types
//! for type variables.

use std::collections::BTreeSet;

use super::{dual, Expr, Name, NotASessionType, Polarity, Process, RecMotive, Type, Value};

struct Sub<'a> {
    x: &'a Name,
    v: &'a Value,
    fv: BTreeSet<Name>,
}

enum Binder {
    Shadowed,
    Keep,
    Rename(Name),
}

impl<'a> Sub<'a> {
    fn new(x: &'a Name, v: &'a Value) -> Self {
        Sub { x, v, fv: v.free_vars() }
    }

    fn binder(&self, b: &Name) -> Binder {
        if b == self.x {
            Binder::Shadowed
        } else if self.fv.contains(b) {
            Binder::Rename(Name::fresh(b.as_str()))
        } else {
            Binder::Keep
        }
    }

    fn ty_under(&self, b: &Name, body: &Type) -> (Name, Type) {
        match self.binder(b) {
            Binder::Shadowed => (b.clone(), body.clone()),
            Binder::Keep => (b.clone(), self.ty(body)),
            Binder::Rename(b2) => {
                let renamed = subst_type(body, b, &Value::Var(b2.clone()));
                (b2, self.ty(&renamed))
            }
        }
    }

    fn ty(&self, t: &Type) -> Type {
        match t {
            Type::Unit | Type::Int | Type::Nat | Type::End | Type::Label(_) | Type::TVar { .. } => {
                t.clone()
            }
            Type::Eq { index, lhs, rhs } => Type::Eq {
                index: Box::new(self.ty(index)),
                lhs: self.val(lhs),
                rhs: self.val(rhs),
            },
            Type::Case { scrutinee, branches } => Type::Case {
                scrutinee: self.val(scrutinee),
                branches: branches.iter().map(|(l, b)| (l.clone(), self.ty(b))).collect(),
            },
            Type::Pi { mult, binder, dom, cod } => {
                let (b, cod) = self.ty_under(binder, cod);
                Type::Pi { mult: *mult, binder: b, dom: Box::new(self.ty(dom)), cod: Box::new(cod) }
            }
            Type::Sigma { binder, fst, snd } => {
                let (b, snd) = self.ty_under(binder, snd);
                Type::Sigma { binder: b, fst: Box::new(self.ty(fst)), snd: Box::new(snd) }
            }
            Type::Send { binder, payload, cont } => {
                let (b, cont) = self.ty_under(binder, cont);
                Type::Send { binder: b, payload: Box::new(self.ty(payload)), cont: Box::new(cont) }
            }
            Type::Recv { binder, payload, cont } => {
                let (b, cont) = self.ty_under(binder, cont);
                Type::Recv { binder: b, payload: Box::new(self.ty(payload)), cont: Box::new(cont) }
            }
            Type::NatRec { scrutinee, zero, var, kind, succ } => Type::NatRec {
                scrutinee: self.val(scrutinee),
                zero: Box::new(self.ty(zero)),
                var: var.clone(),
                kind: *kind,
                succ: Box::new(self.ty(succ)),
            },
        }
    }

    fn val(&self, v: &Value) -> Value {
        match v {
            Value::Var(y) if y == self.x => self.v.clone(),
            Value::Var(_)
            | Value::Chan(_)
            | Value::Label(_)
            | Value::Unit
            | Value::Int(_)
            | Value::Zero => v.clone(),
            Value::Succ(w) => Value::Succ(Box::new(self.val(w))),
            Value::SendPartial(w) => Value::SendPartial(Box::new(self.val(w))),
            Value::Lam { mult, binder, annot, body } => {
                let annot = Box::new(self.ty(annot));
                let (b, body) = self.expr_under(binder, body);
                Value::Lam { mult: *mult, binder: b, annot, body: Box::new(body) }
            }
            Value::Pair { binder, annot, fst, snd } => {
                let annot = annot.as_ref().map(|a| Box::new(self.ty(a)));
                let fst = Box::new(self.val(fst));
                let (b, snd) = match self.binder(binder) {
                    Binder::Shadowed => (binder.clone(), (**snd).clone()),
                    Binder::Keep => (binder.clone(), self.val(snd)),
                    Binder::Rename(b2) => {
                        let renamed = subst_value(snd, binder, &Value::Var(b2.clone()));
                        (b2, self.val(&renamed))
                    }
                };
                Value::Pair { binder: b, annot, fst, snd: Box::new(snd) }
            }
        }
    }

    fn expr_under(&self, b: &Name, body: &Expr) -> (Name, Expr) {
        match self.binder(b) {
            Binder::Shadowed => (b.clone(), body.clone()),
            Binder::Keep => (b.clone(), self.expr(body)),
            Binder::Rename(b2) => {
                let renamed = rename_expr(body, b, &b2);
                (b2, self.expr(&renamed))
            }
        }
    }

    fn expr(&self, e: &Expr) -> Expr {
        match e {
            Expr::Val(v) => Expr::Val(self.val(v)),
            Expr::Case(v, br) => Expr::Case(
                self.val(v),
                br.iter().map(|(l, b)| (l.clone(), self.expr(b))).collect(),
            ),
            Expr::App(a, b) => Expr::App(Box::new(self.expr(a)), Box::new(self.expr(b))),
            Expr::Add(a, b) => Expr::Add(Box::new(self.expr(a)), Box::new(self.expr(b))),
            Expr::Pair { binder, annot, fst, snd } => {
                let annot = annot.as_ref().map(|a| Box::new(self.ty(a)));
                let fst = self.val(fst);
                let (b, snd) = self.expr_under(binder, snd);
                Expr::Pair { binder: b, annot, fst, snd: Box::new(snd) }
            }
            Expr::LetPair { fst, snd, bound, body } => {
                let bound = Box::new(self.expr(bound));
                if fst == self.x || snd == self.x {
                    return Expr::LetPair {
                        fst: fst.clone(),
                        snd: snd.clone(),
                        bound,
                        body: body.clone(),
                    };
                }
                let mut body = (**body).clone();
                let mut names = [fst.clone(), snd.clone()];
                for n in names.iter_mut() {
                    if self.fv.contains(n) {
                        let fresh = Name::fresh(n.as_str());
                        body = rename_expr(&body, n, &fresh);
                        *n = fresh;
                    }
                }
                let [fst, snd] = names;
                Expr::LetPair { fst, snd, bound, body: Box::new(self.expr(&body)) }
            }
            Expr::Let { binder, bound, body } => {
                let bound = Box::new(self.expr(bound));
                let (b, body) = self.expr_under(binder, body);
                Expr::Let { binder: b, bound, body: Box::new(body) }
            }
            Expr::New(t) => Expr::New(self.ty(t)),
            Expr::Fork(e) => Expr::Fork(Box::new(self.expr(e))),
            Expr::Send(e) => Expr::Send(Box::new(self.expr(e))),
            Expr::Recv(e) => Expr::Recv(Box::new(self.expr(e))),
            Expr::Neg(e) => Expr::Neg(Box::new(self.expr(e))),
            Expr::NatRec { scrutinee, zero, pred, rec, motive, succ } => {
                let scrutinee = self.val(scrutinee);
                let zero = Box::new(self.expr(zero));
                if pred == self.x || rec == self.x {
                    let rec_ty = if pred == self.x { motive.rec_ty.clone() } else { self.ty(&motive.rec_ty) };
                    return Expr::NatRec {
                        scrutinee,
                        zero,
                        pred: pred.clone(),
                        rec: rec.clone(),
                        motive: Box::new(RecMotive { rec_ty, ..(**motive).clone() }),
                        succ: succ.clone(),
                    };
                }
                let mut body = (**succ).clone();
                let mut rec_ty = motive.rec_ty.clone();
                let mut names = [pred.clone(), rec.clone()];
                for n in names.iter_mut() {
                    if self.fv.contains(n) {
                        let fresh = Name::fresh(n.as_str());
                        body = rename_expr(&body, n, &fresh);
                        rec_ty = subst_type(&rec_ty, n, &Value::Var(fresh.clone()));
                        *n = fresh;
                    }
                }
                let [pred, rec] = names;
                Expr::NatRec {
                    scrutinee,
                    zero,
                    pred,
                    rec,
                    motive: Box::new(RecMotive { rec_ty: self.ty(&rec_ty), ..(**motive).clone() }),
                    succ: Box::new(self.expr(&body)),
                }
            }
        }
    }

    fn process(&self, p: &Process) -> Process {
        match p {
            Process::Expr(e) => Process::Expr(self.expr(e)),
            Process::Par(a, b) => Process::par(self.process(a), self.process(b)),
            Process::Nu { c, d, session, body } => {
                let session = self.ty(session);
                if c == self.x || d == self.x {
                    return Process::Nu { c: c.clone(), d: d.clone(), session, body: body.clone() };
                }
                let mut body = (**body).clone();
                let mut names = [c.clone(), d.clone()];
                for n in names.iter_mut() {
                    if self.fv.contains(n) {
                        let fresh = Name::fresh(n.as_str());
                        body = subst_process(&body, n, &Value::Var(fresh.clone()));
                        *n = fresh;
                    }
                }
                let [c, d] = names;
                Process::Nu { c, d, session, body: Box::new(self.process(&body)) }
            }
        }
    }
}

/// `A[V/x]`.
pub fn subst_type(a: &Type, x: &Name, v: &Value) -> Type {
    Sub::new(x, v).ty(a)
}

/// `W[V/x]`.
pub fn subst_value(w: &Value, x: &Name, v: &Value) -> Value {
    Sub::new(x, v).val(w)
}

/// `M[V/x]`, including the type annotations inside `M`.
pub fn subst_expr(m: &Expr, x: &Name, v: &Value) -> Expr {
    Sub::new(x, v).expr(m)
}

pub fn subst_process(p: &Process, x: &Name, v: &Value) -> Process {
    Sub::new(x, v).process(p)
}

pub fn rename_expr(m: &Expr, from: &Name, to: &Name) -> Expr {
    subst_expr(m, from, &Value::Var(to.clone()))
}

struct TSub<'a> {
    a: &'a Name,
    pos: &'a Type,
    neg: Option<Type>,
    fv: BTreeSet<Name>,
    ftv: BTreeSet<Name>,
}

impl<'a> TSub<'a> {
    fn go(&self, t: &Type) -> Result<Type, NotASessionType> {
        Ok(match t {
            Type::TVar { name, pol } if name == self.a => match pol {
                Polarity::Pos => self.pos.clone(),
                Polarity::Neg => match &self.neg {
                    Some(n) => n.clone(),
                    None => return Err(NotASessionType(self.pos.clone())),
                },
            },
            Type::Unit | Type::Int | Type::Nat | Type::End | Type::Label(_) | Type::TVar { .. } => {
                t.clone()
            }
            Type::Eq { index, lhs, rhs } => Type::Eq {
                index: Box::new(self.go(index)?),
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            },
            Type::Case { scrutinee, branches } => Type::Case {
                scrutinee: scrutinee.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| Ok((l.clone(), self.go(b)?)))
                    .collect::<Result<_, _>>()?,
            },
            Type::Pi { mult, binder, dom, cod } => {
                let (b, cod) = self.under(binder, cod)?;
                Type::Pi { mult: *mult, binder: b, dom: Box::new(self.go(dom)?), cod: Box::new(cod) }
            }
            Type::Sigma { binder, fst, snd } => {
                let (b, snd) = self.under(binder, snd)?;
                Type::Sigma { binder: b, fst: Box::new(self.go(fst)?), snd: Box::new(snd) }
            }
            Type::Send { binder, payload, cont } => {
                let (b, cont) = self.under(binder, cont)?;
                Type::Send { binder: b, payload: Box::new(self.go(payload)?), cont: Box::new(cont) }
            }
            Type::Recv { binder, payload, cont } => {
                let (b, cont) = self.under(binder, cont)?;
                Type::Recv { binder: b, payload: Box::new(self.go(payload)?), cont: Box::new(cont) }
            }
            Type::NatRec { scrutinee, zero, var, kind, succ } => {
                let zero = Box::new(self.go(zero)?);
                let (var, succ) = if var == self.a {
                    (var.clone(), (**succ).clone())
                } else if self.ftv.contains(var) {
                    let fresh = Name::fresh(var.as_str());
                    let renamed =
                        subst_tvar(succ, var, &Type::TVar { name: fresh.clone(), pol: Polarity::Pos })?;
                    (fresh, self.go(&renamed)?)
                } else {
                    (var.clone(), self.go(succ)?)
                };
                Type::NatRec { scrutinee: scrutinee.clone(), zero, var, kind: *kind, succ: Box::new(succ) }
            }
        })
    }

    fn under(&self, b: &Name, body: &Type) -> Result<(Name, Type), NotASessionType> {
        if self.fv.contains(b) {
            let fresh = Name::fresh(b.as_str());
            let renamed = subst_type(body, b, &Value::Var(fresh.clone()));
            Ok((fresh, self.go(&renamed)?))
        } else {
            Ok((b.clone(), self.go(body)?))
        }
    }
}

/// Replaces positive occurrences of `a` by `t` and negative ones by
/// `dual(t)`. Fails only when a negative occurrence meets a non-session `t`.
pub fn subst_tvar(ty: &Type, a: &Name, t: &Type) -> Result<Type, NotASessionType> {
    let neg = dual(t).ok();
    let s = TSub { a, pos: t, neg, fv: t.free_vars(), ftv: t.free_tvars() };
    s.go(ty)
}

#[cfg(test)]
mod tests {
    use super::super::{alpha_eq, alpha_eq_expr, Kind, Label, Multiplicity};
    use super::*;

    fn case_x() -> Type {
        Type::case(Value::var("x"), [(Label::new("A"), Type::Unit), (Label::new("B"), Type::Int)])
    }

    #[test]
    fn replaces_free_occurrence() {
        let got = subst_type(&case_x(), &Name::new("x"), &Value::label("A"));
        let want = Type::case(Value::label("A"), [(Label::new("A"), Type::Unit), (Label::new("B"), Type::Int)]);
        assert_eq!(got, want);
    }

    #[test]
    fn binder_shadows() {
        let t = Type::pi(Multiplicity::Un, Name::new("x"), Type::labels(&["A", "B"]), case_x());
        let got = subst_type(&t, &Name::new("x"), &Value::label("A"));
        assert!(alpha_eq(&got, &t));
    }

    #[test]
    fn binder_renamed_to_avoid_capture() {
        // (y:{A}) -> case x of ...  with x := y must not capture
        let t = Type::pi(Multiplicity::Un, Name::new("y"), Type::labels(&["A"]), case_x());
        let got = subst_type(&t, &Name::new("x"), &Value::var("y"));
        match got {
            Type::Pi { binder, cod, .. } => {
                assert_ne!(binder, Name::new("y"));
                assert!(cod.mentions(&Name::new("y")));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn natrec_scrutinee_substitution() {
        let t = Type::NatRec {
            scrutinee: Value::var("n"),
            zero: Box::new(Type::send_(Type::Int, Type::End)),
            var: Name::new("a"),
            kind: Kind::SL,
            succ: Box::new(Type::recv_(Type::Int, Type::tvar("a"))),
        };
        let got = subst_type(&t, &Name::new("n"), &Value::nat(1));
        match got {
            Type::NatRec { scrutinee, .. } => assert_eq!(scrutinee, Value::nat(1)),
            _ => panic!(),
        }
    }

    #[test]
    fn expr_substitution_examples() {
        let x = Name::new("x");
        assert_eq!(subst_expr(&Expr::var("x"), &x, &Value::Unit), Expr::Val(Value::Unit));
        let lam = Expr::Val(Value::Lam {
            mult: Multiplicity::Lin,
            binder: x.clone(),
            annot: Box::new(Type::labels(&["A"])),
            body: Box::new(Expr::var("x")),
        });
        assert!(alpha_eq_expr(&subst_expr(&lam, &x, &Value::label("A")), &lam));
        let send = Expr::app(Expr::Send(Box::new(Expr::var("c"))), Expr::var("y"));
        let want = Expr::app(Expr::Send(Box::new(Expr::var("c"))), Expr::Val(Value::Int(5)));
        assert_eq!(subst_expr(&send, &Name::new("y"), &Value::Int(5)), want);
    }

    #[test]
    fn tvar_negative_occurrence_gets_dual() {
        let body = Type::send_(Type::Int, Type::TVar { name: Name::new("a"), pol: Polarity::Neg });
        let got = subst_tvar(&body, &Name::new("a"), &Type::send_(Type::Int, Type::End)).unwrap();
        match got {
            Type::Send { cont, .. } => assert!(matches!(*cont, Type::Recv { .. })),
            _ => panic!(),
        }
    }
}
