//! Equality up to consistent renaming of bound names.

use super::{Expr, Name, Process, RecMotive, Type, Value};

#[derive(Default)]
struct Ctx {
    terms: Vec<(Name, Name)>,
    tvars: Vec<(Name, Name)>,
}

fn lookup(pairs: &[(Name, Name)], x: &Name, y: &Name) -> bool {
    for (a, b) in pairs.iter().rev() {
        if a == x || b == y {
            return a == x && b == y;
        }
    }
    x == y
}

impl Ctx {
    fn with_term<T>(&mut self, x: &Name, y: &Name, f: impl FnOnce(&mut Self) -> T) -> T {
        self.terms.push((x.clone(), y.clone()));
        let r = f(self);
        self.terms.pop();
        r
    }

    fn ty(&mut self, a: &Type, b: &Type) -> bool {
        match (a, b) {
            (Type::Unit, Type::Unit)
            | (Type::Int, Type::Int)
            | (Type::Nat, Type::Nat)
            | (Type::End, Type::End) => true,
            (Type::Label(l), Type::Label(m)) => l == m,
            (Type::Eq { index: i, lhs: l1, rhs: r1 }, Type::Eq { index: j, lhs: l2, rhs: r2 }) => {
                self.ty(i, j) && self.val(l1, l2) && self.val(r1, r2)
            }
            (Type::Case { scrutinee: v, branches: b1 }, Type::Case { scrutinee: w, branches: b2 }) => {
                self.val(v, w)
                    && b1.len() == b2.len()
                    && b1.iter().zip(b2.iter()).all(|((l, x), (m, y))| l == m && self.ty(x, y))
            }
            (
                Type::Pi { mult: m, binder: x, dom: a1, cod: b1 },
                Type::Pi { mult: n, binder: y, dom: a2, cod: b2 },
            ) => m == n && self.ty(a1, a2) && self.with_term(x, y, |c| c.ty(b1, b2)),
            (Type::Sigma { binder: x, fst: a1, snd: b1 }, Type::Sigma { binder: y, fst: a2, snd: b2 })
            | (
                Type::Send { binder: x, payload: a1, cont: b1 },
                Type::Send { binder: y, payload: a2, cont: b2 },
            )
            | (
                Type::Recv { binder: x, payload: a1, cont: b1 },
                Type::Recv { binder: y, payload: a2, cont: b2 },
            ) => self.ty(a1, a2) && self.with_term(x, y, |c| c.ty(b1, b2)),
            (
                Type::NatRec { scrutinee: v, zero: z1, var: a1, kind: k1, succ: s1 },
                Type::NatRec { scrutinee: w, zero: z2, var: a2, kind: k2, succ: s2 },
            ) => {
                if !(k1 == k2 && self.val(v, w) && self.ty(z1, z2)) {
                    return false;
                }
                self.tvars.push((a1.clone(), a2.clone()));
                let r = self.ty(s1, s2);
                self.tvars.pop();
                r
            }
            (Type::TVar { name: x, pol: p }, Type::TVar { name: y, pol: q }) => {
                p == q && lookup(&self.tvars, x, y)
            }
            _ => false,
        }
    }

    fn val(&mut self, v: &Value, w: &Value) -> bool {
        match (v, w) {
            (Value::Var(x), Value::Var(y)) => lookup(&self.terms, x, y),
            (Value::Chan(c), Value::Chan(d)) => c == d,
            (Value::Label(l), Value::Label(m)) => l == m,
            (Value::Unit, Value::Unit) | (Value::Zero, Value::Zero) => true,
            (Value::Int(i), Value::Int(j)) => i == j,
            (Value::Succ(a), Value::Succ(b)) | (Value::SendPartial(a), Value::SendPartial(b)) => {
                self.val(a, b)
            }
            (
                Value::Lam { mult: m, binder: x, annot: a1, body: b1 },
                Value::Lam { mult: n, binder: y, annot: a2, body: b2 },
            ) => m == n && self.ty(a1, a2) && self.with_term(x, y, |c| c.expr(b1, b2)),
            (
                Value::Pair { binder: x, annot: a1, fst: f1, snd: s1 },
                Value::Pair { binder: y, annot: a2, fst: f2, snd: s2 },
            ) => {
                self.annot(a1.as_deref(), a2.as_deref())
                    && self.val(f1, f2)
                    && self.with_term(x, y, |c| c.val(s1, s2))
            }
            _ => false,
        }
    }

    fn annot(&mut self, a: Option<&Type>, b: Option<&Type>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => self.ty(a, b),
            _ => false,
        }
    }

    fn motive(&mut self, m1: &RecMotive, m2: &RecMotive) -> bool {
        if m1.kind != m2.kind {
            return false;
        }
        match (&m1.tyvar, &m2.tyvar) {
            (None, None) => self.ty(&m1.rec_ty, &m2.rec_ty),
            (Some(a), Some(b)) => {
                self.tvars.push((a.clone(), b.clone()));
                let r = self.ty(&m1.rec_ty, &m2.rec_ty);
                self.tvars.pop();
                r
            }
            _ => false,
        }
    }

    fn expr(&mut self, e: &Expr, f: &Expr) -> bool {
        match (e, f) {
            (Expr::Val(v), Expr::Val(w)) => self.val(v, w),
            (Expr::Case(v, b1), Expr::Case(w, b2)) => {
                self.val(v, w)
                    && b1.len() == b2.len()
                    && b1.iter().zip(b2.iter()).all(|((l, x), (m, y))| l == m && self.expr(x, y))
            }
            (Expr::App(a1, b1), Expr::App(a2, b2)) | (Expr::Add(a1, b1), Expr::Add(a2, b2)) => {
                self.expr(a1, a2) && self.expr(b1, b2)
            }
            (
                Expr::Pair { binder: x, annot: a1, fst: v1, snd: n1 },
                Expr::Pair { binder: y, annot: a2, fst: v2, snd: n2 },
            ) => {
                self.annot(a1.as_deref(), a2.as_deref())
                    && self.val(v1, v2)
                    && self.with_term(x, y, |c| c.expr(n1, n2))
            }
            (
                Expr::LetPair { fst: x1, snd: y1, bound: m1, body: n1 },
                Expr::LetPair { fst: x2, snd: y2, bound: m2, body: n2 },
            ) => {
                self.expr(m1, m2)
                    && self.with_term(x1, x2, |c| c.with_term(y1, y2, |c| c.expr(n1, n2)))
            }
            (
                Expr::Let { binder: x, bound: m1, body: n1 },
                Expr::Let { binder: y, bound: m2, body: n2 },
            ) => self.expr(m1, m2) && self.with_term(x, y, |c| c.expr(n1, n2)),
            (Expr::New(a), Expr::New(b)) => self.ty(a, b),
            (Expr::Fork(a), Expr::Fork(b))
            | (Expr::Send(a), Expr::Send(b))
            | (Expr::Recv(a), Expr::Recv(b))
            | (Expr::Neg(a), Expr::Neg(b)) => self.expr(a, b),
            (
                Expr::NatRec { scrutinee: v1, zero: z1, pred: p1, rec: r1, motive: m1, succ: s1 },
                Expr::NatRec { scrutinee: v2, zero: z2, pred: p2, rec: r2, motive: m2, succ: s2 },
            ) => {
                self.val(v1, v2)
                    && self.expr(z1, z2)
                    && self.with_term(p1, p2, |c| {
                        c.motive(m1, m2) && c.with_term(r1, r2, |c| c.expr(s1, s2))
                    })
            }
            _ => false,
        }
    }

    fn process(&mut self, p: &Process, q: &Process) -> bool {
        match (p, q) {
            (Process::Expr(a), Process::Expr(b)) => self.expr(a, b),
            (Process::Par(a1, b1), Process::Par(a2, b2)) => self.process(a1, a2) && self.process(b1, b2),
            (
                Process::Nu { c: c1, d: d1, session: s1, body: b1 },
                Process::Nu { c: c2, d: d2, session: s2, body: b2 },
            ) => self.ty(s1, s2) && self.with_term(c1, c2, |c| c.with_term(d1, d2, |c| c.process(b1, b2))),
            _ => false,
        }
    }
}

pub fn alpha_eq(a: &Type, b: &Type) -> bool {
    Ctx::default().ty(a, b)
}

pub fn alpha_eq_value(v: &Value, w: &Value) -> bool {
    Ctx::default().val(v, w)
}

pub fn alpha_eq_expr(e: &Expr, f: &Expr) -> bool {
    Ctx::default().expr(e, f)
}

pub fn alpha_eq_process(p: &Process, q: &Process) -> bool {
    Ctx::default().process(p, q)
}

#[cfg(test)]
mod tests {
    use super::super::{Label, Multiplicity};
    use super::*;

    fn case_on(x: &str) -> Type {
        Type::case(Value::var(x), [(Label::new("A"), Type::Unit), (Label::new("B"), Type::End)])
    }

    #[test]
    fn renaming_is_invisible() {
        let a = Type::pi(Multiplicity::Un, Name::new("x"), Type::labels(&["A", "B"]), case_on("x"));
        let b = Type::pi(Multiplicity::Un, Name::new("y"), Type::labels(&["A", "B"]), case_on("y"));
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn label_sets_compare_as_sets() {
        assert!(alpha_eq(&Type::labels(&["A", "B"]), &Type::labels(&["B", "A"])));
    }

    #[test]
    fn different_constructors_differ() {
        let s = Type::send(Name::new("x"), Type::labels(&["L"]), Type::End);
        let r = Type::recv(Name::new("x"), Type::labels(&["L"]), Type::End);
        assert!(!alpha_eq(&s, &r));
    }

    #[test]
    fn free_versus_bound_distinguished() {
        let a = Type::pi(Multiplicity::Un, Name::new("x"), Type::labels(&["A", "B"]), case_on("x"));
        let b = Type::pi(Multiplicity::Un, Name::new("y"), Type::labels(&["A", "B"]), case_on("x"));
        assert!(!alpha_eq(&a, &b));
    }
}
