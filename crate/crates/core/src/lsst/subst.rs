//! Free names and capture-avoiding substitution on LSST terms.

use std::collections::BTreeSet;

use crate::ast::Name;

use super::LExpr;

impl LExpr {
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fv(self, &mut Vec::new(), &mut out);
        out
    }
}

fn fv(e: &LExpr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let under = |names: &[&Name], body: &LExpr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| {
        let n = bound.len();
        bound.extend(names.iter().map(|x| (*x).clone()));
        fv(body, bound, out);
        bound.truncate(n);
    };
    match e {
        LExpr::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        LExpr::Chan(_) | LExpr::Unit | LExpr::Int(_) | LExpr::New(_) | LExpr::Select { .. } => {}
        LExpr::Lam { binder, body, .. } => under(&[binder], body, bound, out),
        LExpr::App(a, b) | LExpr::Pair(a, b) | LExpr::Add(a, b) => {
            fv(a, bound, out);
            fv(b, bound, out);
        }
        LExpr::LetPair { fst, snd, bound: m, body } => {
            fv(m, bound, out);
            under(&[fst, snd], body, bound, out);
        }
        LExpr::Let { binder, bound: m, body } => {
            fv(m, bound, out);
            under(&[binder], body, bound, out);
        }
        LExpr::Rcase { scrutinee, branches } => {
            fv(scrutinee, bound, out);
            for (x, body) in branches.values() {
                under(&[x], body, bound, out);
            }
        }
        LExpr::Fork(m) | LExpr::Send(m) | LExpr::Recv(m) | LExpr::Close(m) | LExpr::Wait(m) | LExpr::Neg(m) => {
            fv(m, bound, out)
        }
    }
}

/// Renames `binder` when it would capture a free name of the substituted value.
fn guard(binder: &Name, body: &LExpr, avoid: &BTreeSet<Name>) -> (Name, LExpr) {
    if avoid.contains(binder) {
        let fresh = Name::fresh(binder.as_str());
        (fresh.clone(), subst_lexpr(body, binder, &LExpr::Var(fresh)))
    } else {
        (binder.clone(), body.clone())
    }
}

/// `e[v/x]`, renaming binders that would capture free names of `v`.
pub fn subst_lexpr(e: &LExpr, x: &Name, v: &LExpr) -> LExpr {
    let avoid = v.free_vars();
    go(e, x, v, &avoid)
}

fn go(e: &LExpr, x: &Name, v: &LExpr, avoid: &BTreeSet<Name>) -> LExpr {
    let s = |m: &LExpr| Box::new(go(m, x, v, avoid));
    match e {
        LExpr::Var(y) if y == x => v.clone(),
        LExpr::Var(_) | LExpr::Chan(_) | LExpr::Unit | LExpr::Int(_) | LExpr::New(_) | LExpr::Select { .. } => e.clone(),
        LExpr::Lam { mult, binder, annot, body } => {
            if binder == x {
                return e.clone();
            }
            let (binder, body) = guard(binder, body, avoid);
            LExpr::Lam { mult: *mult, binder, annot: annot.clone(), body: s(&body) }
        }
        LExpr::App(a, b) => LExpr::App(s(a), s(b)),
        LExpr::Pair(a, b) => LExpr::Pair(s(a), s(b)),
        LExpr::Add(a, b) => LExpr::Add(s(a), s(b)),
        LExpr::Let { binder, bound, body } => {
            let bound = s(bound);
            if binder == x {
                return LExpr::Let { binder: binder.clone(), bound, body: body.clone() };
            }
            let (binder, body) = guard(binder, body, avoid);
            LExpr::Let { binder, bound, body: s(&body) }
        }
        LExpr::LetPair { fst, snd, bound, body } => {
            let bound = s(bound);
            if fst == x || snd == x {
                return LExpr::LetPair { fst: fst.clone(), snd: snd.clone(), bound, body: body.clone() };
            }
            let (fst, body) = guard(fst, body, avoid);
            let (snd, body) = guard(snd, &body, avoid);
            LExpr::LetPair { fst, snd, bound, body: s(&body) }
        }
        LExpr::Rcase { scrutinee, branches } => LExpr::Rcase {
            scrutinee: s(scrutinee),
            branches: branches
                .iter()
                .map(|(l, (y, body))| {
                    if y == x {
                        return (l.clone(), (y.clone(), body.clone()));
                    }
                    let (y, body) = guard(y, body, avoid);
                    (l.clone(), (y, go(&body, x, v, avoid)))
                })
                .collect(),
        },
        LExpr::Fork(m) => LExpr::Fork(s(m)),
        LExpr::Send(m) => LExpr::Send(s(m)),
        LExpr::Recv(m) => LExpr::Recv(s(m)),
        LExpr::Close(m) => LExpr::Close(s(m)),
        LExpr::Wait(m) => LExpr::Wait(s(m)),
        LExpr::Neg(m) => LExpr::Neg(s(m)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Multiplicity;
    use crate::lsst::LType;

    fn lam(x: &str, body: LExpr) -> LExpr {
        LExpr::Lam { mult: Multiplicity::Un, binder: Name::new(x), annot: LType::Int, body: Box::new(body) }
    }

    #[test]
    fn shadowed_binder_blocks_substitution() {
        let e = lam("x", LExpr::var("x"));
        assert_eq!(subst_lexpr(&e, &Name::new("x"), &LExpr::Int(1)), e);
    }

    #[test]
    fn capture_is_avoided() {
        let e = lam("y", LExpr::Add(Box::new(LExpr::var("x")), Box::new(LExpr::var("y"))));
        let r = subst_lexpr(&e, &Name::new("x"), &LExpr::var("y"));
        let LExpr::Lam { binder, body, .. } = &r else { panic!() };
        assert_ne!(binder.as_str(), "y");
        assert_eq!(body.free_vars(), BTreeSet::from([Name::new("y"), binder.clone()]));
    }
}
