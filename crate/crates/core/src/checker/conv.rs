use std::collections::BTreeMap;

use crate::ast::{alpha_eq, subst_tvar, subst_type, Label, LabelSet, Multiplicity, Name, Type, Value};
use crate::env::TypeEnv;

use super::{CResult, Checker, ErrorCode, FuelGuard};

/// `Γ, z : (x = ℓ : L)` with the name of the new entry.
pub(crate) fn with_eq(g: &TypeEnv, x: &Name, index: Type, v: Value) -> (TypeEnv, Name) {
    let eq = Name::fresh("eq");
    let ty = Type::Eq { index: Box::new(index), lhs: Value::Var(x.clone()), rhs: v };
    (g.bind(eq.clone(), ty, Multiplicity::Un), eq)
}

impl Checker {
    /// Follows equations until a label or numeral is reached.
    pub fn convert_value(&self, g: &TypeEnv, v: &Value) -> CResult<Value> {
        let mut cur = v.clone();
        for _ in 0..=g.len() {
            match &cur {
                Value::Label(_) | Value::Zero | Value::Succ(_) => return Ok(cur),
                Value::Var(x) => match g.equation_for(x) {
                    Some(w) => cur = w.clone(),
                    None => break,
                },
                _ => break,
            }
        }
        Err(self.err(ErrorCode::NotConvertible, format!("`{v}` does not convert to a label or numeral")))
    }

    /// The label set of a scrutinee that does not convert.
    pub(crate) fn label_type_of(&self, g: &TypeEnv, v: &Value) -> CResult<(Name, LabelSet)> {
        let Value::Var(x) = v else {
            return Err(self.err(ErrorCode::NotConvertible, format!("`{v}` is not a label")));
        };
        let Some((ty, _)) = g.lookup_term(x) else {
            return Err(self.err(ErrorCode::UnboundName, format!("unbound name `{x}`")));
        };
        match self.unfold(g, ty)? {
            Type::Label(ls) => Ok((x.clone(), ls)),
            t => Err(self.err(ErrorCode::NotASubtype, format!("`{x}` has type {t}, expected a label type"))),
        }
    }

    /// Exposes the top-level constructor of a case or recursor type.
    pub fn unfold(&self, g: &TypeEnv, a: &Type) -> CResult<Type> {
        match a {
            Type::Case { scrutinee, branches } => {
                if let Ok(Value::Label(l)) = self.convert_value(g, scrutinee) {
                    let _r = self.rule("A-Unfold-Beta");
                    let b = branches.get(&l).ok_or_else(|| {
                        self.err(ErrorCode::UnfoldFailed, format!("case type has no branch for `{l}`"))
                    })?;
                    return self.unfold(g, b);
                }
                let _r = self.rule("A-Unfold-Case");
                let (x, ls) = self.label_type_of(g, scrutinee)?;
                let mut parts = Vec::new();
                for l in ls.iter() {
                    let b = branches.get(l).ok_or_else(|| {
                        self.err(ErrorCode::UnfoldFailed, format!("case type has no branch for `{l}`"))
                    })?;
                    let (gl, _) = with_eq(g, &x, Type::Label(ls.clone()), Value::Label(l.clone()));
                    parts.push((l.clone(), self.unfold(&gl, b)?));
                }
                self.commute(&x, parts)
            }
            Type::NatRec { .. } => match self.unroll_rec(g, a) {
                Some(step) => {
                    let (step, _f) = step?;
                    self.unfold(g, &step)
                }
                None => Ok(a.clone()),
            },
            _ => Ok(a.clone()),
        }
    }

    /// One unrolling of a recursor whose scrutinee converts to a numeral;
    /// `None` when the scrutinee is not known. The guard counts towards the
    /// unrolling bound until the caller drops it.
    pub(crate) fn unroll_rec(&self, g: &TypeEnv, a: &Type) -> Option<CResult<(Type, Option<FuelGuard<'_>>)>> {
        let Type::NatRec { scrutinee, zero, var, kind, succ } = a else { return None };
        match self.convert_value(g, scrutinee) {
            Ok(Value::Zero) => {
                let _r = self.rule("A-Unfold-Rec-Z");
                Some(Ok(((**zero).clone(), None)))
            }
            Ok(Value::Succ(pred)) => {
                let _r = self.rule("A-Unfold-Rec-S");
                Some(self.unroll().and_then(|f| {
                    let inner = Type::NatRec {
                        scrutinee: (*pred).clone(),
                        zero: zero.clone(),
                        var: var.clone(),
                        kind: *kind,
                        succ: succ.clone(),
                    };
                    let step = subst_tvar(succ, var, &inner).map_err(|e| {
                        self.err(ErrorCode::KindMismatch, format!("negative recursion variable: {e}"))
                    })?;
                    Ok((step, Some(f)))
                }))
            }
            _ => None,
        }
    }

    /// Moves a common head constructor out of the branches of `case x`.
    fn commute(&self, x: &Name, parts: Vec<(Label, Type)>) -> CResult<Type> {
        let fail = |what: &str| {
            self.err(ErrorCode::UnfoldFailed, format!("branches of `case {x}` {what}"))
        };
        let (_, first) = &parts[0];
        if parts.len() == 1 {
            return Ok(first.clone());
        }
        match first {
            Type::Label(ls) => {
                if parts.iter().all(|(_, t)| matches!(t, Type::Label(m) if m == ls)) {
                    Ok(first.clone())
                } else {
                    Err(fail("have different label types"))
                }
            }
            Type::Unit | Type::Int | Type::Nat | Type::End => {
                if parts.iter().all(|(_, t)| t == first) {
                    Ok(first.clone())
                } else {
                    Err(fail("expose different constructors"))
                }
            }
            Type::Pi { .. } | Type::Sigma { .. } | Type::Send { .. } | Type::Recv { .. } => {
                let (head, y, payload) = split(first);
                let mut conts = BTreeMap::new();
                for (l, t) in &parts {
                    let (h, b, p) = split(t);
                    if h != head || !alpha_eq(p.unwrap(), payload.unwrap()) {
                        return Err(fail("expose different constructors or payloads"));
                    }
                    let cont = cont_of(t);
                    let cont = if b.as_ref() == y.as_ref() {
                        cont.clone()
                    } else {
                        subst_type(cont, b.as_ref().unwrap(), &Value::Var(y.clone().unwrap()))
                    };
                    conts.insert(l.clone(), cont);
                }
                let cont = Type::Case { scrutinee: Value::Var(x.clone()), branches: conts };
                let y = y.unwrap();
                let p = payload.unwrap().clone();
                Ok(match first {
                    Type::Pi { mult, .. } => Type::pi(*mult, y, p, cont),
                    Type::Sigma { .. } => Type::sigma(y, p, cont),
                    Type::Send { .. } => Type::send(y, p, cont),
                    _ => Type::recv(y, p, cont),
                })
            }
            _ => Err(fail("cannot be commuted")),
        }
    }
}

#[derive(PartialEq)]
enum Head {
    Pi(Multiplicity),
    Sigma,
    Send,
    Recv,
    Other,
}

fn split(t: &Type) -> (Head, Option<Name>, Option<&Type>) {
    match t {
        Type::Pi { mult, binder, dom, .. } => (Head::Pi(*mult), Some(binder.clone()), Some(dom)),
        Type::Sigma { binder, fst, .. } => (Head::Sigma, Some(binder.clone()), Some(fst)),
        Type::Send { binder, payload, .. } => (Head::Send, Some(binder.clone()), Some(payload)),
        Type::Recv { binder, payload, .. } => (Head::Recv, Some(binder.clone()), Some(payload)),
        _ => (Head::Other, None, None),
    }
}

fn cont_of(t: &Type) -> &Type {
    match t {
        Type::Pi { cod, .. } => cod,
        Type::Sigma { snd, .. } => snd,
        Type::Send { cont, .. } | Type::Recv { cont, .. } => cont,
        _ => t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Kind;
    use crate::parser::parse_type;

    fn ty(s: &str) -> Type {
        parse_type(s, &[]).unwrap()
    }

    #[test]
    fn convert_examples() {
        let c = Checker::new();
        let g = TypeEnv::new();
        assert_eq!(c.convert_value(&g, &Value::label("Neg")).unwrap(), Value::label("Neg"));
        let x = Name::new("x");
        let g = g.bind(x.clone(), Type::labels(&["Neg", "Add"]), Multiplicity::Un);
        assert_eq!(c.convert_value(&g, &Value::Var(x.clone())).unwrap_err().code, ErrorCode::NotConvertible);
        let (g2, _) = with_eq(&g, &x, Type::labels(&["Neg", "Add"]), Value::label("Neg"));
        assert_eq!(c.convert_value(&g2, &Value::Var(x)).unwrap(), Value::label("Neg"));
    }

    #[test]
    fn unfold_commutes_common_prefix() {
        let c = Checker::new();
        let g = TypeEnv::new().bind(Name::new("l"), Type::labels(&["Neg", "Add"]), Multiplicity::Un);
        let t = ty("case l of { Neg: ?Int. !Int. End, Add: ?Int. ?Int. End }");
        let u = c.unfold(&g, &t).unwrap();
        match u {
            Type::Recv { payload, cont, .. } => {
                assert_eq!(*payload, Type::Int);
                assert!(matches!(*cont, Type::Case { .. }));
            }
            other => panic!("{other}"),
        }
        let bad = ty("case l of { Neg: ?Int. End, Add: !Int. End }");
        assert_eq!(c.unfold(&g, &bad).unwrap_err().code, ErrorCode::UnfoldFailed);
    }

    #[test]
    fn unfold_recursor() {
        let c = Checker::new();
        let g = TypeEnv::new();
        let t0 = ty("rec 0 (!Int.End) [a] ?Int.a");
        assert!(alpha_eq(&c.unfold(&g, &t0).unwrap(), &ty("!Int. End")));
        let t1 = ty("rec 1 (!Int.End) [a] ?Int.a");
        match c.unfold(&g, &t1).unwrap() {
            Type::Recv { cont, .. } => {
                assert!(matches!(*cont, Type::NatRec { scrutinee: Value::Zero, kind: Kind::SL, .. }))
            }
            other => panic!("{other}"),
        }
        let n = TypeEnv::new().bind(Name::new("n"), Type::Nat, Multiplicity::Un);
        let tn = ty("rec n (!Int.End) [a] ?Int.a");
        assert_eq!(c.unfold(&n, &tn).unwrap(), tn);
    }

    #[test]
    fn fuel_is_bounded() {
        let c = Checker::with_fuel(3);
        let t = ty("rec 5 End [a] a");
        assert_eq!(c.unfold(&TypeEnv::new(), &t).unwrap_err().code, ErrorCode::FuelExhausted);
        assert!(Checker::new().unfold(&TypeEnv::new(), &t).is_ok());
    }
}
