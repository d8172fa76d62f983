use crate::ast::{Expr, Kind, Multiplicity, Name, Type, Value};
use crate::env::TypeEnv;

use super::conv::with_eq;
use super::{CResult, Checker, ErrorCode};

impl Checker {
    /// The least kind of `a`.
    pub fn kind_synth(&self, g: &TypeEnv, a: &Type) -> CResult<Kind> {
        match a {
            Type::Unit => {
                let _r = self.rule("A-Unit-F");
                Ok(Kind::SU)
            }
            Type::End => {
                let _r = self.rule("A-End-F");
                Ok(Kind::SU)
            }
            Type::Int | Type::Nat => Ok(Kind::GU),
            Type::Label(_) => {
                let _r = self.rule("A-Lab-F");
                Ok(Kind::GU)
            }
            Type::Eq { index, lhs, rhs } => {
                let _r = self.rule("A-Equality-F");
                let u = g.unr();
                self.kind_synth(&u, index)?;
                self.type_check(&u, &Expr::Val(lhs.clone()), index)?;
                self.type_check(&u, &Expr::Val(rhs.clone()), index)?;
                Ok(Kind::GU)
            }
            Type::Case { scrutinee, branches } => {
                let _r = self.rule("A-Lab-ET");
                if let Ok(Value::Label(l)) = self.convert_value(g, scrutinee) {
                    let b = branches.get(&l).ok_or_else(|| {
                        self.err(ErrorCode::KindMismatch, format!("case type has no branch for `{l}`"))
                    })?;
                    return self.kind_synth(g, b);
                }
                let (x, ls) = self.label_type_of(g, scrutinee)?;
                let mut k: Option<Kind> = None;
                for l in ls.iter() {
                    let b = branches.get(l).ok_or_else(|| {
                        self.err(ErrorCode::KindMismatch, format!("case type has no branch for `{l}`"))
                    })?;
                    let (gl, _) = with_eq(g, &x, Type::Label(ls.clone()), Value::Label(l.clone()));
                    let kl = self.kind_synth(&gl, b)?;
                    k = Some(k.map_or(kl, |k| k.join(kl)));
                }
                Ok(k.expect("label sets are non-empty"))
            }
            Type::Pi { mult, binder, dom, cod } => {
                let _r = self.rule("A-Pi-F");
                let g2 = self.extend_for_kinding(g, binder, dom, cod)?;
                self.kind_synth(&g2, cod)?;
                Ok(Kind::general(*mult))
            }
            Type::Sigma { binder, fst, snd } => {
                let _r = self.rule("A-Sigma-F");
                let k1 = self.kind_synth(g, fst)?;
                let g2 = self.extend_for_kinding(g, binder, fst, snd)?;
                let k2 = self.kind_synth(&g2, snd)?;
                Ok(Kind::general(k1.mult.join(k2.mult)))
            }
            Type::Send { binder, payload, cont } | Type::Recv { binder, payload, cont } => {
                let _r = self.rule(if matches!(a, Type::Send { .. }) { "A-Ssn-Out-F" } else { "A-Ssn-In-F" });
                let g2 = self.extend_for_kinding(g, binder, payload, cont)?;
                self.kind_check(&g2, cont, Kind::SL)?;
                Ok(Kind::SL)
            }
            Type::NatRec { scrutinee, zero, var, kind, succ } => {
                let _r = self.rule("A-Rec-ET");
                self.check_nat_value(g, scrutinee)?;
                let k0 = self.kind_synth(g, zero)?;
                let g2 = g.bind_tyvar(var.clone(), *kind);
                let k1 = self.kind_synth(&g2, succ)?;
                let k = k0.join(k1);
                if !k.leq(*kind) {
                    return Err(self.err(
                        ErrorCode::KindMismatch,
                        format!("recursor arms have kind {k}, declared {kind}"),
                    ));
                }
                Ok(*kind)
            }
            Type::TVar { name, pol: _ } => {
                let _r = self.rule("A-Rec-Alpha");
                g.lookup_tyvar(name)
                    .ok_or_else(|| self.err(ErrorCode::UnboundName, format!("unbound type variable `{name}`")))
            }
        }
    }

    pub fn kind_check(&self, g: &TypeEnv, a: &Type, k: Kind) -> CResult<()> {
        let _r = self.rule("A-Sub-Kind");
        let got = self.kind_synth(g, a)?;
        if got.leq(k) {
            Ok(())
        } else {
            Err(self.err(ErrorCode::KindMismatch, format!("{a} has kind {got}, expected {k}")))
        }
    }

    /// `Γ ⊘ x:A`: binds `x` only when `A` is unrestricted.
    pub fn cond_extend(&self, g: &TypeEnv, x: &Name, a: &Type) -> CResult<TypeEnv> {
        let k = self.kind_synth(g, a)?;
        Ok(if k.mult == Multiplicity::Un { g.bind(x.clone(), a.clone(), Multiplicity::Un) } else { g.clone() })
    }

    /// Binds a term variable with the multiplicity of its type.
    pub(crate) fn bind(&self, g: &TypeEnv, x: &Name, a: &Type) -> CResult<TypeEnv> {
        let k = self.kind_synth(g, a)?;
        Ok(g.bind(x.clone(), a.clone(), k.mult))
    }

    /// Conditional extension for the scope of a type binder; a linear
    /// binder that is mentioned in its scope is a dependency on a linear value.
    fn extend_for_kinding(&self, g: &TypeEnv, x: &Name, a: &Type, scope: &Type) -> CResult<TypeEnv> {
        let k = self.kind_synth(g, a)?;
        if k.mult == Multiplicity::Un {
            Ok(g.bind(x.clone(), a.clone(), Multiplicity::Un))
        } else if scope.mentions(x) {
            Err(self.err(
                ErrorCode::DependencyOnLinear,
                format!("type depends on `{x}` whose type {a} is linear"),
            ))
        } else {
            Ok(g.clone())
        }
    }

    pub(crate) fn check_nat_value(&self, g: &TypeEnv, v: &Value) -> CResult<()> {
        match v {
            Value::Zero => Ok(()),
            Value::Succ(w) => self.check_nat_value(g, w),
            Value::Var(x) => match g.lookup_term(x) {
                Some((t, _)) => match self.unfold(g, t)? {
                    Type::Nat => Ok(()),
                    t => Err(self.err(ErrorCode::NotASubtype, format!("`{x}` has type {t}, expected Nat"))),
                },
                None => Err(self.err(ErrorCode::UnboundName, format!("unbound name `{x}`"))),
            },
            _ => Err(self.err(ErrorCode::NotASubtype, format!("`{v}` is not a natural number"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_type;

    fn ty(s: &str) -> Type {
        parse_type(s, &[]).unwrap()
    }

    #[test]
    fn kind_examples() {
        let c = Checker::new();
        let g = TypeEnv::new();
        assert_eq!(c.kind_synth(&g, &Type::Unit).unwrap(), Kind::SU);
        assert_eq!(c.kind_synth(&g, &ty("{Neg, Add}")).unwrap(), Kind::GU);
        assert_eq!(c.kind_synth(&g, &ty("!(x:{A}) End")).unwrap(), Kind::SL);
        c.kind_check(&g, &ty("(x:{A}) -o {A}"), Kind::GL).unwrap();
        assert_eq!(c.kind_check(&g, &ty("(x:{A}) -o {A}"), Kind::GU).unwrap_err().code, ErrorCode::KindMismatch);
    }

    #[test]
    fn server_type_kinds() {
        let c = Checker::new();
        let t = ty("?(l:{Neg, Add}). case l of { Neg: ?Int. !Int. !{EOS}. End, Add: ?Int. ?Int. !Int. !{EOS}. End }");
        assert_eq!(c.kind_synth(&TypeEnv::new(), &t).unwrap(), Kind::SL);
        let node = ty("Sigma(tag: {Empty, Node}) case tag of { Empty: Unit, Node: Int }");
        assert_eq!(c.kind_synth(&TypeEnv::new(), &node).unwrap(), Kind::GU);
    }

    #[test]
    fn linear_dependency_rejected() {
        let c = Checker::new();
        let t = ty("Sigma(x: !Int.End) case x of { A: Unit }");
        assert_eq!(c.kind_synth(&TypeEnv::new(), &t).unwrap_err().code, ErrorCode::DependencyOnLinear);
    }

    #[test]
    fn cond_extend_examples() {
        let c = Checker::new();
        let g = TypeEnv::new();
        let x = Name::new("x");
        assert_eq!(c.cond_extend(&g, &x, &ty("{A, B}")).unwrap().len(), 1);
        assert!(c.cond_extend(&g, &x, &ty("!(y:Int) End")).unwrap().is_empty());
        assert_eq!(c.cond_extend(&g, &x, &Type::Unit).unwrap().len(), 1);
    }

    #[test]
    fn recursor_kinds() {
        let c = Checker::new();
        let g = TypeEnv::new().bind(Name::new("n"), Type::Nat, Multiplicity::Un);
        assert_eq!(c.kind_synth(&g, &ty("rec n (!Int.End) [a] ?Int.a")).unwrap(), Kind::SL);
        assert_eq!(c.kind_synth(&TypeEnv::new(), &Type::tvar("a")).unwrap_err().code, ErrorCode::UnboundName);
    }
}
