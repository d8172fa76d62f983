use crate::ast::{alpha_eq, alpha_eq_value, subst_tvar, subst_type, Kind, Name, Polarity, Type, Value};
use crate::env::TypeEnv;

use super::conv::with_eq;
use super::{CResult, Checker, ErrorCode};

impl Checker {
    /// Decides `A ≤ B` and returns the kind at which it holds.
    pub fn sub_synth(&self, g: &TypeEnv, a: &Type, b: &Type) -> CResult<Kind> {
        if let Type::Case { scrutinee, branches } = a {
            if let Ok(Value::Label(l)) = self.convert_value(g, scrutinee) {
                let _r = self.rule("AS-Case-Left1");
                let al = branches.get(&l).ok_or_else(|| self.missing_branch(a, &l))?;
                return self.sub_synth(g, al, b);
            }
            let _r = self.rule("AS-Case-Left2");
            let (x, ls) = self.label_type_of(g, scrutinee)?;
            let mut k: Option<Kind> = None;
            for l in ls.iter() {
                let al = branches.get(l).ok_or_else(|| self.missing_branch(a, l))?;
                let (gl, _) = with_eq(g, &x, Type::Label(ls.clone()), Value::Label(l.clone()));
                let kl = self.sub_synth(&gl, al, b)?;
                k = Some(k.map_or(kl, |k| k.join(kl)));
            }
            return Ok(k.expect("label sets are non-empty"));
        }
        if let Type::Case { scrutinee, branches } = b {
            if let Ok(Value::Label(l)) = self.convert_value(g, scrutinee) {
                let _r = self.rule("AS-Case-Right1");
                let bl = branches.get(&l).ok_or_else(|| self.missing_branch(b, &l))?;
                return self.sub_synth(g, a, bl);
            }
            let _r = self.rule("AS-Case-Right2");
            let (x, ls) = self.label_type_of(g, scrutinee)?;
            let mut k: Option<Kind> = None;
            for l in ls.iter() {
                let bl = branches.get(l).ok_or_else(|| self.missing_branch(b, l))?;
                let (gl, _) = with_eq(g, &x, Type::Label(ls.clone()), Value::Label(l.clone()));
                let kl = self.sub_synth(&gl, a, bl)?;
                k = Some(k.map_or(kl, |k| k.join(kl)));
            }
            return Ok(k.expect("label sets are non-empty"));
        }
        if let Some(a2) = self.unroll_rec(g, a) {
            let _r = self.rule("AS-Rec-Left");
            let (a2, _f) = a2?;
            return self.sub_synth(g, &a2, b);
        }
        if let Some(b2) = self.unroll_rec(g, b) {
            let _r = self.rule("AS-Rec-Right");
            let (b2, _f) = b2?;
            return self.sub_synth(g, a, &b2);
        }
        match (a, b) {
            (
                Type::NatRec { scrutinee: v, zero: z1, var: x1, kind: k1, succ: s1 },
                Type::NatRec { scrutinee: w, zero: z2, var: x2, kind: _, succ: s2 },
            ) => {
                let _r = self.rule("AS-Rec-Left-X");
                if !alpha_eq_value(v, w) {
                    return Err(self.not_sub(a, b));
                }
                let kz = self.sub_synth(g, z1, z2)?;
                let s2 = if x1 == x2 {
                    (**s2).clone()
                } else {
                    subst_tvar(s2, x2, &Type::TVar { name: x1.clone(), pol: Polarity::Pos })
                        .expect("a type variable is a session type")
                };
                let g2 = g.bind_tyvar(x1.clone(), *k1);
                let ks = self.sub_synth(&g2, s1, &s2)?;
                Ok(kz.join(ks))
            }
            (Type::TVar { name: n1, pol: p1 }, Type::TVar { name: n2, pol: p2 }) => {
                let _r = self.rule("AS-TVar");
                if n1 == n2 && p1 == p2 {
                    self.kind_synth(g, a)
                } else {
                    Err(self.not_sub(a, b))
                }
            }
            (Type::Unit, Type::Unit) | (Type::End, Type::End) => {
                let _r = self.rule("AS-Unit");
                Ok(Kind::SU)
            }
            (Type::Int, Type::Int) | (Type::Nat, Type::Nat) => Ok(Kind::GU),
            (Type::Label(l1), Type::Label(l2)) => {
                let _r = self.rule("AS-Label");
                if l1.is_subset(l2) {
                    Ok(Kind::GU)
                } else {
                    Err(self.not_sub(a, b))
                }
            }
            (Type::Eq { .. }, Type::Eq { .. }) => {
                if alpha_eq(a, b) {
                    Ok(Kind::GU)
                } else {
                    Err(self.not_sub(a, b))
                }
            }
            (
                Type::Pi { mult: m, binder: x1, dom: a1, cod: b1 },
                Type::Pi { mult: n, binder: x2, dom: a2, cod: b2 },
            ) => {
                let _r = self.rule("AS-Pi");
                if !m.leq(*n) {
                    return Err(self.err(ErrorCode::NotASubtype, format!("{a} is not a subtype of {b}: {m} function where {n} expected")));
                }
                self.sub_synth(g, a2, a1)?;
                let (y, b1, b2) = share_binder(x1, b1, x2, b2);
                let g2 = self.cond_extend(g, &y, a2)?;
                self.sub_synth(&g2, &b1, &b2)?;
                Ok(Kind::general(*n))
            }
            (Type::Sigma { binder: x1, fst: a1, snd: b1 }, Type::Sigma { binder: x2, fst: a2, snd: b2 }) => {
                let _r = self.rule("AS-Sigma");
                let k1 = self.sub_synth(g, a1, a2)?;
                let (y, b1, b2) = share_binder(x1, b1, x2, b2);
                let g2 = self.cond_extend(g, &y, a1)?;
                let k2 = self.sub_synth(&g2, &b1, &b2)?;
                Ok(Kind::general(k1.mult.join(k2.mult)))
            }
            (
                Type::Send { binder: x1, payload: a1, cont: s1 },
                Type::Send { binder: x2, payload: a2, cont: s2 },
            ) => {
                let _r = self.rule("AS-Send");
                self.sub_synth(g, a2, a1)?;
                let (y, s1, s2) = share_binder(x1, s1, x2, s2);
                let g2 = self.cond_extend(g, &y, a2)?;
                self.sub_synth(&g2, &s1, &s2)?;
                Ok(Kind::SL)
            }
            (
                Type::Recv { binder: x1, payload: a1, cont: s1 },
                Type::Recv { binder: x2, payload: a2, cont: s2 },
            ) => {
                let _r = self.rule("AS-Recv");
                self.sub_synth(g, a1, a2)?;
                let (y, s1, s2) = share_binder(x1, s1, x2, s2);
                let g2 = self.cond_extend(g, &y, a1)?;
                self.sub_synth(&g2, &s1, &s2)?;
                Ok(Kind::SL)
            }
            _ => Err(self.not_sub(a, b)),
        }
    }

    pub fn sub_check(&self, g: &TypeEnv, a: &Type, b: &Type, k: Kind) -> CResult<()> {
        let _r = self.rule("AS-Check");
        let got = self.sub_synth(g, a, b)?;
        if got.leq(k) {
            Ok(())
        } else {
            Err(self.err(ErrorCode::KindMismatch, format!("{a} ≤ {b} holds at {got}, expected {k}")))
        }
    }

    /// Mutual subtyping, used as the convertibility test.
    pub fn equivalent(&self, g: &TypeEnv, a: &Type, b: &Type) -> CResult<Kind> {
        let k = self.sub_synth(g, a, b)?;
        self.sub_synth(g, b, a)?;
        Ok(k)
    }

    fn not_sub(&self, a: &Type, b: &Type) -> super::CheckError {
        self.err(ErrorCode::NotASubtype, format!("{a} is not a subtype of {b}"))
    }

    fn missing_branch(&self, a: &Type, l: &crate::ast::Label) -> super::CheckError {
        self.err(ErrorCode::NotASubtype, format!("{a} has no branch for `{l}`"))
    }
}

/// Renames two scopes to a common fresh binder.
fn share_binder(x1: &Name, b1: &Type, x2: &Name, b2: &Type) -> (Name, Type, Type) {
    if x1 == x2 {
        return (x1.clone(), b1.clone(), b2.clone());
    }
    let y = Name::fresh(x1.as_str());
    let v = Value::Var(y.clone());
    (y, subst_type(b1, x1, &v), subst_type(b2, x2, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{dual, Multiplicity};
    use crate::parser::parse_type;

    fn ty(s: &str) -> Type {
        parse_type(s, &[]).unwrap()
    }

    #[test]
    fn subtyping_examples() {
        let c = Checker::new();
        let g = TypeEnv::new();
        c.sub_check(&g, &Type::Unit, &Type::Unit, Kind::SU).unwrap();
        assert_eq!(c.sub_synth(&g, &ty("{Neg}"), &ty("{Neg, Add}")).unwrap(), Kind::GU);
        assert_eq!(c.sub_synth(&g, &ty("{Neg, Add}"), &ty("{Neg}")).unwrap_err().code, ErrorCode::NotASubtype);
        let x = TypeEnv::new().bind(Name::new("x"), ty("{A, B}"), Multiplicity::Un);
        assert_eq!(c.sub_synth(&x, &ty("case x of { A: Unit, B: Unit }"), &Type::Unit).unwrap(), Kind::SU);
    }

    #[test]
    fn client_accepts_dual_of_server() {
        let c = Checker::new();
        let server = ty("?(l:{Neg, Add}). case l of { Neg: ?Int. !Int. !{EOS}. End, Add: ?Int. ?Int. !Int. !{EOS}. End }");
        let client = ty("!{Neg}. !Int. ?Int. ?{EOS}. End");
        c.sub_check(&TypeEnv::new(), &dual(&server).unwrap(), &client, Kind::SL).unwrap();
        assert!(c.sub_synth(&TypeEnv::new(), &client, &dual(&server).unwrap()).is_err());
    }

    #[test]
    fn recursor_equivalences() {
        let c = Checker::new();
        let g = TypeEnv::new();
        c.equivalent(&g, &ty("rec 0 (!Int.End) [a] ?Int.a"), &ty("!Int.End")).unwrap();
        c.equivalent(&g, &ty("rec 1 (!Int.End) [a] ?Int.a"), &ty("?Int.!Int.End")).unwrap();
        let n = TypeEnv::new().bind(Name::new("n"), Type::Nat, Multiplicity::Un);
        c.equivalent(&n, &ty("rec n (!Int.End) [a] ?Int.a"), &ty("rec n (!Int.End) [b] ?Int.b")).unwrap();
        assert!(c.sub_synth(&n, &ty("rec n (!Int.End) [a] ?Int.a"), &ty("rec n (!Int.End) [b] !Int.b")).is_err());
    }

    #[test]
    fn function_variance() {
        let c = Checker::new();
        let g = TypeEnv::new();
        c.sub_check(&g, &ty("{A, B} -> {A}"), &ty("{A} -o {A, B}"), Kind::GL).unwrap();
        assert!(c.sub_synth(&g, &ty("{A} -> {A}"), &ty("{A, B} -> {A}")).is_err());
        assert!(c.sub_synth(&g, &ty("{A} -o {A}"), &ty("{A} -> {A}")).is_err());
    }
}
