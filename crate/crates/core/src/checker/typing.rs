use std::collections::BTreeMap;

use crate::ast::{
    alpha_eq, dual, rename_expr, subst_expr, subst_tvar, subst_type, subst_value, Expr, Kind, Label, LabelSet, Multiplicity,
    Name, Polarity, RecMotive, Type, Value,
};
use crate::env::TypeEnv;

use super::conv::with_eq;
use super::{CResult, Checker, ErrorCode};

/// A synthesized type together with the output environment.
#[derive(Clone, Debug)]
pub struct SynthResult {
    pub ty: Type,
    pub out: TypeEnv,
}

fn res(ty: Type, out: TypeEnv) -> CResult<SynthResult> {
    Ok(SynthResult { ty, out })
}

/// Removes `x` together with the equations that mention it.
fn drop_binder(g: &TypeEnv, x: &Name) -> TypeEnv {
    let mut out = g.remove(x);
    let dependent: Vec<Name> = out
        .entries()
        .iter()
        .filter_map(|e| match e {
            crate::env::EnvEntry::Term { name, ty: ty @ Type::Eq { .. }, .. } if ty.mentions(x) => Some(name.clone()),
            _ => None,
        })
        .collect();
    for n in dependent {
        out = out.remove(&n);
    }
    out
}

impl Checker {
    /// A name for a local binder that does not clash with `g` or `avoid`.
    fn local(&self, g: &TypeEnv, x: &Name, avoid: Option<&Type>) -> Name {
        if x.is_wildcard() || g.contains(x) || avoid.is_some_and(|t| t.mentions(x)) {
            Name::fresh(x.as_str())
        } else {
            x.clone()
        }
    }

    fn renamed(body: &Expr, from: &Name, to: &Name) -> Expr {
        if from == to || from.is_wildcard() {
            body.clone()
        } else {
            rename_expr(body, from, to)
        }
    }

    fn require_consumed(&self, out: &TypeEnv, x: &Name, display: &Name) -> CResult<()> {
        match out.lookup_term(x) {
            Some((_, Multiplicity::Lin)) => Err(self.err(
                ErrorCode::LinearityViolation,
                format!("linear variable `{display}` is not consumed"),
            )),
            _ => Ok(()),
        }
    }

    fn branches_agree(&self, outs: &[(Label, TypeEnv)]) -> CResult<TypeEnv> {
        let (l0, first) = &outs[0];
        for (l, o) in &outs[1..] {
            if let Err(x) = first.same_bindings(o) {
                return Err(self.err(
                    ErrorCode::BranchEnvMismatch,
                    format!("branches `{l0}` and `{l}` use `{x}` differently"),
                ));
            }
        }
        Ok(first.clone())
    }

    pub fn type_synth(&self, g: &TypeEnv, m: &Expr) -> CResult<SynthResult> {
        match m {
            Expr::Val(v) => self.synth_value(g, v),
            Expr::App(f, n) => {
                let _r = self.rule("A-Pi-E");
                let SynthResult { ty: ft, out: t1 } = self.type_synth(g, f)?;
                let Type::Pi { binder, dom, cod, .. } = self.unfold(&t1, &ft)? else {
                    return Err(self.err(ErrorCode::NotASubtype, format!("{ft} is not a function type")));
                };
                if cod.mentions(&binder) {
                    let Some(v) = n.as_value() else {
                        return Err(self.err(
                            ErrorCode::ValueRestriction,
                            format!("argument to a dependent function of type {ft} must be a value"),
                        ));
                    };
                    let t2 = self.type_check(&t1, n, &dom)?;
                    let b = subst_type(&cod, &binder, v);
                    self.kind_synth(&t2.unr(), &b).or_else(|_| self.kind_synth(g, &b))?;
                    res(b, t2)
                } else {
                    let t2 = self.type_check(&t1, n, &dom)?;
                    res(*cod, t2)
                }
            }
            Expr::Send(n) => {
                let _r = self.rule("A-Ssn-Send-E");
                let SynthResult { ty, out } = self.type_synth(g, n)?;
                match self.unfold(g, &ty)? {
                    Type::Send { binder, payload, cont } => {
                        res(Type::Pi { mult: Multiplicity::Lin, binder, dom: payload, cod: cont }, out)
                    }
                    t => Err(self.err(ErrorCode::NotASubtype, format!("cannot send on a channel of type {t}"))),
                }
            }
            Expr::Recv(n) => {
                let _r = self.rule("A-Ssn-Recv-E");
                let SynthResult { ty, out } = self.type_synth(g, n)?;
                match self.unfold(g, &ty)? {
                    Type::Recv { binder, payload, cont } => res(Type::Sigma { binder, fst: payload, snd: cont }, out),
                    t => Err(self.err(ErrorCode::NotASubtype, format!("cannot receive on a channel of type {t}"))),
                }
            }
            Expr::New(s) => {
                let _r = self.rule("A-Ssn-I");
                self.kind_check(&g.unr(), s, Kind::SL)?;
                let d = dual(s).map_err(|e| self.err(ErrorCode::KindMismatch, e.to_string()))?;
                res(Type::sigma(Name::fresh("c"), s.clone(), d), g.clone())
            }
            Expr::Fork(n) => {
                let _r = self.rule("A-Fork");
                let SynthResult { ty, out } = self.type_synth(g, n)?;
                match self.unfold(g, &ty)? {
                    Type::Unit | Type::End => res(Type::Unit, out),
                    t => Err(self.err(ErrorCode::NotASubtype, format!("forked thread has type {t}, expected Unit"))),
                }
            }
            Expr::Neg(n) => {
                let out = self.type_check(g, n, &Type::Int)?;
                res(Type::Int, out)
            }
            Expr::Add(a, b) => {
                let t1 = self.type_check(g, a, &Type::Int)?;
                let t2 = self.type_check(&t1, b, &Type::Int)?;
                res(Type::Int, t2)
            }
            Expr::Let { binder, bound, body } => self.let_rule(g, binder, bound, body, None),
            Expr::LetPair { fst, snd, bound, body } => self.let_pair(g, fst, snd, bound, body, None),
            Expr::Pair { binder, annot, fst, snd } => self.pair_synth(g, binder, annot.as_deref(), fst, snd),
            Expr::Case(v, branches) => self.case_rule(g, v, branches, None),
            Expr::NatRec { scrutinee, zero, pred, rec, motive, succ } => {
                self.natrec(g, scrutinee, zero, pred, rec, motive, succ)
            }
        }
    }

    fn synth_value(&self, g: &TypeEnv, v: &Value) -> CResult<SynthResult> {
        match v {
            Value::Var(x) => self.name(g, x),
            Value::Chan(c) => self.name(g, &Name::chan(*c)),
            Value::Label(l) => {
                let _r = self.rule("A-Lab-I");
                res(Type::Label(LabelSet::singleton(l.clone())), g.clone())
            }
            Value::Unit => {
                let _r = self.rule("A-Unit-I");
                res(Type::Unit, g.clone())
            }
            Value::Int(_) => res(Type::Int, g.clone()),
            Value::Zero => res(Type::Nat, g.clone()),
            Value::Succ(w) => {
                let out = self.type_check(g, &Expr::Val((**w).clone()), &Type::Nat)?;
                res(Type::Nat, out)
            }
            Value::Lam { mult, binder, annot, body } => {
                let _r = self.rule("A-Pi-I");
                self.kind_synth(&g.unr(), annot)?;
                let x = self.local(g, binder, None);
                let body = Self::renamed(body, binder, &x);
                let g1 = self.bind(g, &x, annot)?;
                let SynthResult { ty, out } = self.type_synth(&g1, &body)?;
                self.require_consumed(&out, &x, binder)?;
                let out = drop_binder(&out, &x);
                self.lambda_env(g, &out, *mult)?;
                if ty.mentions(&x) && g1.lookup_term(&x).is_some_and(|(_, m)| m == Multiplicity::Lin) {
                    return Err(self.err(
                        ErrorCode::DependencyOnLinear,
                        format!("result type {ty} depends on linear parameter `{binder}`"),
                    ));
                }
                res(Type::Pi { mult: *mult, binder: x, dom: annot.clone(), cod: Box::new(ty) }, out)
            }
            Value::Pair { binder, annot, fst, snd } => {
                self.pair_synth(g, binder, annot.as_deref(), fst, &Expr::Val((**snd).clone()))
            }
            Value::SendPartial(w) => self.type_synth(g, &Expr::Send(Box::new(Expr::Val((**w).clone())))),
        }
    }

    fn name(&self, g: &TypeEnv, x: &Name) -> CResult<SynthResult> {
        let _r = self.rule("A-Name");
        match g.lookup_term(x) {
            Some((ty, Multiplicity::Lin)) => res(ty.clone(), g.consume(x).map_err(|e| self.env_err(e))?),
            Some((ty, Multiplicity::Un)) => res(ty.clone(), g.clone()),
            None if g.was_consumed(x) => {
                Err(self.err(ErrorCode::LinearityViolation, format!("linear variable `{x}` is used more than once")))
            }
            None => Err(self.err(ErrorCode::UnboundName, format!("unbound name `{x}`"))),
        }
    }

    /// An unrestricted lambda may not capture linear resources.
    fn lambda_env(&self, g: &TypeEnv, out: &TypeEnv, mult: Multiplicity) -> CResult<()> {
        if mult == Multiplicity::Un {
            if let Err(x) = out.same_bindings(g) {
                return Err(self.err(
                    ErrorCode::LinearityViolation,
                    format!("unrestricted function uses linear variable `{x}` from its context"),
                ));
            }
        }
        Ok(())
    }

    pub fn type_check(&self, g: &TypeEnv, m: &Expr, a: &Type) -> CResult<TypeEnv> {
        match m {
            Expr::Val(Value::Lam { mult, binder, annot, body }) => {
                if let Ok(Type::Pi { mult: n, binder: y, dom, cod }) = self.unfold(g, a) {
                    let _r = self.rule("A-Pi-I");
                    if !mult.leq(n) {
                        return Err(self.err(
                            ErrorCode::NotASubtype,
                            format!("{mult} function where an {n} function of type {a} is expected"),
                        ));
                    }
                    self.kind_synth(&g.unr(), annot)?;
                    self.sub_synth(&g.unr(), &dom, annot)?;
                    let x = self.local(g, binder, Some(a));
                    let body = Self::renamed(body, binder, &x);
                    let cod = subst_type(&cod, &y, &Value::Var(x.clone()));
                    let g1 = self.bind(g, &x, &dom)?;
                    let out = self.type_check(&g1, &body, &cod)?;
                    self.require_consumed(&out, &x, binder)?;
                    let out = drop_binder(&out, &x);
                    self.lambda_env(g, &out, *mult)?;
                    return Ok(out);
                }
                self.subsume(g, m, a)
            }
            Expr::Val(Value::Pair { binder, fst, snd, .. }) => {
                self.pair_check(g, binder, fst, &Expr::Val((**snd).clone()), a, m)
            }
            Expr::Pair { binder, fst, snd, .. } => self.pair_check(g, binder, fst, snd, a, m),
            Expr::Let { binder, bound, body } => Ok(self.let_rule(g, binder, bound, body, Some(a))?.out),
            Expr::LetPair { fst, snd, bound, body } => Ok(self.let_pair(g, fst, snd, bound, body, Some(a))?.out),
            Expr::Case(v, branches) => Ok(self.case_rule(g, v, branches, Some(a))?.out),
            _ => self.subsume(g, m, a),
        }
    }

    fn subsume(&self, g: &TypeEnv, m: &Expr, a: &Type) -> CResult<TypeEnv> {
        let _r = self.rule("A-Sub-Type");
        let SynthResult { ty, out } = self.type_synth(g, m)?;
        self.sub_synth(&g.unr(), &ty, a)?;
        Ok(out)
    }

    fn pair_synth(
        &self,
        g: &TypeEnv,
        binder: &Name,
        annot: Option<&Type>,
        fst: &Value,
        snd: &Expr,
    ) -> CResult<SynthResult> {
        let _r = self.rule("A-Sigma-I");
        let (a, t1) = match annot {
            Some(a) => {
                self.kind_synth(&g.unr(), a)?;
                (a.clone(), self.type_check(g, &Expr::Val(fst.clone()), a)?)
            }
            None => {
                let SynthResult { ty, out } = self.synth_value(g, fst)?;
                (ty, out)
            }
        };
        let snd = subst_expr(snd, binder, fst);
        let SynthResult { ty: b, out } = self.type_synth(&t1, &snd)?;
        res(Type::sigma(Name::fresh("p"), a, b), out)
    }

    fn pair_check(&self, g: &TypeEnv, binder: &Name, fst: &Value, snd: &Expr, a: &Type, whole: &Expr) -> CResult<TypeEnv> {
        let Ok(Type::Sigma { binder: z, fst: a1, snd: b1 }) = self.unfold(g, a) else {
            return self.subsume(g, whole, a);
        };
        let _r = self.rule("A-Sigma-I");
        let t1 = self.type_check(g, &Expr::Val(fst.clone()), &a1)?;
        let snd = subst_expr(snd, binder, fst);
        self.type_check(&t1, &snd, &subst_type(&b1, &z, fst))
    }

    fn let_rule(&self, g: &TypeEnv, binder: &Name, bound: &Expr, body: &Expr, expected: Option<&Type>) -> CResult<SynthResult> {
        let _r = self.rule("A-Let");
        let SynthResult { ty: a, out: t1 } = self.type_synth(g, bound)?;
        let x = self.local(g, binder, expected);
        let body = Self::renamed(body, binder, &x);
        let g1 = self.bind(&t1, &x, &a)?;
        let (ty, out) = match expected {
            Some(e) => (e.clone(), self.type_check(&g1, &body, e)?),
            None => {
                let SynthResult { ty, out } = self.type_synth(&g1, &body)?;
                (ty, out)
            }
        };
        self.require_consumed(&out, &x, binder)?;
        let out = drop_binder(&out, &x);
        let ty = if ty.mentions(&x) {
            match bound.as_value() {
                Some(v) => subst_type(&ty, &x, v),
                None => {
                    return Err(self.err(
                        ErrorCode::ValueRestriction,
                        format!("type {ty} depends on `{binder}`, which is not bound to a value"),
                    ))
                }
            }
        } else {
            ty
        };
        res(ty, out)
    }

    fn let_pair(
        &self,
        g: &TypeEnv,
        fst: &Name,
        snd: &Name,
        bound: &Expr,
        body: &Expr,
        expected: Option<&Type>,
    ) -> CResult<SynthResult> {
        let SynthResult { ty: bt, out: t1 } = self.type_synth(g, bound)?;
        if let Expr::Val(Value::Pair { binder, fst: v, snd: w, .. }) = bound.clone().canonical() {
            // A literal pair is taken apart by substitution, which keeps
            // the dependency of the second component on the first.
            let _r = self.rule("A-Sigma-E");
            let w = subst_value(&w, &binder, &v);
            let y = Name::fresh(snd.as_str());
            let body = subst_expr(&subst_expr(&Self::renamed(body, snd, &y), fst, &v), &y, &w);
            return match expected {
                Some(e) => res(e.clone(), self.type_check(g, &body, e)?),
                None => self.type_synth(g, &body),
            };
        }
        let Type::Sigma { binder: z, fst: a, snd: b } = self.unfold(&t1, &bt)? else {
            return Err(self.err(ErrorCode::NotASubtype, format!("cannot destructure a value of type {bt}")));
        };
        let x = self.local(g, fst, expected);
        let y = {
            let y = self.local(g, snd, expected);
            if y == x { Name::fresh(snd.as_str()) } else { y }
        };
        let body = Self::renamed(&Self::renamed(body, fst, &x), snd, &y);
        let by = subst_type(&b, &z, &Value::Var(x.clone()));
        let ka = self.kind_synth(&t1.unr(), &a)?;
        let labels = match self.unfold(&t1, &a) {
            Ok(Type::Label(ls)) if ka.mult == Multiplicity::Un => Some(ls),
            _ => None,
        };
        let g1 = t1.bind(x.clone(), (*a).clone(), ka.mult);
        let Some(ls) = labels else {
            let _r = self.rule("A-Sigma-E");
            let g2 = self.bind(&g1, &y, &by)?;
            let (ty, out) = self.synth_or_check(&g2, &body, expected)?;
            self.require_consumed(&out, &x, fst)?;
            self.require_consumed(&out, &y, snd)?;
            let out = drop_binder(&drop_binder(&out, &y), &x);
            if ty.mentions(&x) || ty.mentions(&y) {
                return Err(self.err(
                    ErrorCode::ValueRestriction,
                    format!("type {ty} depends on a component bound by the pair pattern"),
                ));
            }
            return res(ty, out);
        };
        let _r = self.rule("A-Sigma-G");
        let mut outs = Vec::new();
        let mut tys = Vec::new();
        for l in ls.iter() {
            let (gl, _) = with_eq(&g1, &x, Type::Label(ls.clone()), Value::Label(l.clone()));
            let gl = self.bind(&gl, &y, &by)?;
            let (ty, out) = self.synth_or_check(&gl, &body, expected)?;
            self.require_consumed(&out, &y, snd)?;
            let out = drop_binder(&drop_binder(&out, &y), &x);
            let ty = subst_type(&ty, &x, &Value::Label(l.clone()));
            if ty.mentions(&y) {
                return Err(self.err(
                    ErrorCode::ValueRestriction,
                    format!("type {ty} depends on `{snd}` bound by the pair pattern"),
                ));
            }
            outs.push((l.clone(), out));
            tys.push(ty);
        }
        let out = self.branches_agree(&outs)?;
        let ty = match expected {
            Some(e) => e.clone(),
            None => self.common_type(&out, tys)?,
        };
        res(ty, out)
    }

    fn synth_or_check(&self, g: &TypeEnv, m: &Expr, expected: Option<&Type>) -> CResult<(Type, TypeEnv)> {
        match expected {
            Some(e) => Ok((e.clone(), self.type_check(g, m, e)?)),
            None => {
                let SynthResult { ty, out } = self.type_synth(g, m)?;
                Ok((ty, out))
            }
        }
    }

    /// A single type covering all branch results.
    fn common_type(&self, g: &TypeEnv, tys: Vec<Type>) -> CResult<Type> {
        if tys.iter().all(|t| alpha_eq(t, &tys[0])) {
            return Ok(tys[0].clone());
        }
        let u = g.unr();
        for cand in &tys {
            if tys.iter().all(|t| self.sub_synth(&u, t, cand).is_ok()) {
                return Ok(cand.clone());
            }
        }
        Err(self.err(
            ErrorCode::NotASubtype,
            format!(
                "branch types {} have no common supertype",
                tys.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
            ),
        ))
    }

    fn case_rule(
        &self,
        g: &TypeEnv,
        v: &Value,
        branches: &BTreeMap<Label, Expr>,
        expected: Option<&Type>,
    ) -> CResult<SynthResult> {
        if let Ok(Value::Label(l)) = self.convert_value(g, v) {
            let _r = self.rule("A-Lab-E1");
            let m = branches
                .get(&l)
                .ok_or_else(|| self.err(ErrorCode::NotASubtype, format!("case has no branch for `{l}`")))?;
            let (ty, out) = self.synth_or_check(g, m, expected)?;
            return res(ty, out);
        }
        let _r = self.rule("A-Lab-E2");
        let (x, ls) = self.label_type_of(g, v)?;
        let mut outs = Vec::new();
        let mut tys = BTreeMap::new();
        for l in ls.iter() {
            let m = branches
                .get(l)
                .ok_or_else(|| self.err(ErrorCode::NotASubtype, format!("case has no branch for `{l}`")))?;
            let (gl, eq) = with_eq(g, &x, Type::Label(ls.clone()), Value::Label(l.clone()));
            let (ty, out) = self.synth_or_check(&gl, m, expected)?;
            outs.push((l.clone(), out.remove(&eq)));
            tys.insert(l.clone(), ty);
        }
        let out = self.branches_agree(&outs)?;
        let ty = match expected {
            Some(e) => e.clone(),
            None => {
                let first = tys.values().next().expect("non-empty").clone();
                if tys.values().all(|t| alpha_eq(t, &first)) {
                    first
                } else {
                    Type::Case { scrutinee: Value::Var(x), branches: tys }
                }
            }
        };
        res(ty, out)
    }

    #[allow(clippy::too_many_arguments)]
    fn natrec(
        &self,
        g: &TypeEnv,
        v: &Value,
        zero: &Expr,
        pred: &Name,
        rec: &Name,
        motive: &RecMotive,
        succ: &Expr,
    ) -> CResult<SynthResult> {
        let _r = self.rule("A-Nat-E");
        self.check_nat_value(g, v)?;
        let t = &motive.rec_ty;
        let gz = match v {
            Value::Var(n) => with_eq(g, n, Type::Nat, Value::Zero).0,
            _ => g.clone(),
        };
        let x = self.local(g, pred, None);
        let y = self.local(g, rec, None);
        let succ = Self::renamed(&Self::renamed(succ, pred, &x), rec, &y);
        let succ_env = |kind_env: TypeEnv| -> CResult<TypeEnv> {
            let gs = kind_env.bind(x.clone(), Type::Nat, Multiplicity::Un);
            let gs = self.bind(&gs, &y, t)?;
            Ok(match v {
                Value::Var(n) => with_eq(&gs, n, Type::Nat, Value::Succ(Box::new(Value::Var(x.clone())))).0,
                _ => gs,
            })
        };
        let check_zero_pure = |out: &TypeEnv| -> CResult<()> {
            let out = match v {
                Value::Var(_) => out.entries().iter().fold(out.clone(), |o, e| {
                    if gz.lookup(e.name()).is_some() && g.lookup(e.name()).is_none() {
                        o.remove(e.name())
                    } else {
                        o
                    }
                }),
                _ => out.clone(),
            };
            out.same_bindings(g).map_err(|n| {
                self.err(ErrorCode::LinearityViolation, format!("the zero arm of a recursor consumes `{n}`"))
            })
        };
        let alpha = motive.tyvar.as_ref().filter(|a| t.free_tvars().contains(*a));
        let Some(alpha) = alpha else {
            self.kind_synth(&g.unr(), t)?;
            let out = self.type_check(&gz, zero, t)?;
            check_zero_pure(&out)?;
            let gs = succ_env(g.unr())?;
            let out1 = self.type_check(&gs, &succ, t)?;
            self.require_consumed(&out1, &y, rec)?;
            return res(t.clone(), g.clone());
        };
        let SynthResult { ty: u0, out } = self.type_synth(&gz, zero)?;
        check_zero_pure(&out)?;
        let a0 = match_tvar(t, &u0, alpha).ok_or_else(|| {
            self.err(ErrorCode::NotASubtype, format!("cannot match the zero arm type {u0} against {t}"))
        })?;
        let kappa = match motive.kind {
            Some(k) => k,
            None => self.kind_synth(&g.unr(), &a0)?,
        };
        let gs = succ_env(g.unr().bind_tyvar(alpha.clone(), kappa))?;
        let SynthResult { ty: u1, out: out1 } = self.type_synth(&gs, &succ)?;
        self.require_consumed(&out1, &y, rec)?;
        let b = match_tvar(t, &u1, alpha).ok_or_else(|| {
            self.err(ErrorCode::NotASubtype, format!("cannot match the successor arm type {u1} against {t}"))
        })?;
        let inst = |s: &Type| {
            subst_tvar(t, alpha, s).map_err(|e| self.err(ErrorCode::KindMismatch, e.to_string()))
        };
        self.sub_synth(&gz.unr(), &u0, &inst(&a0)?)?;
        self.sub_synth(&gs.unr(), &u1, &inst(&b)?)?;
        let r = Type::NatRec {
            scrutinee: v.clone(),
            zero: Box::new(a0),
            var: alpha.clone(),
            kind: kappa,
            succ: Box::new(b),
        };
        self.kind_synth(&g.unr(), &r)?;
        res(inst(&r)?, g.clone())
    }
}

/// First-order matching of `pattern` against `t` at the type variable `a`.
/// A negative occurrence yields the dual of the matched type.
pub(crate) fn match_tvar(pattern: &Type, t: &Type, a: &Name) -> Option<Type> {
    let mut found = None;
    go(pattern, t, a, &mut found);
    return found;

    fn record(found: &mut Option<Type>, cand: Type) {
        if found.is_none() {
            *found = Some(cand);
        }
    }

    fn go(p: &Type, t: &Type, a: &Name, found: &mut Option<Type>) {
        match (p, t) {
            (Type::TVar { name, pol }, _) if name == a => match pol {
                Polarity::Pos => record(found, t.clone()),
                Polarity::Neg => {
                    if let Ok(d) = dual(t) {
                        record(found, d)
                    }
                }
            },
            (Type::Pi { dom: p1, cod: p2, .. }, Type::Pi { dom: t1, cod: t2, .. })
            | (Type::Sigma { fst: p1, snd: p2, .. }, Type::Sigma { fst: t1, snd: t2, .. })
            | (Type::Send { payload: p1, cont: p2, .. }, Type::Send { payload: t1, cont: t2, .. })
            | (Type::Recv { payload: p1, cont: p2, .. }, Type::Recv { payload: t1, cont: t2, .. }) => {
                go(p1, t1, a, found);
                go(p2, t2, a, found);
            }
            (Type::Case { branches: pb, .. }, Type::Case { branches: tb, .. }) => {
                for (l, pl) in pb {
                    if let Some(tl) = tb.get(l) {
                        go(pl, tl, a, found);
                    }
                }
            }
            (Type::NatRec { zero: p0, var, succ: p1, .. }, Type::NatRec { zero: t0, succ: t1, .. }) => {
                go(p0, t0, a, found);
                if var != a {
                    go(p1, t1, a, found);
                }
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_ldgv, parse_type};

    fn ty(s: &str) -> Type {
        parse_type(s, &[]).unwrap()
    }

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn unit_and_send() {
        let c = Checker::new();
        let r = c.type_synth(&TypeEnv::new(), &Expr::Val(Value::Unit)).unwrap();
        assert_eq!(r.ty, Type::Unit);
        assert!(r.out.is_empty());
        let g = TypeEnv::new().bind(n("c"), ty("!(x:{A}) End"), Multiplicity::Lin);
        let r = c.type_synth(&g, &Expr::Send(Box::new(Expr::var("c")))).unwrap();
        assert!(matches!(r.ty, Type::Pi { mult: Multiplicity::Lin, .. }));
        assert!(r.out.is_empty());
    }

    #[test]
    fn linear_use_is_tracked() {
        let c = Checker::new();
        let g = TypeEnv::new().bind(n("c"), ty("!Int. End"), Multiplicity::Lin);
        let twice = Expr::let_(
            "a",
            Expr::app(Expr::Send(Box::new(Expr::var("c"))), Expr::Val(Value::Int(1))),
            Expr::app(Expr::Send(Box::new(Expr::var("c"))), Expr::Val(Value::Int(2))),
        );
        assert_eq!(c.type_synth(&g, &twice).unwrap_err().code, ErrorCode::LinearityViolation);
        let dropped = Expr::Val(Value::Lam {
            mult: Multiplicity::Un,
            binder: n("d"),
            annot: Box::new(ty("!Int. End")),
            body: Box::new(Expr::Val(Value::Unit)),
        });
        assert_eq!(c.type_synth(&TypeEnv::new(), &dropped).unwrap_err().code, ErrorCode::LinearityViolation);
    }

    #[test]
    fn match_tvar_examples() {
        let a = n("a");
        let p = ty("Int -> !Int.End -> End");
        let pat = Type::arrow(
            Multiplicity::Un,
            Type::Int,
            Type::arrow(Multiplicity::Un, Type::TVar { name: a.clone(), pol: Polarity::Pos }, Type::End),
        );
        assert!(alpha_eq(&match_tvar(&pat, &p, &a).unwrap(), &ty("!Int.End")));
        assert!(match_tvar(&Type::Int, &p, &a).is_none());
    }

    #[test]
    fn listing_servers_check() {
        let src = r#"
type TServer = ?(l:{Neg, Add}). case l of
  { Neg: ?Int. !Int. !{EOS}. End
  , Add: ?Int. ?Int. !Int. !{EOS}. End }

lServer : TServer -> End
lServer c =
  let (l, c) = recv c
      (x, c) = recv c
  in case l of
  { Neg: let c = send c (-x) in send c EOS,
  , Add: let (y, c) = recv c
             c = send c (x+y)
         in send c EOS
  }
"#;
        let p = parse_ldgv(src).unwrap();
        let c = Checker::new();
        let d = &p.defs[0];
        c.type_check(&TypeEnv::new(), &d.body, d.declared.as_ref().unwrap()).unwrap();
    }
}
