use std::collections::{BTreeMap, HashMap};

use crate::ast::{
    dual, subst_type, BaseKind, Def, Expr, Kind, Label, LabelSet, Multiplicity, Name, Polarity,
    Program, RecMotive, SourcePos, Type, Value,
};

use super::{Cursor, PResult, ParseError, ParseErrorKind, Tok};

/// Parses an LDGV program.
pub fn parse_ldgv(src: &str) -> Result<Program, ParseError> {
    let mut p = P::new(src, &[])?;
    p.program()
}

/// Parses a standalone type; `type_defs` supplies abbreviations.
pub fn parse_type(src: &str, type_defs: &[(Name, Type)]) -> Result<Type, ParseError> {
    let mut p = P::new(src, type_defs)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

/// Parses a standalone expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = P::new(src, &[])?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a standalone value.
pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let mut p = P::new(src, &[])?;
    let pos = p.c.pos();
    let e = p.expr()?;
    p.finish()?;
    to_value(e).ok_or_else(|| ParseError::new(ParseErrorKind::Syntax, pos, "expected a value"))
}

fn to_value(e: Expr) -> Option<Value> {
    match e.canonical() {
        Expr::Val(v) => Some(v),
        _ => None,
    }
}

fn binder(s: &str) -> Name {
    if s == "_" {
        Name::fresh("_")
    } else {
        Name::new(s)
    }
}

struct P {
    c: Cursor,
    type_defs: HashMap<String, Type>,
    tyvars: Vec<Name>,
}

impl P {
    fn new(src: &str, defs: &[(Name, Type)]) -> PResult<P> {
        Ok(P {
            c: Cursor::new(src)?,
            type_defs: defs.iter().map(|(n, t)| (n.to_string(), t.clone())).collect(),
            tyvars: Vec::new(),
        })
    }

    fn finish(&self) -> PResult<()> {
        if self.c.at_eof() {
            Ok(())
        } else {
            Err(self.c.unexpected(&["end of input"]))
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        let mut decls: HashMap<String, (Type, SourcePos)> = HashMap::new();
        let mut defined: HashMap<String, SourcePos> = HashMap::new();
        while !self.c.at_eof() {
            let pos = self.c.pos();
            if self.c.eat_kw("type") {
                let name = match self.c.peek().clone() {
                    Tok::Upper(n) => {
                        self.c.bump();
                        n
                    }
                    _ => return Err(self.c.unexpected(&["type name"])),
                };
                self.c.expect_sym("=")?;
                let t = self.ty()?;
                if self.type_defs.contains_key(&name) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateDefinition,
                        pos,
                        format!("type `{name}` is defined twice"),
                    ));
                }
                self.type_defs.insert(name.clone(), t.clone());
                prog.type_defs.push((Name::new(&name), t));
            } else if self.c.var_at(0) && self.c.sym_at(1, ":") {
                let name = self.c.expect_var()?;
                self.c.bump();
                let t = self.ty()?;
                if decls.contains_key(&name) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateDefinition,
                        pos,
                        format!("`{name}` is declared twice"),
                    ));
                }
                decls.insert(name, (t, pos));
            } else if self.c.var_at(0) {
                let name = self.c.expect_var()?;
                let mut params = Vec::new();
                while self.c.var_at(0) {
                    params.push(self.c.expect_var()?);
                }
                self.c.expect_sym("=")?;
                let body = self.expr()?;
                if defined.insert(name.clone(), pos).is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateDefinition,
                        pos,
                        format!("`{name}` is defined twice"),
                    ));
                }
                let declared = decls.get(&name).map(|(t, _)| t.clone());
                let body = desugar_params(&name, &params, declared.as_ref(), body, pos)?;
                let def = Def { name: Name::new(&name), declared, body, pos };
                if name == "main" {
                    prog.main = Some(def);
                } else {
                    prog.defs.push(def);
                }
            } else {
                return Err(self.c.unexpected(&["`type`", "declaration", "definition"]));
            }
        }
        let mut orphans: Vec<_> = decls.iter().filter(|(n, _)| !defined.contains_key(*n)).collect();
        orphans.sort_by_key(|(_, (_, p))| p.offset);
        if let Some((n, (_, p))) = orphans.first() {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                *p,
                format!("`{n}` is declared but never defined"),
            ));
        }
        Ok(prog)
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<Type> {
        if self.c.is_sym("(") && self.c.var_at(1) && self.c.sym_at(2, ":") {
            let m = self.c.mark();
            self.c.bump();
            let x = binder(&self.c.expect_var()?);
            self.c.bump();
            let dom = self.ty()?;
            self.c.expect_sym(")")?;
            if let Some(mult) = self.arrow() {
                let cod = self.ty()?;
                return Ok(Type::pi(mult, x, dom, cod));
            }
            // `(x : A)` not followed by an arrow is not a type.
            self.c.reset(m);
        }
        let t = self.ty_prefix()?;
        match self.arrow() {
            Some(mult) => {
                let cod = self.ty()?;
                Ok(Type::arrow(mult, t, cod))
            }
            None => Ok(t),
        }
    }

    fn arrow(&mut self) -> Option<Multiplicity> {
        if self.c.eat_sym("->") {
            Some(Multiplicity::Un)
        } else if self.c.eat_sym("-o") {
            Some(Multiplicity::Lin)
        } else {
            None
        }
    }

    fn ty_prefix(&mut self) -> PResult<Type> {
        if self.c.is_sym("!") || self.c.is_sym("?") {
            let send = self.c.is_sym("!");
            self.c.bump();
            let (x, payload) = if self.c.is_sym("(") && self.c.var_at(1) && self.c.sym_at(2, ":") {
                self.c.bump();
                let x = binder(&self.c.expect_var()?);
                self.c.bump();
                let a = self.ty()?;
                self.c.expect_sym(")")?;
                self.c.eat_sym(".");
                (x, a)
            } else {
                let a = self.ty_atom()?;
                self.c.expect_sym(".")?;
                (Name::fresh("x"), a)
            };
            let cont = self.ty_prefix()?;
            return Ok(if send { Type::send(x, payload, cont) } else { Type::recv(x, payload, cont) });
        }
        if self.c.eat_kw("case") {
            let v = self.value_atom(false)?;
            self.c.expect_kw("of")?;
            let branches = self.branches(|p| p.ty())?;
            return Ok(Type::Case { scrutinee: v, branches });
        }
        if self.c.is_kw("rec") || self.c.is_kw("natrec") {
            self.c.bump();
            let v = self.value_atom(true)?;
            let zero = self.ty_atom()?;
            self.c.expect_sym("[")?;
            let a = Name::new(&self.c.expect_var()?);
            let kind = if self.c.eat_sym(":") { Some(self.kind()?) } else { None };
            self.c.expect_sym("]")?;
            self.tyvars.push(a.clone());
            let succ = self.ty_prefix();
            self.tyvars.pop();
            let succ = succ?;
            let kind = kind.unwrap_or(if crate::ast::is_session(&zero) { Kind::SL } else { Kind::GL });
            return Ok(Type::NatRec {
                scrutinee: v,
                zero: Box::new(zero),
                var: a,
                kind,
                succ: Box::new(succ),
            });
        }
        if self.c.upper_at(0, "Sigma") && self.c.sym_at(1, "(") {
            self.c.bump();
            self.c.bump();
            let x = binder(&self.c.expect_var()?);
            self.c.expect_sym(":")?;
            let a = self.ty()?;
            self.c.expect_sym(")")?;
            let b = self.ty_prefix()?;
            return Ok(Type::sigma(x, a, b));
        }
        if self.c.is_kw("dualof") {
            let pos = self.c.bump().pos;
            let t = self.ty_atom()?;
            return dual(&t).map_err(|e| ParseError::new(ParseErrorKind::Syntax, pos, e.to_string()));
        }
        self.ty_atom()
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        let pos = self.c.pos();
        match self.c.peek().clone() {
            Tok::Upper(n) => {
                self.c.bump();
                Ok(match n.as_str() {
                    "Unit" => Type::Unit,
                    "Int" => Type::Int,
                    "Nat" => Type::Nat,
                    "End" => Type::End,
                    _ => self.lookup_type(&n, pos)?,
                })
            }
            Tok::Ident(n) if !super::is_keyword(&n) => {
                self.c.bump();
                let a = Name::new(&n);
                if self.tyvars.contains(&a) {
                    Ok(Type::TVar { name: a, pol: Polarity::Pos })
                } else {
                    self.lookup_type(&n, pos)
                }
            }
            Tok::Sym("~") => {
                self.c.bump();
                let a = Name::new(&self.c.expect_var()?);
                if !self.tyvars.contains(&a) {
                    return Err(ParseError::new(
                        ParseErrorKind::UnknownTypeName,
                        pos,
                        format!("unknown type variable `{a}`"),
                    ));
                }
                Ok(Type::TVar { name: a, pol: Polarity::Neg })
            }
            Tok::Sym("{") => {
                self.c.bump();
                let mut ls = Vec::new();
                loop {
                    if self.c.eat_sym(",") {
                        continue;
                    }
                    if self.c.eat_sym("}") {
                        break;
                    }
                    ls.push(Label::new(&self.c.expect_label()?));
                }
                LabelSet::new(ls)
                    .map(Type::Label)
                    .ok_or_else(|| ParseError::new(ParseErrorKind::Syntax, pos, "empty label set"))
            }
            Tok::Sym("[") => {
                self.c.bump();
                let x = binder(&self.c.expect_var()?);
                self.c.expect_sym(":")?;
                let a = self.ty()?;
                self.c.expect_sym(",")?;
                let b = self.ty()?;
                self.c.expect_sym("]")?;
                Ok(Type::sigma(x, a, b))
            }
            Tok::Sym("(") => {
                self.c.bump();
                let m = self.c.mark();
                if let Ok(lhs) = self.value_atom(false) {
                    if self.c.eat_sym("=") {
                        let rhs = self.value_atom(false)?;
                        self.c.expect_sym(":")?;
                        let index = self.ty()?;
                        self.c.expect_sym(")")?;
                        return Ok(Type::Eq { index: Box::new(index), lhs, rhs });
                    }
                }
                self.c.reset(m);
                let t = self.ty()?;
                self.c.expect_sym(")")?;
                Ok(t)
            }
            _ => Err(self.c.unexpected(&["type"])),
        }
    }

    fn lookup_type(&self, n: &str, pos: SourcePos) -> PResult<Type> {
        self.type_defs.get(n).cloned().ok_or_else(|| {
            ParseError::new(ParseErrorKind::UnknownTypeName, pos, format!("unknown type `{n}`"))
        })
    }

    fn kind(&mut self) -> PResult<Kind> {
        let base = match self.c.expect_var()?.as_str() {
            "session" => BaseKind::Session,
            "general" => BaseKind::General,
            _ => return Err(self.c.unexpected(&["`session`", "`general`"])),
        };
        self.c.expect_sym("^")?;
        let mult = match self.c.expect_var()?.as_str() {
            "un" => Multiplicity::Un,
            "lin" => Multiplicity::Lin,
            _ => return Err(self.c.unexpected(&["`un`", "`lin`"])),
        };
        Ok(Kind::new(base, mult))
    }

    /// `{ L: X, ... }`; stray commas are ignored.
    fn branches<T>(&mut self, mut item: impl FnMut(&mut P) -> PResult<T>) -> PResult<BTreeMap<Label, T>> {
        let pos = self.c.expect_sym("{")?;
        self.c.nest += 1;
        let mut out = BTreeMap::new();
        let r = (|| {
            loop {
                if self.c.eat_sym(",") {
                    continue;
                }
                if self.c.eat_sym("}") {
                    return Ok(());
                }
                let lpos = self.c.pos();
                let l = Label::new(&self.c.expect_label()?);
                self.c.expect_sym(":")?;
                let x = item(self)?;
                if out.insert(l.clone(), x).is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateDefinition,
                        lpos,
                        format!("branch `{l}` appears twice"),
                    ));
                }
            }
        })();
        self.c.nest -= 1;
        r?;
        if out.is_empty() {
            return Err(ParseError::new(ParseErrorKind::Syntax, pos, "empty branch list"));
        }
        Ok(out)
    }

    // ---- values ----

    /// Atomic values. With `nat`, integer literals denote numerals.
    fn value_atom(&mut self, nat: bool) -> PResult<Value> {
        match self.c.peek().clone() {
            Tok::Ident(x) if !super::is_keyword(&x) => {
                self.c.bump();
                Ok(Value::Var(Name::new(&x)))
            }
            Tok::Upper(l) => {
                self.c.bump();
                if l == "Z" {
                    Ok(Value::Zero)
                } else if l == "S" && self.c.is_sym("(") {
                    self.c.bump();
                    let v = self.value_atom(true)?;
                    self.c.expect_sym(")")?;
                    Ok(Value::Succ(Box::new(v)))
                } else {
                    Ok(Value::Label(Label::new(&l)))
                }
            }
            Tok::Quoted(l) => {
                self.c.bump();
                Ok(Value::Label(Label::new(&l)))
            }
            Tok::Int(n) => {
                self.c.bump();
                if nat {
                    Ok(Value::nat(n as u64))
                } else {
                    Ok(Value::Int(n))
                }
            }
            Tok::Sym("(") if self.c.sym_at(1, ")") => {
                self.c.bump();
                self.c.bump();
                Ok(Value::Unit)
            }
            Tok::Sym("(") => {
                self.c.bump();
                let v = self.value_atom(nat)?;
                self.c.expect_sym(")")?;
                Ok(v)
            }
            _ => Err(self.c.unexpected(&["value"])),
        }
    }

    fn value_expr(&mut self) -> PResult<Value> {
        let pos = self.c.pos();
        let e = self.expr()?;
        to_value(e).ok_or_else(|| ParseError::new(ParseErrorKind::Syntax, pos, "expected a value"))
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        if self.c.is_kw("let") {
            return self.let_block();
        }
        if self.c.is_kw("lambda") {
            return self.lambda();
        }
        self.sum()
    }

    fn lambda(&mut self) -> PResult<Expr> {
        self.c.expect_kw("lambda")?;
        let mult = if self.c.eat_kw_soft("lin") {
            Multiplicity::Lin
        } else {
            self.c.eat_kw_soft("un");
            Multiplicity::Un
        };
        self.c.expect_sym("(")?;
        let x = binder(&self.c.expect_var()?);
        self.c.expect_sym(":")?;
        let annot = self.ty()?;
        self.c.expect_sym(")")?;
        self.c.expect_sym(".")?;
        let body = self.expr()?;
        Ok(Expr::Val(Value::Lam { mult, binder: x, annot: Box::new(annot), body: Box::new(body) }))
    }

    fn let_block(&mut self) -> PResult<Expr> {
        self.c.expect_kw("let")?;
        self.c.nest += 1;
        let bindings = self.bindings();
        self.c.nest -= 1;
        let bindings = bindings?;
        let body = self.expr()?;
        Ok(bindings.into_iter().rev().fold(body, |body, b| match b {
            Binding::One(x, m) => Expr::Let { binder: x, bound: Box::new(m), body: Box::new(body) },
            Binding::Two(x, y, m) => {
                Expr::LetPair { fst: x, snd: y, bound: Box::new(m), body: Box::new(body) }
            }
        }))
    }

    fn bindings(&mut self) -> PResult<Vec<Binding>> {
        let mut out = Vec::new();
        loop {
            if self.c.eat_sym(";") {
                continue;
            }
            if self.c.eat_kw("in") {
                if out.is_empty() {
                    return Err(self.c.unexpected(&["binding"]));
                }
                return Ok(out);
            }
            if self.c.var_at(0) && self.c.sym_at(1, "=") {
                let x = binder(&self.c.expect_var()?);
                self.c.bump();
                out.push(Binding::One(x, self.expr()?));
            } else if self.c.at_binding_start() {
                self.c.bump();
                let x = binder(&self.c.expect_var()?);
                self.c.bump();
                let y = binder(&self.c.expect_var()?);
                self.c.bump();
                self.c.bump();
                out.push(Binding::Two(x, y, self.expr()?));
            } else {
                let m = self.expr()?;
                out.push(Binding::One(Name::fresh("_"), m));
            }
        }
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut lhs = self.app()?;
        while self.c.eat_sym("+") {
            let rhs = self.app()?;
            lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn app(&mut self) -> PResult<Expr> {
        let mut f = self.prefix()?;
        while self.c.continues_application() {
            let a = self.atom()?;
            f = Expr::app(f, a);
        }
        Ok(f)
    }

    fn prefix(&mut self) -> PResult<Expr> {
        if self.c.eat_kw("send") {
            return Ok(Expr::Send(Box::new(self.atom()?)));
        }
        if self.c.eat_kw("recv") {
            return Ok(Expr::Recv(Box::new(self.atom()?)));
        }
        if self.c.eat_kw("fork") {
            return Ok(Expr::Fork(Box::new(self.atom()?)));
        }
        if self.c.eat_kw("new") {
            return Ok(Expr::New(self.ty_atom()?));
        }
        if self.c.eat_sym("-") {
            if let Tok::Int(n) = *self.c.peek() {
                self.c.bump();
                return Ok(Expr::Val(Value::Int(-n)));
            }
            return Ok(Expr::Neg(Box::new(self.atom()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.c.peek().clone() {
            Tok::Sym("(") => {
                if self.c.sym_at(1, ")") {
                    self.c.bump();
                    self.c.bump();
                    return Ok(Expr::Val(Value::Unit));
                }
                let pos = self.c.bump().pos;
                self.c.nest += 1;
                let r = (|| {
                    let e = self.expr()?;
                    if self.c.eat_sym(",") {
                        let snd = self.expr()?;
                        self.c.expect_sym(")")?;
                        let fst = to_value(e).ok_or_else(|| {
                            ParseError::new(ParseErrorKind::Syntax, pos, "first pair component must be a value")
                        })?;
                        return Ok(Expr::Pair { binder: Name::fresh("p"), annot: None, fst, snd: Box::new(snd) });
                    }
                    self.c.expect_sym(")")?;
                    Ok(e)
                })();
                self.c.nest -= 1;
                r
            }
            Tok::Sym("<") => {
                self.c.bump();
                self.c.nest += 1;
                let r = (|| {
                    // `<V, N>` is the non-dependent pair.
                    let named = self.c.var_at(0) && (self.c.sym_at(1, "=") || self.c.sym_at(1, ":"));
                    let (x, annot) = if named {
                        let x = binder(&self.c.expect_var()?);
                        let annot = if self.c.eat_sym(":") { Some(Box::new(self.ty()?)) } else { None };
                        self.c.expect_sym("=")?;
                        (x, annot)
                    } else {
                        (Name::fresh("x"), None)
                    };
                    let fst = self.value_expr()?;
                    self.c.expect_sym(",")?;
                    let snd = self.expr()?;
                    self.c.expect_sym(">")?;
                    Ok(Expr::Pair { binder: x, annot, fst, snd: Box::new(snd) })
                })();
                self.c.nest -= 1;
                r
            }
            Tok::Ident(k) if k == "case" => {
                self.c.bump();
                let v = self.value_atom(false)?;
                self.c.expect_kw("of")?;
                let br = self.branches(|p| p.expr())?;
                Ok(Expr::Case(v, br))
            }
            Tok::Ident(k) if k == "rec" || k == "natrec" => self.natrec(),
            Tok::Ident(k) if k == "lambda" => self.lambda(),
            _ => Ok(Expr::Val(self.value_atom(false)?)),
        }
    }

    /// `rec V { Z: M, S(x) with [a : k](y : T): N }`
    fn natrec(&mut self) -> PResult<Expr> {
        self.c.bump();
        let v = self.value_atom(true)?;
        self.c.expect_sym("{")?;
        self.c.nest += 1;
        let r = (|| {
            if !self.c.upper_at(0, "Z") {
                return Err(self.c.unexpected(&["`Z`"]));
            }
            self.c.bump();
            self.c.expect_sym(":")?;
            let zero = self.expr()?;
            while self.c.eat_sym(",") {}
            if !self.c.upper_at(0, "S") {
                return Err(self.c.unexpected(&["`S`"]));
            }
            self.c.bump();
            self.c.expect_sym("(")?;
            let pred = binder(&self.c.expect_var()?);
            self.c.expect_sym(")")?;
            let mut tyvar = None;
            let mut kind = None;
            if self.c.eat_kw("with") && self.c.eat_sym("[") {
                tyvar = Some(Name::new(&self.c.expect_var()?));
                if self.c.eat_sym(":") {
                    kind = Some(self.kind()?);
                }
                self.c.expect_sym("]")?;
            }
            self.c.expect_sym("(")?;
            let rec = binder(&self.c.expect_var()?);
            self.c.expect_sym(":")?;
            // The type variable scopes over the annotation and the arm.
            if let Some(a) = &tyvar {
                self.tyvars.push(a.clone());
            }
            let arm = (|| {
                let rec_ty = self.ty()?;
                self.c.expect_sym(")")?;
                self.c.expect_sym(":")?;
                Ok((rec_ty, self.expr()?))
            })();
            if tyvar.is_some() {
                self.tyvars.pop();
            }
            let (rec_ty, succ) = arm?;
            while self.c.eat_sym(",") {}
            self.c.expect_sym("}")?;
            Ok(Expr::NatRec {
                scrutinee: v.clone(),
                zero: Box::new(zero),
                pred,
                rec,
                motive: Box::new(RecMotive { tyvar, kind, rec_ty }),
                succ: Box::new(succ),
            })
        })();
        self.c.nest -= 1;
        r
    }
}

enum Binding {
    One(Name, Expr),
    Two(Name, Name, Expr),
}

impl Cursor {
    /// Contextual keywords such as `lin` after `lambda`.
    fn eat_kw_soft(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(t) if t == kw) && !self.sym_at(1, "=") {
            self.bump();
            true
        } else {
            false
        }
    }
}

/// Turns `f x y = M` into nested lambdas following the declared type.
fn desugar_params(
    name: &str,
    params: &[String],
    declared: Option<&Type>,
    body: Expr,
    pos: SourcePos,
) -> PResult<Expr> {
    if params.is_empty() {
        return Ok(body);
    }
    let Some(mut ty) = declared.cloned() else {
        return Err(ParseError::new(
            ParseErrorKind::MissingAnnotation,
            pos,
            format!("`{name}` has parameters but no type declaration"),
        ));
    };
    let mut layers = Vec::new();
    for p in params {
        match ty {
            Type::Pi { mult, binder: b, dom, cod } => {
                let x = binder(p);
                let cod = subst_type(&cod, &b, &Value::Var(x.clone()));
                layers.push((mult, x, *dom));
                ty = cod;
            }
            _ => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    pos,
                    format!("`{name}` has more parameters than its declared type has arrows"),
                ))
            }
        }
    }
    Ok(layers.into_iter().rev().fold(body, |body, (mult, x, dom)| {
        Expr::Val(Value::Lam { mult, binder: x, annot: Box::new(dom), body: Box::new(body) })
    }))
}
