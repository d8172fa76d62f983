use std::collections::{BTreeMap, HashMap};

use crate::ast::{Label, Multiplicity, Name, SourcePos};
use crate::lsst::{lsst_dual, LExpr, LType, LsstDef, LsstProgram};

use super::{is_keyword, Cursor, PResult, ParseError, ParseErrorKind, Tok};

/// Parses an LSST program.
pub fn parse_lsst(src: &str) -> Result<LsstProgram, ParseError> {
    let mut p = P { c: Cursor::new(src)?, type_defs: HashMap::new() };
    p.program()
}

/// Parses a standalone LSST type.
pub fn parse_lsst_type(src: &str, type_defs: &[(Name, LType)]) -> Result<LType, ParseError> {
    let mut p = P {
        c: Cursor::new(src)?,
        type_defs: type_defs.iter().map(|(n, t)| (n.to_string(), t.clone())).collect(),
    };
    let t = p.ty()?;
    if !p.c.at_eof() {
        return Err(p.c.unexpected(&["end of input"]));
    }
    Ok(t)
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
    type_defs: HashMap<String, LType>,
}

impl P {
    fn program(&mut self) -> PResult<LsstProgram> {
        let mut prog = LsstProgram::default();
        let mut decls: HashMap<String, (LType, SourcePos)> = HashMap::new();
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
                if self.type_defs.insert(name.clone(), t.clone()).is_some() {
                    return Err(dup(pos, &name));
                }
                prog.type_defs.push((Name::new(&name), t));
            } else if self.c.var_at(0) && self.c.sym_at(1, ":") {
                let name = self.c.expect_var()?;
                self.c.bump();
                let t = self.ty()?;
                if decls.insert(name.clone(), (t, pos)).is_some() {
                    return Err(dup(pos, &name));
                }
            } else if self.c.var_at(0) {
                let name = self.c.expect_var()?;
                let mut params = Vec::new();
                while self.c.var_at(0) {
                    params.push(self.c.expect_var()?);
                }
                self.c.expect_sym("=")?;
                let body = self.expr()?;
                if defined.insert(name.clone(), pos).is_some() {
                    return Err(dup(pos, &name));
                }
                let declared = decls.get(&name).map(|(t, _)| t.clone());
                let body = desugar(&name, &params, declared.as_ref(), body, pos)?;
                let def = LsstDef { name: Name::new(&name), declared, body, pos };
                if name == "main" {
                    prog.main = Some(def);
                } else {
                    prog.defs.push(def);
                }
            } else {
                return Err(self.c.unexpected(&["`type`", "declaration", "definition"]));
            }
        }
        if let Some((n, (_, p))) =
            decls.iter().filter(|(n, _)| !defined.contains_key(*n)).min_by_key(|(_, (_, p))| p.offset)
        {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                *p,
                format!("`{n}` is declared but never defined"),
            ));
        }
        Ok(prog)
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<LType> {
        let a = self.ty_prod()?;
        if self.c.eat_sym("->") {
            return Ok(LType::fun(Multiplicity::Un, a, self.ty()?));
        }
        if self.c.eat_sym("-o") {
            return Ok(LType::fun(Multiplicity::Lin, a, self.ty()?));
        }
        Ok(a)
    }

    fn ty_prod(&mut self) -> PResult<LType> {
        let a = self.ty_prefix()?;
        if self.c.eat_sym("*") {
            return Ok(LType::prod(a, self.ty_prod()?));
        }
        Ok(a)
    }

    fn ty_prefix(&mut self) -> PResult<LType> {
        if self.c.is_sym("!") || self.c.is_sym("?") {
            let send = self.c.bump().tok == Tok::Sym("!");
            let a = self.ty_atom()?;
            self.c.expect_sym(".")?;
            let s = self.ty_prefix()?;
            return Ok(if send { LType::send(a, s) } else { LType::recv(a, s) });
        }
        if self.c.is_sym("(") && self.c.sym_at(1, "+") && self.c.sym_at(2, ")") {
            self.c.bump();
            self.c.bump();
            self.c.bump();
            return Ok(LType::Select(self.choice()?));
        }
        if self.c.is_sym("+") && self.c.sym_at(1, "{") {
            self.c.bump();
            return Ok(LType::Select(self.choice()?));
        }
        if self.c.eat_sym("&") {
            return Ok(LType::Branch(self.choice()?));
        }
        if self.c.is_kw("end") {
            self.c.bump();
            if self.c.eat_sym("!") {
                return Ok(LType::EndOut);
            }
            if self.c.eat_sym("?") {
                return Ok(LType::EndIn);
            }
            return Err(self.c.unexpected(&["`!`", "`?`"]));
        }
        if self.c.is_kw("dualof") {
            let pos = self.c.bump().pos;
            let t = self.ty_atom()?;
            return lsst_dual(&t).map_err(|e| ParseError::new(ParseErrorKind::Syntax, pos, e.to_string()));
        }
        self.ty_atom()
    }

    fn ty_atom(&mut self) -> PResult<LType> {
        let pos = self.c.pos();
        match self.c.peek().clone() {
            Tok::Upper(n) => {
                self.c.bump();
                match n.as_str() {
                    "Unit" => Ok(LType::Unit),
                    "Int" => Ok(LType::Int),
                    _ => self.type_defs.get(&n).cloned().ok_or_else(|| {
                        ParseError::new(ParseErrorKind::UnknownTypeName, pos, format!("unknown type `{n}`"))
                    }),
                }
            }
            Tok::Sym("(") => {
                self.c.bump();
                let t = self.ty()?;
                self.c.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(k) if k == "end" => self.ty_prefix(),
            Tok::Sym("&") | Tok::Sym("+") => self.ty_prefix(),
            _ => Err(self.c.unexpected(&["type"])),
        }
    }

    fn choice(&mut self) -> PResult<BTreeMap<Label, LType>> {
        let pos = self.c.expect_sym("{")?;
        let mut out = BTreeMap::new();
        loop {
            if self.c.eat_sym(",") {
                continue;
            }
            if self.c.eat_sym("}") {
                break;
            }
            let lpos = self.c.pos();
            let l = Label::new(&self.c.expect_label()?);
            self.c.expect_sym(":")?;
            let t = self.ty()?;
            if out.insert(l.clone(), t).is_some() {
                return Err(dup(lpos, l.as_str()));
            }
        }
        if out.is_empty() {
            return Err(ParseError::new(ParseErrorKind::Syntax, pos, "empty choice"));
        }
        Ok(out)
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<LExpr> {
        if self.c.is_kw("let") {
            return self.let_block();
        }
        if self.c.is_kw("lambda") {
            return self.lambda();
        }
        self.sum()
    }

    fn lambda(&mut self) -> PResult<LExpr> {
        self.c.expect_kw("lambda")?;
        let mult = if self.c.kw_at(0, "lin") && !self.c.sym_at(1, "=") {
            self.c.bump();
            Multiplicity::Lin
        } else {
            if self.c.kw_at(0, "un") {
                self.c.bump();
            }
            Multiplicity::Un
        };
        self.c.expect_sym("(")?;
        let x = binder(&self.c.expect_var()?);
        self.c.expect_sym(":")?;
        let annot = self.ty()?;
        self.c.expect_sym(")")?;
        self.c.expect_sym(".")?;
        let body = self.expr()?;
        Ok(LExpr::Lam { mult, binder: x, annot, body: Box::new(body) })
    }

    fn let_block(&mut self) -> PResult<LExpr> {
        self.c.expect_kw("let")?;
        self.c.nest += 1;
        let bs = self.bindings();
        self.c.nest -= 1;
        let bs = bs?;
        let body = self.expr()?;
        Ok(bs.into_iter().rev().fold(body, |body, b| match b {
            (x, None, m) => LExpr::Let { binder: x, bound: Box::new(m), body: Box::new(body) },
            (x, Some(y), m) => LExpr::LetPair { fst: x, snd: y, bound: Box::new(m), body: Box::new(body) },
        }))
    }

    #[allow(clippy::type_complexity)]
    fn bindings(&mut self) -> PResult<Vec<(Name, Option<Name>, LExpr)>> {
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
                out.push((x, None, self.expr()?));
            } else if self.c.at_binding_start() {
                self.c.bump();
                let x = binder(&self.c.expect_var()?);
                self.c.bump();
                let y = binder(&self.c.expect_var()?);
                self.c.bump();
                self.c.bump();
                out.push((x, Some(y), self.expr()?));
            } else {
                let m = self.expr()?;
                out.push((Name::fresh("_"), None, m));
            }
        }
    }

    fn sum(&mut self) -> PResult<LExpr> {
        let mut lhs = self.app()?;
        while self.c.eat_sym("+") {
            let rhs = self.app()?;
            lhs = LExpr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn app(&mut self) -> PResult<LExpr> {
        let mut f = self.prefix()?;
        while self.c.continues_application() && !self.c.is_sym("<") {
            let a = self.atom()?;
            f = LExpr::app(f, a);
        }
        Ok(f)
    }

    fn prefix(&mut self) -> PResult<LExpr> {
        for (kw, mk) in [
            ("send", LExpr::Send as fn(Box<LExpr>) -> LExpr),
            ("recv", LExpr::Recv),
            ("fork", LExpr::Fork),
            ("close", LExpr::Close),
            ("wait", LExpr::Wait),
        ] {
            if self.c.eat_kw(kw) {
                return Ok(mk(Box::new(self.atom()?)));
            }
        }
        if self.c.eat_kw("new") {
            return Ok(LExpr::New(self.ty_atom()?));
        }
        if self.c.eat_kw("select") {
            let l = self.c.expect_label()?;
            return Ok(LExpr::Select { label: Label::new(&l), annot: None });
        }
        if self.c.eat_sym("-") {
            if let Tok::Int(n) = *self.c.peek() {
                self.c.bump();
                return Ok(LExpr::Int(-n));
            }
            return Ok(LExpr::Neg(Box::new(self.atom()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<LExpr> {
        match self.c.peek().clone() {
            Tok::Sym("(") => {
                self.c.bump();
                if self.c.eat_sym(")") {
                    return Ok(LExpr::Unit);
                }
                self.c.nest += 1;
                let r = (|| {
                    let e = self.expr()?;
                    if self.c.eat_sym(",") {
                        let f = self.expr()?;
                        self.c.expect_sym(")")?;
                        return Ok(LExpr::Pair(Box::new(e), Box::new(f)));
                    }
                    self.c.expect_sym(")")?;
                    Ok(e)
                })();
                self.c.nest -= 1;
                r
            }
            Tok::Ident(k) if k == "rcase" => self.rcase(),
            Tok::Ident(k) if k == "lambda" => self.lambda(),
            Tok::Ident(x) if !is_keyword(&x) => {
                self.c.bump();
                Ok(LExpr::Var(Name::new(&x)))
            }
            Tok::Int(n) => {
                self.c.bump();
                Ok(LExpr::Int(n))
            }
            _ => Err(self.c.unexpected(&["expression"])),
        }
    }

    /// `rcase M of { L: c. N, ... }`
    fn rcase(&mut self) -> PResult<LExpr> {
        self.c.expect_kw("rcase")?;
        let m = self.sum()?;
        self.c.expect_kw("of")?;
        let pos = self.c.expect_sym("{")?;
        self.c.nest += 1;
        let mut branches = BTreeMap::new();
        let r = (|| loop {
            if self.c.eat_sym(",") {
                continue;
            }
            if self.c.eat_sym("}") {
                return Ok(());
            }
            let lpos = self.c.pos();
            let l = Label::new(&self.c.expect_label()?);
            self.c.expect_sym(":")?;
            let x = binder(&self.c.expect_var()?);
            self.c.expect_sym(".")?;
            let body = self.expr()?;
            if branches.insert(l.clone(), (x, body)).is_some() {
                return Err(dup(lpos, l.as_str()));
            }
        })();
        self.c.nest -= 1;
        r?;
        if branches.is_empty() {
            return Err(ParseError::new(ParseErrorKind::Syntax, pos, "empty rcase"));
        }
        Ok(LExpr::Rcase { scrutinee: Box::new(m), branches })
    }
}

fn dup(pos: SourcePos, name: &str) -> ParseError {
    ParseError::new(ParseErrorKind::DuplicateDefinition, pos, format!("`{name}` is defined twice"))
}

fn desugar(
    name: &str,
    params: &[String],
    declared: Option<&LType>,
    body: LExpr,
    pos: SourcePos,
) -> PResult<LExpr> {
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
            LType::Fun { mult, dom, cod } => {
                layers.push((mult, binder(p), *dom));
                ty = *cod;
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
    Ok(layers.into_iter().rev().fold(body, |body, (mult, x, annot)| LExpr::Lam {
        mult,
        binder: x,
        annot,
        body: Box::new(body),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSERVER: &str = "cServer :\n  & { Neg: ?Int. !Int. end!\n    , Add: ?Int. ?Int. !Int. end! }\n  -> Unit\n\
cServer c =\n  rcase c of {\n    Neg: c. let (x, c) = recv c\n                c = send c (-x)\n            in  close c,\n\
    Add: c. let (x, c) = recv c\n                (y, c) = recv c\n                c = send c (x+y)\n            in  close c\n  }\n";

    #[test]
    fn compute_server_listing() {
        let p = parse_lsst(CSERVER).unwrap();
        let d = &p.defs[0];
        match d.declared.as_ref().unwrap() {
            LType::Fun { dom, cod, .. } => {
                assert!(matches!(**dom, LType::Branch(ref br) if br.len() == 2));
                assert_eq!(**cod, LType::Unit);
            }
            t => panic!("{t}"),
        }
        assert!(matches!(&d.body, LExpr::Lam { body, .. } if matches!(**body, LExpr::Rcase { .. })));
    }

    #[test]
    fn end_markers_and_select() {
        assert_eq!(parse_lsst_type("end?", &[]).unwrap(), LType::EndIn);
        assert_eq!(parse_lsst_type("end!", &[]).unwrap(), LType::EndOut);
        let p = parse_lsst("f : (+){Neg: end!} -> Unit\nf d = let d = select Neg d in close d").unwrap();
        match &p.defs[0].body {
            LExpr::Lam { body, .. } => match &**body {
                LExpr::Let { bound, .. } => {
                    assert!(matches!(&**bound, LExpr::App(s, d)
                        if matches!(**s, LExpr::Select { .. }) && **d == LExpr::var("d")))
                }
                e => panic!("{e}"),
            },
            e => panic!("{e}"),
        }
    }

    #[test]
    fn client_listing_with_bare_wait() {
        let src = "negClient :\n  (+) { Neg: !Int. ?Int. end? }\n  -> Int -> Int\nnegClient d x =\n  let d = select Neg d\n      d = send d x\n      (r, d) = recv d\n      wait d\n  in  r\n";
        let p = parse_lsst(src).unwrap();
        let s = p.defs[0].body.to_string();
        assert!(s.contains("wait d in r"), "{s}");
    }

    #[test]
    fn type_round_trip() {
        for s in ["&{ A: ?Int. end!, B: end? } -> Unit", "Int * Unit -o Int", "(+){ A: !(Int -> Int). end! }"] {
            let t = parse_lsst_type(s, &[]).unwrap();
            assert_eq!(parse_lsst_type(&t.to_string(), &[]).unwrap(), t, "{s}");
        }
    }
}
