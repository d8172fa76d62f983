//! Abstract syntax of LSST programs.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Formatter};

use crate::ast::{ChanId, Label, Multiplicity, Name, SourcePos};

#[derive(Clone, Debug, PartialEq)]
pub enum LType {
    Unit,
    Int,
    Fun { mult: Multiplicity, dom: Box<LType>, cod: Box<LType> },
    Prod(Box<LType>, Box<LType>),
    Send(Box<LType>, Box<LType>),
    Recv(Box<LType>, Box<LType>),
    /// Internal choice `(+){...}`.
    Select(BTreeMap<Label, LType>),
    /// External choice `&{...}`.
    Branch(BTreeMap<Label, LType>),
    EndOut,
    EndIn,
}

impl LType {
    pub fn fun(mult: Multiplicity, dom: LType, cod: LType) -> LType {
        LType::Fun { mult, dom: Box::new(dom), cod: Box::new(cod) }
    }

    pub fn send(a: LType, s: LType) -> LType {
        LType::Send(Box::new(a), Box::new(s))
    }

    pub fn recv(a: LType, s: LType) -> LType {
        LType::Recv(Box::new(a), Box::new(s))
    }

    pub fn prod(a: LType, b: LType) -> LType {
        LType::Prod(Box::new(a), Box::new(b))
    }

    pub fn is_session(&self) -> bool {
        matches!(
            self,
            LType::Send(..) | LType::Recv(..) | LType::Select(_) | LType::Branch(_) | LType::EndOut | LType::EndIn
        )
    }

    /// Session types, products containing them and linear functions are linear.
    pub fn mult(&self) -> Multiplicity {
        match self {
            LType::Unit | LType::Int => Multiplicity::Un,
            LType::Fun { mult, .. } => *mult,
            LType::Prod(a, b) => a.mult().join(b.mult()),
            _ => Multiplicity::Lin,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LExpr {
    Var(Name),
    Chan(ChanId),
    Unit,
    Int(i64),
    Lam { mult: Multiplicity, binder: Name, annot: LType, body: Box<LExpr> },
    App(Box<LExpr>, Box<LExpr>),
    Pair(Box<LExpr>, Box<LExpr>),
    LetPair { fst: Name, snd: Name, bound: Box<LExpr>, body: Box<LExpr> },
    Let { binder: Name, bound: Box<LExpr>, body: Box<LExpr> },
    Fork(Box<LExpr>),
    New(LType),
    Send(Box<LExpr>),
    Recv(Box<LExpr>),
    /// `select l`; the type checker fills in the choice type it selects from.
    Select { label: Label, annot: Option<LType> },
    Rcase { scrutinee: Box<LExpr>, branches: BTreeMap<Label, (Name, LExpr)> },
    Close(Box<LExpr>),
    Wait(Box<LExpr>),
    Neg(Box<LExpr>),
    Add(Box<LExpr>, Box<LExpr>),
}

impl LExpr {
    pub fn var(s: &str) -> LExpr {
        LExpr::Var(Name::new(s))
    }

    pub fn app(f: LExpr, a: LExpr) -> LExpr {
        LExpr::App(Box::new(f), Box::new(a))
    }

    pub fn is_value(&self) -> bool {
        match self {
            LExpr::Var(_) | LExpr::Chan(_) | LExpr::Unit | LExpr::Int(_) | LExpr::Lam { .. } => true,
            LExpr::Select { .. } => true,
            LExpr::Pair(a, b) => a.is_value() && b.is_value(),
            LExpr::Send(v) => v.is_value(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LsstDef {
    pub name: Name,
    pub declared: Option<LType>,
    pub body: LExpr,
    pub pos: SourcePos,
}

#[derive(Clone, Debug, Default)]
pub struct LsstProgram {
    pub type_defs: Vec<(Name, LType)>,
    pub defs: Vec<LsstDef>,
    pub main: Option<LsstDef>,
}

const T_FUN: u8 = 0;
const T_PROD: u8 = 1;
const T_PREFIX: u8 = 2;

fn fmt_ltype(t: &LType, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    let paren = |f: &mut Formatter<'_>, on: bool, body: &dyn Fn(&mut Formatter<'_>) -> fmt::Result| {
        if on {
            f.write_str("(")?;
        }
        body(f)?;
        if on {
            f.write_str(")")?;
        }
        Ok(())
    };
    match t {
        LType::Unit => f.write_str("Unit"),
        LType::Int => f.write_str("Int"),
        LType::EndOut => f.write_str("end!"),
        LType::EndIn => f.write_str("end?"),
        LType::Fun { mult, dom, cod } => paren(f, prec > T_FUN, &|f| {
            fmt_ltype(dom, T_PROD, f)?;
            f.write_str(if *mult == Multiplicity::Lin { " -o " } else { " -> " })?;
            fmt_ltype(cod, T_FUN, f)
        }),
        LType::Prod(a, b) => paren(f, prec > T_PROD, &|f| {
            fmt_ltype(a, T_PREFIX, f)?;
            f.write_str(" * ")?;
            fmt_ltype(b, T_PROD, f)
        }),
        LType::Send(a, s) | LType::Recv(a, s) => paren(f, prec > T_PREFIX, &|f| {
            f.write_str(if matches!(t, LType::Send(..)) { "!" } else { "?" })?;
            fmt_ltype(a, T_PREFIX + 1, f)?;
            f.write_str(". ")?;
            fmt_ltype(s, T_PREFIX, f)
        }),
        LType::Select(br) | LType::Branch(br) => {
            f.write_str(if matches!(t, LType::Select(_)) { "(+){" } else { "&{" })?;
            for (i, (l, s)) in br.iter().enumerate() {
                f.write_str(if i > 0 { ", " } else { " " })?;
                write!(f, "{l}: ")?;
                fmt_ltype(s, T_FUN, f)?;
            }
            f.write_str(" }")
        }
    }
}

impl Display for LType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_ltype(self, T_FUN, f)
    }
}

struct LAt<'a>(&'a LExpr, u8);

impl Display for LAt<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_lexpr(self.0, self.1, f)
    }
}

const E_TOP: u8 = 0;
const E_SUM: u8 = 1;
const E_APP: u8 = 2;
const E_ATOM: u8 = 4;

fn fmt_lexpr(e: &LExpr, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    let open = |f: &mut Formatter<'_>, p: u8| if prec > p { f.write_str("(") } else { Ok(()) };
    let close = |f: &mut Formatter<'_>, p: u8| if prec > p { f.write_str(")") } else { Ok(()) };
    match e {
        LExpr::Var(x) => write!(f, "{x}"),
        LExpr::Chan(c) => write!(f, "#{}", c.0),
        LExpr::Unit => f.write_str("()"),
        LExpr::Int(n) if *n < 0 && prec > E_TOP => write!(f, "({n})"),
        LExpr::Int(n) => write!(f, "{n}"),
        LExpr::Lam { mult, binder, annot, body } => {
            open(f, E_TOP)?;
            let m = if *mult == Multiplicity::Lin { " lin" } else { "" };
            write!(f, "lambda{m} ({binder} : {annot}). {}", LAt(body, E_TOP))?;
            close(f, E_TOP)
        }
        LExpr::App(a, b) => {
            open(f, E_APP)?;
            write!(f, "{} {}", LAt(a, E_APP), LAt(b, E_ATOM))?;
            close(f, E_APP)
        }
        LExpr::Pair(a, b) => write!(f, "({}, {})", LAt(a, E_TOP), LAt(b, E_TOP)),
        LExpr::LetPair { fst, snd, bound, body } => {
            open(f, E_TOP)?;
            write!(f, "let ({fst}, {snd}) = {} in {}", LAt(bound, E_TOP), LAt(body, E_TOP))?;
            close(f, E_TOP)
        }
        LExpr::Let { binder, bound, body } => {
            open(f, E_TOP)?;
            write!(f, "let {binder} = {} in {}", LAt(bound, E_TOP), LAt(body, E_TOP))?;
            close(f, E_TOP)
        }
        LExpr::Fork(m) | LExpr::Send(m) | LExpr::Recv(m) | LExpr::Close(m) | LExpr::Wait(m) => {
            let kw = match e {
                LExpr::Fork(_) => "fork",
                LExpr::Send(_) => "send",
                LExpr::Recv(_) => "recv",
                LExpr::Close(_) => "close",
                _ => "wait",
            };
            open(f, E_APP)?;
            write!(f, "{kw} {}", LAt(m, E_ATOM))?;
            close(f, E_APP)
        }
        LExpr::New(t) => {
            open(f, E_APP)?;
            write!(f, "new ({t})")?;
            close(f, E_APP)
        }
        LExpr::Select { label, .. } => {
            open(f, E_APP)?;
            write!(f, "select {label}")?;
            close(f, E_APP)
        }
        LExpr::Rcase { scrutinee, branches } => {
            write!(f, "rcase {} of {{", LAt(scrutinee, E_APP))?;
            for (i, (l, (x, m))) in branches.iter().enumerate() {
                f.write_str(if i > 0 { ", " } else { " " })?;
                write!(f, "{l}: {x}. {}", LAt(m, E_TOP))?;
            }
            f.write_str(" }")
        }
        LExpr::Neg(m) => {
            open(f, E_APP)?;
            write!(f, "-{}", LAt(m, E_ATOM))?;
            close(f, E_APP)
        }
        LExpr::Add(a, b) => {
            open(f, E_SUM)?;
            write!(f, "{} + {}", LAt(a, E_SUM), LAt(b, E_APP))?;
            close(f, E_SUM)
        }
    }
}

impl Display for LExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_lexpr(self, E_TOP, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_printing() {
        let s = LType::Branch(BTreeMap::from([(
            Label::new("Neg"),
            LType::recv(LType::Int, LType::send(LType::Int, LType::EndOut)),
        )]));
        assert_eq!(s.to_string(), "&{ Neg: ?Int. !Int. end! }");
        let f = LType::fun(Multiplicity::Un, s, LType::Unit);
        assert_eq!(f.to_string(), "&{ Neg: ?Int. !Int. end! } -> Unit");
    }

    #[test]
    fn values() {
        assert!(LExpr::Send(Box::new(LExpr::var("c"))).is_value());
        assert!(!LExpr::Recv(Box::new(LExpr::var("c"))).is_value());
        assert!(LExpr::Pair(Box::new(LExpr::Unit), Box::new(LExpr::Int(1))).is_value());
    }
}
