//! Pretty printing in the concrete LDGV grammar.
//!
//! Output re-parses to an alpha-equivalent tree, with one exception:
//! channel endpoints print as `#n` and only occur in runtime terms.

use std::fmt::{self, Display, Formatter, Write};

use super::{Expr, Label, Multiplicity, Polarity, Process, Program, Type, Value};

const T_ARROW: u8 = 0;
const T_PREFIX: u8 = 1;
const T_ATOM: u8 = 2;

const E_TOP: u8 = 0;
const E_SUM: u8 = 1;
const E_APP: u8 = 2;
const E_PREFIX: u8 = 3;
const E_ATOM: u8 = 4;

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn plain_label(s: &str) -> bool {
    starts_upper(s) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A label in key position (`{A, B}`, `case ... of {A: ...}`).
fn label_key(l: &Label) -> String {
    if plain_label(l.as_str()) {
        l.to_string()
    } else {
        format!("'{l}")
    }
}

/// A label in value position, where `Z` and `S` are numerals.
fn label_value(l: &Label) -> String {
    match l.as_str() {
        "Z" | "S" => format!("'{l}"),
        _ => label_key(l),
    }
}

fn paren(f: &mut Formatter<'_>, on: bool, body: impl FnOnce(&mut Formatter<'_>) -> fmt::Result) -> fmt::Result {
    if on {
        f.write_char('(')?;
    }
    body(f)?;
    if on {
        f.write_char(')')?;
    }
    Ok(())
}

fn arrow(m: Multiplicity) -> &'static str {
    match m {
        Multiplicity::Un => "->",
        Multiplicity::Lin => "-o",
    }
}

fn fmt_type(t: &Type, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    match t {
        Type::Unit => f.write_str("Unit"),
        Type::Int => f.write_str("Int"),
        Type::Nat => f.write_str("Nat"),
        Type::End => f.write_str("End"),
        Type::Label(ls) => {
            f.write_char('{')?;
            for (i, l) in ls.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(&label_key(l))?;
            }
            f.write_char('}')
        }
        Type::Eq { index, lhs, rhs } => {
            write!(f, "({} = {} : ", ValueAt(lhs, E_ATOM), ValueAt(rhs, E_ATOM))?;
            fmt_type(index, T_ARROW, f)?;
            f.write_char(')')
        }
        Type::Case { scrutinee, branches } => paren(f, prec > T_PREFIX, |f| {
            write!(f, "case {} of {{", ValueAt(scrutinee, E_ATOM))?;
            for (i, (l, b)) in branches.iter().enumerate() {
                f.write_str(if i > 0 { ", " } else { " " })?;
                write!(f, "{}: ", label_key(l))?;
                fmt_type(b, T_ARROW, f)?;
            }
            f.write_str(" }")
        }),
        Type::Pi { mult, binder, dom, cod } => paren(f, prec > T_ARROW, |f| {
            if cod.mentions(binder) {
                write!(f, "({binder} : ")?;
                fmt_type(dom, T_ARROW, f)?;
                f.write_char(')')?;
            } else {
                fmt_type(dom, T_PREFIX, f)?;
            }
            write!(f, " {} ", arrow(*mult))?;
            fmt_type(cod, T_ARROW, f)
        }),
        Type::Sigma { binder, fst, snd } => {
            write!(f, "[{binder} : ")?;
            fmt_type(fst, T_ARROW, f)?;
            f.write_str(", ")?;
            fmt_type(snd, T_ARROW, f)?;
            f.write_char(']')
        }
        Type::Send { binder, payload, cont } | Type::Recv { binder, payload, cont } => {
            let sym = if matches!(t, Type::Send { .. }) { '!' } else { '?' };
            paren(f, prec > T_PREFIX, |f| {
                f.write_char(sym)?;
                if cont.mentions(binder) {
                    write!(f, "({binder} : ")?;
                    fmt_type(payload, T_ARROW, f)?;
                    f.write_char(')')?;
                } else {
                    fmt_type(payload, T_ATOM, f)?;
                }
                f.write_str(". ")?;
                fmt_type(cont, T_PREFIX, f)
            })
        }
        Type::NatRec { scrutinee, zero, var, kind, succ } => paren(f, prec > T_PREFIX, |f| {
            write!(f, "rec {} ", ValueAt(scrutinee, E_ATOM))?;
            fmt_type(zero, T_ATOM, f)?;
            write!(f, " [{var} : {kind}] ")?;
            fmt_type(succ, T_PREFIX, f)
        }),
        Type::TVar { name, pol } => match pol {
            Polarity::Pos => write!(f, "{name}"),
            Polarity::Neg => write!(f, "~{name}"),
        },
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_type(self, T_ARROW, f)
    }
}

struct ValueAt<'a>(&'a Value, u8);

impl Display for ValueAt<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_value(self.0, self.1, f)
    }
}

struct ExprAt<'a>(&'a Expr, u8);

impl Display for ExprAt<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_expr(self.0, self.1, f)
    }
}

fn fmt_value(v: &Value, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    match v {
        Value::Var(x) => write!(f, "{x}"),
        Value::Chan(c) => write!(f, "#{}", c.0),
        Value::Label(l) => f.write_str(&label_value(l)),
        Value::Unit => f.write_str("()"),
        Value::Int(n) if *n < 0 => paren(f, prec > E_PREFIX, |f| write!(f, "{n}")),
        Value::Int(n) => write!(f, "{n}"),
        Value::Zero => f.write_str("Z"),
        Value::Succ(w) => write!(f, "S({})", ValueAt(w, E_TOP)),
        Value::Lam { mult, binder, annot, body } => paren(f, prec > E_TOP, |f| {
            let m = if *mult == Multiplicity::Lin { " lin" } else { "" };
            write!(f, "lambda{m} ({binder} : {annot}). {}", ExprAt(body, E_TOP))
        }),
        Value::Pair { binder, annot: None, fst, snd } if !snd.free_vars().contains(binder) => {
            write!(f, "<{}, {}>", ValueAt(fst, E_TOP), ValueAt(snd, E_TOP))
        }
        Value::Pair { binder, annot, fst, snd } => {
            write!(f, "<{binder}")?;
            if let Some(a) = annot {
                write!(f, " : {a}")?;
            }
            write!(f, " = {}, {}>", ValueAt(fst, E_TOP), ValueAt(snd, E_TOP))
        }
        Value::SendPartial(w) => paren(f, prec > E_PREFIX, |f| write!(f, "send {}", ValueAt(w, E_ATOM))),
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_value(self, E_TOP, f)
    }
}

fn fmt_expr(e: &Expr, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Val(v) => fmt_value(v, prec, f),
        Expr::Case(v, br) => {
            write!(f, "case {} of {{", ValueAt(v, E_ATOM))?;
            for (i, (l, b)) in br.iter().enumerate() {
                f.write_str(if i > 0 { ", " } else { " " })?;
                write!(f, "{}: {}", label_key(l), ExprAt(b, E_TOP))?;
            }
            f.write_str(" }")
        }
        Expr::App(a, b) => paren(f, prec > E_APP, |f| {
            write!(f, "{} {}", ExprAt(a, E_APP), ExprAt(b, E_ATOM))
        }),
        Expr::Pair { binder, annot: None, fst, snd } if !snd.free_vars().contains(binder) => {
            write!(f, "<{}, {}>", ValueAt(fst, E_TOP), ExprAt(snd, E_TOP))
        }
        Expr::Pair { binder, annot, fst, snd } => {
            write!(f, "<{binder}")?;
            if let Some(a) = annot {
                write!(f, " : {a}")?;
            }
            write!(f, " = {}, {}>", ValueAt(fst, E_TOP), ExprAt(snd, E_TOP))
        }
        Expr::LetPair { fst, snd, bound, body } => paren(f, prec > E_TOP, |f| {
            write!(f, "let ({fst}, {snd}) = {} in {}", ExprAt(bound, E_TOP), ExprAt(body, E_TOP))
        }),
        Expr::Let { binder, bound, body } => paren(f, prec > E_TOP, |f| {
            write!(f, "let {binder} = {} in {}", ExprAt(bound, E_TOP), ExprAt(body, E_TOP))
        }),
        Expr::New(t) => paren(f, prec > E_PREFIX, |f| {
            f.write_str("new ")?;
            fmt_type(t, T_ATOM, f)
        }),
        Expr::Fork(m) => paren(f, prec > E_PREFIX, |f| write!(f, "fork {}", ExprAt(m, E_ATOM))),
        Expr::Send(m) => paren(f, prec > E_PREFIX, |f| write!(f, "send {}", ExprAt(m, E_ATOM))),
        Expr::Recv(m) => paren(f, prec > E_PREFIX, |f| write!(f, "recv {}", ExprAt(m, E_ATOM))),
        Expr::Neg(m) => paren(f, prec > E_PREFIX, |f| {
            if matches!(**m, Expr::Val(Value::Int(_))) {
                write!(f, "-({})", ExprAt(m, E_TOP))
            } else {
                write!(f, "-{}", ExprAt(m, E_ATOM))
            }
        }),
        Expr::Add(a, b) => paren(f, prec > E_SUM, |f| {
            write!(f, "{} + {}", ExprAt(a, E_SUM), ExprAt(b, E_APP))
        }),
        Expr::NatRec { scrutinee, zero, pred, rec, motive, succ } => {
            write!(f, "rec {} {{ Z: {}, S({pred}) with ", ValueAt(scrutinee, E_ATOM), ExprAt(zero, E_TOP))?;
            if let Some(a) = &motive.tyvar {
                match motive.kind {
                    Some(k) => write!(f, "[{a} : {k}]")?,
                    None => write!(f, "[{a}]")?,
                }
            }
            write!(f, "({rec} : {}): {} }}", motive.rec_ty, ExprAt(succ, E_TOP))
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        fmt_expr(self, E_TOP, f)
    }
}

impl Display for Process {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Process::Expr(e) => write!(f, "<{e}>"),
            Process::Par(p, q) => write!(f, "{p} | {q}"),
            Process::Nu { c, d, session, body } => write!(f, "(nu {c} {d} : {session}) ({body})"),
        }
    }
}

/// Renders a whole program as re-parseable source text.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (name, ty) in &p.type_defs {
        let _ = writeln!(out, "type {name} = {ty}\n");
    }
    for d in p.defs.iter().chain(p.main.iter()) {
        if let Some(t) = &d.declared {
            let _ = writeln!(out, "{} : {t}", d.name);
        }
        let _ = writeln!(out, "{} = {}\n", d.name, d.body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{Kind, Name};
    use super::*;

    #[test]
    fn non_dependent_send_uses_sugar() {
        let t = Type::send_(Type::labels(&["EOS"]), Type::End);
        assert_eq!(t.to_string(), "!{EOS}. End");
    }

    #[test]
    fn dependent_forms_keep_binder() {
        let t = Type::recv(
            Name::new("l"),
            Type::labels(&["Neg", "Add"]),
            Type::case(
                Value::var("l"),
                [(Label::new("Neg"), Type::End), (Label::new("Add"), Type::End)],
            ),
        );
        assert_eq!(t.to_string(), "?(l : {Add, Neg}). case l of { Add: End, Neg: End }");
    }

    #[test]
    fn arrows_and_prefixes_nest() {
        let t = Type::arrow(
            Multiplicity::Un,
            Type::send_(Type::Int, Type::End),
            Type::arrow(Multiplicity::Lin, Type::Int, Type::Int),
        );
        assert_eq!(t.to_string(), "!Int. End -> Int -o Int");
        let r = Type::NatRec {
            scrutinee: Value::var("n"),
            zero: Box::new(Type::send_(Type::Int, Type::End)),
            var: Name::new("a"),
            kind: Kind::SL,
            succ: Box::new(Type::recv_(Type::Int, Type::tvar("a"))),
        };
        assert_eq!(r.to_string(), "rec n (!Int. End) [a : session^lin] ?Int. a");
    }

    #[test]
    fn expressions() {
        let e = Expr::app(Expr::Send(Box::new(Expr::var("c"))), Expr::Neg(Box::new(Expr::var("x"))));
        assert_eq!(e.to_string(), "send c (-x)");
        let s = Expr::Add(Box::new(Expr::var("x")), Box::new(Expr::var("y")));
        assert_eq!(Expr::app(Expr::var("f"), s).to_string(), "f (x + y)");
    }
}
