//! Typed translation from LSST into LDGV.

use thiserror::Error;

use crate::ast::{Def, Expr, Label, LabelSet, Multiplicity, Name, Program, Type, Value};

use super::{LExpr, LType, TypedLsstProgram};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TranslateError {
    #[error("the program is not well typed")]
    IllTyped,
    #[error("`select {0}` carries no choice type")]
    UnannotatedSelect(Label),
}

/// The end-of-session label sent by `close`.
pub fn eos() -> Label {
    Label::eos()
}

fn choice(send: bool, br: &std::collections::BTreeMap<Label, LType>) -> Type {
    // Translated types are closed, so a fixed binder cannot capture.
    let x = Name::new("l");
    let labels = LabelSet::new(br.keys().cloned()).expect("choices are non-empty");
    let body = Type::case(Value::Var(x.clone()), br.iter().map(|(l, s)| (l.clone(), translate_type(s))));
    if send {
        Type::send(x, Type::Label(labels), body)
    } else {
        Type::recv(x, Type::Label(labels), body)
    }
}

pub fn translate_type(t: &LType) -> Type {
    match t {
        LType::Unit => Type::Unit,
        LType::Int => Type::Int,
        LType::Fun { mult, dom, cod } => Type::arrow(*mult, translate_type(dom), translate_type(cod)),
        LType::Prod(a, b) => Type::sigma(Name::fresh("x"), translate_type(a), translate_type(b)),
        LType::Send(a, s) => Type::send_(translate_type(a), translate_type(s)),
        LType::Recv(a, s) => Type::recv_(translate_type(a), translate_type(s)),
        LType::Select(br) => choice(true, br),
        LType::Branch(br) => choice(false, br),
        LType::EndOut => Type::send_(Type::Label(LabelSet::singleton(eos())), Type::End),
        LType::EndIn => Type::recv_(Type::Label(LabelSet::singleton(eos())), Type::End),
    }
}

/// The image of an LSST value, which is always an LDGV value.
pub fn translate_value(e: &LExpr) -> Result<Option<Value>, TranslateError> {
    Ok(Some(match e {
        LExpr::Var(x) => Value::Var(x.clone()),
        LExpr::Chan(c) => Value::Chan(*c),
        LExpr::Unit => Value::Unit,
        LExpr::Int(n) => Value::Int(*n),
        LExpr::Lam { mult, binder, annot, body } => Value::Lam {
            mult: *mult,
            binder: binder.clone(),
            annot: Box::new(translate_type(annot)),
            body: Box::new(translate_expr(body)?),
        },
        LExpr::Select { label, annot } => {
            let t = annot.as_ref().ok_or_else(|| TranslateError::UnannotatedSelect(label.clone()))?;
            let x = Name::fresh("x");
            let body = Expr::app(Expr::Send(Box::new(Expr::Val(Value::Var(x.clone())))), Expr::Val(Value::Label(label.clone())));
            Value::Lam { mult: Multiplicity::Lin, binder: x, annot: Box::new(translate_type(t)), body: Box::new(body) }
        }
        LExpr::Pair(a, b) => match (translate_value(a)?, translate_value(b)?) {
            (Some(a), Some(b)) => {
                Value::Pair { binder: Name::fresh("x"), annot: None, fst: Box::new(a), snd: Box::new(b) }
            }
            _ => return Ok(None),
        },
        LExpr::Send(m) => match translate_value(m)? {
            Some(v) => Value::SendPartial(Box::new(v)),
            None => return Ok(None),
        },
        _ => return Ok(None),
    }))
}

pub fn translate_expr(e: &LExpr) -> Result<Expr, TranslateError> {
    if let Some(v) = translate_value(e)? {
        return Ok(Expr::Val(v));
    }
    let tr = |m: &LExpr| translate_expr(m).map(Box::new);
    Ok(match e {
        LExpr::App(f, a) => Expr::App(tr(f)?, tr(a)?),
        LExpr::Pair(a, b) => match translate_value(a)? {
            Some(v) => Expr::Pair { binder: Name::fresh("x"), annot: None, fst: v, snd: tr(b)? },
            None => {
                let x = Name::fresh("p");
                let pair = Expr::Pair { binder: Name::fresh("x"), annot: None, fst: Value::Var(x.clone()), snd: tr(b)? };
                Expr::Let { binder: x, bound: tr(a)?, body: Box::new(pair) }
            }
        },
        LExpr::LetPair { fst, snd, bound, body } => {
            Expr::LetPair { fst: fst.clone(), snd: snd.clone(), bound: tr(bound)?, body: tr(body)? }
        }
        LExpr::Let { binder, bound, body } => Expr::Let { binder: binder.clone(), bound: tr(bound)?, body: tr(body)? },
        LExpr::Fork(m) => Expr::Fork(tr(m)?),
        LExpr::New(s) => Expr::New(translate_type(s)),
        LExpr::Send(m) => Expr::Send(tr(m)?),
        LExpr::Recv(m) => Expr::Recv(tr(m)?),
        LExpr::Rcase { scrutinee, branches } => {
            let l = Name::fresh("l");
            let y = Name::fresh("c");
            let arms = branches
                .iter()
                .map(|(lab, (x, body))| {
                    let body = translate_expr(body)?;
                    let body = if x.is_wildcard() { body } else { crate::ast::rename_expr(&body, x, &y) };
                    Ok((lab.clone(), body))
                })
                .collect::<Result<_, TranslateError>>()?;
            Expr::LetPair {
                fst: l.clone(),
                snd: y.clone(),
                bound: Box::new(Expr::Recv(tr(scrutinee)?)),
                body: Box::new(Expr::Case(Value::Var(l), arms)),
            }
        }
        // `close` returns unit in LSST, so the final channel is dropped.
        LExpr::Close(m) => Expr::Let {
            binder: Name::new("_"),
            bound: Box::new(Expr::app(Expr::Send(tr(m)?), Expr::Val(Value::Label(eos())))),
            body: Box::new(Expr::Val(Value::Unit)),
        },
        LExpr::Wait(m) => Expr::LetPair {
            fst: Name::new("_"),
            snd: Name::new("_"),
            bound: Box::new(Expr::Recv(tr(m)?)),
            body: Box::new(Expr::Val(Value::Unit)),
        },
        LExpr::Neg(m) => Expr::Neg(tr(m)?),
        LExpr::Add(a, b) => Expr::Add(tr(a)?, tr(b)?),
        LExpr::Var(_) | LExpr::Chan(_) | LExpr::Unit | LExpr::Int(_) | LExpr::Lam { .. } | LExpr::Select { .. } => {
            unreachable!("values are handled above")
        }
    })
}

/// Translates a checked program; declared types are translated too.
pub fn translate(tp: &TypedLsstProgram) -> Result<Program, TranslateError> {
    if !tp.is_ok() {
        return Err(TranslateError::IllTyped);
    }
    let p = &tp.program;
    let def = |d: &super::LsstDef| -> Result<Def, TranslateError> {
        Ok(Def {
            name: d.name.clone(),
            declared: d.declared.as_ref().map(translate_type),
            body: translate_expr(&d.body)?,
            pos: d.pos,
        })
    };
    Ok(Program {
        type_defs: p.type_defs.iter().map(|(n, t)| (n.clone(), translate_type(t))).collect(),
        defs: p.defs.iter().map(def).collect::<Result<_, _>>()?,
        main: p.main.as_ref().map(def).transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq;
    use crate::checker::{check_program, CheckMode, Checker};
    use crate::env::TypeEnv;
    use crate::parser::{parse_lsst, parse_lsst_type, parse_type};
    use crate::lsst::lsst_type_check;

    #[test]
    fn choice_translation() {
        let t = parse_lsst_type("(+){ Neg: !Int. ?Int. end? }", &[]).unwrap();
        let expected = parse_type("!(x:{Neg}) case x of { Neg: !(y:Int) ?(z:Int) ?(w:{EOS}) End }", &[]).unwrap();
        assert!(alpha_eq(&translate_type(&t), &expected), "{}", translate_type(&t));
    }

    #[test]
    fn close_translation() {
        let e = translate_expr(&LExpr::Close(Box::new(LExpr::var("c")))).unwrap();
        assert_eq!(e.to_string(), "let _ = send c EOS in ()");
        assert_eq!(translate_expr(&LExpr::Unit).unwrap(), Expr::Val(Value::Unit));
    }

    #[test]
    fn translated_program_checks() {
        let src = "f : (+){ Neg: !Int. end! } -> Unit\nf d = let d = select Neg d\n d = send d 1\n in close d\n";
        let tp = lsst_type_check(&parse_lsst(src).unwrap(), CheckMode::KeepGoing);
        let p = translate(&tp).unwrap();
        let r = check_program(&p, CheckMode::KeepGoing);
        assert!(r.ok, "{}", r.to_text());
    }

    #[test]
    fn duality_commutes_with_translation() {
        let s = parse_lsst_type("&{ Neg: ?Int. !Int. end!, Add: ?Int. ?Int. !Int. end! }", &[]).unwrap();
        let a = crate::ast::dual(&translate_type(&s)).unwrap();
        let b = translate_type(&crate::lsst::lsst_dual(&s).unwrap());
        Checker::new().equivalent(&TypeEnv::new(), &a, &b).unwrap();
    }
}
