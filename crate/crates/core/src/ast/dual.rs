//! Session type duality.

use super::{Name, Type};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("not a session type: {0}")]
pub struct NotASessionType(pub Type);

/// Syntactic membership in the session fragment.
pub fn is_session(t: &Type) -> bool {
    match t {
        Type::End | Type::Send { .. } | Type::Recv { .. } | Type::TVar { .. } => true,
        Type::Case { branches, .. } => branches.values().all(is_session),
        Type::NatRec { zero, succ, .. } => is_session(zero) && is_session(succ),
        _ => false,
    }
}

/// Swaps sends and receives. Free type variables flip polarity; the bound
/// variable of a recursor has its polarities swapped back afterwards so that
/// the operation is an involution.
pub fn dual(t: &Type) -> Result<Type, NotASessionType> {
    Ok(match t {
        Type::End => Type::End,
        Type::Send { binder, payload, cont } => Type::Recv {
            binder: binder.clone(),
            payload: payload.clone(),
            cont: Box::new(dual(cont)?),
        },
        Type::Recv { binder, payload, cont } => Type::Send {
            binder: binder.clone(),
            payload: payload.clone(),
            cont: Box::new(dual(cont)?),
        },
        Type::Case { scrutinee, branches } => Type::Case {
            scrutinee: scrutinee.clone(),
            branches: branches
                .iter()
                .map(|(l, b)| Ok((l.clone(), dual(b)?)))
                .collect::<Result<_, NotASessionType>>()?,
        },
        Type::NatRec { scrutinee, zero, var, kind, succ } => Type::NatRec {
            scrutinee: scrutinee.clone(),
            zero: Box::new(dual(zero)?),
            var: var.clone(),
            kind: *kind,
            succ: Box::new(flip_tvar(&dual(succ)?, var)),
        },
        Type::TVar { name, pol } => Type::TVar { name: name.clone(), pol: pol.flip() },
        other => return Err(NotASessionType(other.clone())),
    })
}

/// Flips the polarity of every free occurrence of `a`.
pub fn flip_tvar(t: &Type, a: &Name) -> Type {
    match t {
        Type::TVar { name, pol } if name == a => Type::TVar { name: name.clone(), pol: pol.flip() },
        Type::Unit | Type::Int | Type::Nat | Type::End | Type::Label(_) | Type::TVar { .. } => t.clone(),
        Type::Eq { index, lhs, rhs } => Type::Eq {
            index: Box::new(flip_tvar(index, a)),
            lhs: lhs.clone(),
            rhs: rhs.clone(),
        },
        Type::Case { scrutinee, branches } => Type::Case {
            scrutinee: scrutinee.clone(),
            branches: branches.iter().map(|(l, b)| (l.clone(), flip_tvar(b, a))).collect(),
        },
        Type::Pi { mult, binder, dom, cod } => Type::Pi {
            mult: *mult,
            binder: binder.clone(),
            dom: Box::new(flip_tvar(dom, a)),
            cod: Box::new(flip_tvar(cod, a)),
        },
        Type::Sigma { binder, fst, snd } => Type::Sigma {
            binder: binder.clone(),
            fst: Box::new(flip_tvar(fst, a)),
            snd: Box::new(flip_tvar(snd, a)),
        },
        Type::Send { binder, payload, cont } => Type::Send {
            binder: binder.clone(),
            payload: Box::new(flip_tvar(payload, a)),
            cont: Box::new(flip_tvar(cont, a)),
        },
        Type::Recv { binder, payload, cont } => Type::Recv {
            binder: binder.clone(),
            payload: Box::new(flip_tvar(payload, a)),
            cont: Box::new(flip_tvar(cont, a)),
        },
        Type::NatRec { scrutinee, zero, var, kind, succ } => Type::NatRec {
            scrutinee: scrutinee.clone(),
            zero: Box::new(flip_tvar(zero, a)),
            var: var.clone(),
            kind: *kind,
            succ: Box::new(if var == a { (**succ).clone() } else { flip_tvar(succ, a) }),
        },
    }
}
