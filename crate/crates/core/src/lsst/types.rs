//! Duality and subtyping for LSST types.

use super::LType;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("not a session type: {0}")]
pub struct NotAnLsstSession(pub LType);

/// Swaps sends with receives, selections with branches and the two ends.
pub fn lsst_dual(s: &LType) -> Result<LType, NotAnLsstSession> {
    Ok(match s {
        LType::Send(a, k) => LType::recv((**a).clone(), lsst_dual(k)?),
        LType::Recv(a, k) => LType::send((**a).clone(), lsst_dual(k)?),
        LType::Select(br) => LType::Branch(dual_map(br)?),
        LType::Branch(br) => LType::Select(dual_map(br)?),
        LType::EndOut => LType::EndIn,
        LType::EndIn => LType::EndOut,
        other => return Err(NotAnLsstSession(other.clone())),
    })
}

fn dual_map(
    br: &std::collections::BTreeMap<crate::ast::Label, LType>,
) -> Result<std::collections::BTreeMap<crate::ast::Label, LType>, NotAnLsstSession> {
    br.iter().map(|(l, s)| Ok((l.clone(), lsst_dual(s)?))).collect()
}

/// Structural subtyping with width subtyping on choices.
pub fn lsst_sub(a: &LType, b: &LType) -> bool {
    match (a, b) {
        (LType::Unit, LType::Unit)
        | (LType::Int, LType::Int)
        | (LType::EndOut, LType::EndOut)
        | (LType::EndIn, LType::EndIn) => true,
        (LType::Fun { mult: m, dom: a1, cod: b1 }, LType::Fun { mult: n, dom: a2, cod: b2 }) => {
            m.leq(*n) && lsst_sub(a2, a1) && lsst_sub(b1, b2)
        }
        (LType::Prod(a1, b1), LType::Prod(a2, b2)) => lsst_sub(a1, a2) && lsst_sub(b1, b2),
        (LType::Send(a1, s1), LType::Send(a2, s2)) => lsst_sub(a2, a1) && lsst_sub(s1, s2),
        (LType::Recv(a1, s1), LType::Recv(a2, s2)) => lsst_sub(a1, a2) && lsst_sub(s1, s2),
        // Fewer choices above.
        (LType::Select(l1), LType::Select(l2)) => {
            l2.iter().all(|(l, s2)| l1.get(l).is_some_and(|s1| lsst_sub(s1, s2)))
        }
        // More branches above.
        (LType::Branch(l1), LType::Branch(l2)) => {
            l1.iter().all(|(l, s1)| l2.get(l).is_some_and(|s2| lsst_sub(s1, s2)))
        }
        _ => false,
    }
}
