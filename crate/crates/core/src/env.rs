//! Ordered typing environments and their linear algebra.
//!
//! Each term binding caches the multiplicity of its type, computed by the
//! checker when the binding is introduced. `unr` and `join` read that cache;
//! [`TypeEnv::unr_by`] re-derives it from an external kind oracle.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{alpha_eq, Kind, Multiplicity, Name, Type, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum EnvEntry {
    Term { name: Name, ty: Type, mult: Multiplicity },
    TyVar { name: Name, kind: Kind },
}

impl EnvEntry {
    pub fn name(&self) -> &Name {
        match self {
            EnvEntry::Term { name, .. } | EnvEntry::TyVar { name, .. } => name,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, EnvEntry::Term { mult: Multiplicity::Lin, .. })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("unbound name `{0}`")]
    Unbound(Name),
    #[error("cannot join environments at `{0}`")]
    JoinConflict(Name),
}

#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    entries: Vec<EnvEntry>,
    /// Linear names already used up, kept for error messages only.
    consumed: Vec<Name>,
}

impl PartialEq for TypeEnv {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn entries(&self) -> &[EnvEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.entries.iter().any(|e| e.name() == x)
    }

    /// Appends a term binding. A previous binding of the same name is
    /// dropped so names stay unique.
    pub fn bind(&self, name: Name, ty: Type, mult: Multiplicity) -> TypeEnv {
        let mut out = self.without(&name);
        out.consumed.retain(|c| c != &name);
        out.entries.push(EnvEntry::Term { name, ty, mult });
        out
    }

    pub fn bind_tyvar(&self, name: Name, kind: Kind) -> TypeEnv {
        let mut out = self.without(&name);
        out.entries.push(EnvEntry::TyVar { name, kind });
        out
    }

    /// Records the equation `x = v` under a fresh entry name.
    pub fn bind_eq(&self, x: &Name, index: Type, v: Value) -> TypeEnv {
        let eq = Type::Eq { index: Box::new(index), lhs: Value::Var(x.clone()), rhs: v };
        self.bind(Name::fresh("eq"), eq, Multiplicity::Un)
    }

    pub fn lookup(&self, x: &Name) -> Option<&EnvEntry> {
        self.entries.iter().rev().find(|e| e.name() == x)
    }

    pub fn lookup_term(&self, x: &Name) -> Option<(&Type, Multiplicity)> {
        match self.lookup(x)? {
            EnvEntry::Term { ty, mult, .. } => Some((ty, *mult)),
            EnvEntry::TyVar { .. } => None,
        }
    }

    pub fn lookup_tyvar(&self, a: &Name) -> Option<Kind> {
        match self.lookup(a)? {
            EnvEntry::TyVar { kind, .. } => Some(*kind),
            EnvEntry::Term { .. } => None,
        }
    }

    /// The right-hand side of the most recent equation `x = W` about the
    /// innermost binding of `x`.
    pub fn equation_for(&self, x: &Name) -> Option<&Value> {
        for e in self.entries.iter().rev() {
            match e {
                EnvEntry::Term { ty: Type::Eq { lhs: Value::Var(y), rhs, .. }, .. } if y == x => return Some(rhs),
                e if e.name() == x => return None,
                _ => {}
            }
        }
        None
    }

    fn with_entries(&self, entries: Vec<EnvEntry>) -> TypeEnv {
        TypeEnv { entries, consumed: self.consumed.clone() }
    }

    fn without(&self, x: &Name) -> TypeEnv {
        self.with_entries(self.entries.iter().filter(|e| e.name() != x).cloned().collect())
    }

    /// Removes a binding; used to produce output environments.
    pub fn consume(&self, x: &Name) -> Result<TypeEnv, EnvError> {
        if !self.contains(x) {
            return Err(EnvError::Unbound(x.clone()));
        }
        let mut out = self.without(x);
        out.consumed.push(x.clone());
        Ok(out)
    }

    /// Whether `x` was a linear binding that has already been used.
    pub fn was_consumed(&self, x: &Name) -> bool {
        !self.contains(x) && self.consumed.contains(x)
    }

    /// Drops a binding if present.
    pub fn remove(&self, x: &Name) -> TypeEnv {
        self.without(x)
    }

    /// The unrestricted part, read from the cached multiplicities.
    pub fn unr(&self) -> TypeEnv {
        self.with_entries(self.entries.iter().filter(|e| !e.is_linear()).cloned().collect())
    }

    /// The unrestricted part according to an external kind oracle.
    pub fn unr_by(&self, mut kind_of: impl FnMut(&TypeEnv, &Type) -> Kind) -> TypeEnv {
        let mut out = self.with_entries(Vec::new());
        for e in &self.entries {
            match e {
                EnvEntry::Term { ty, .. } => {
                    if kind_of(&out, ty).mult == Multiplicity::Un {
                        out.entries.push(e.clone());
                    }
                }
                EnvEntry::TyVar { .. } => out.entries.push(e.clone()),
            }
        }
        out
    }

    pub fn is_unrestricted(&self) -> bool {
        self.entries.iter().all(|e| !e.is_linear())
    }

    pub fn linear_names(&self) -> Vec<Name> {
        self.entries.iter().filter(|e| e.is_linear()).map(|e| e.name().clone()).collect()
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.entries.iter().map(|e| e.name().clone()).collect()
    }

    /// Inverse of the split: shared names must be unrestricted with
    /// alpha-equal types; linear names must come from exactly one side.
    pub fn join(a: &TypeEnv, b: &TypeEnv) -> Result<TypeEnv, EnvError> {
        let mut out = Vec::new();
        let mut bi = 0;
        for e in &a.entries {
            match b.lookup(e.name()) {
                Some(other) => {
                    if e.is_linear() || other.is_linear() || !same_entry(e, other) {
                        return Err(EnvError::JoinConflict(e.name().clone()));
                    }
                    // Entries of `b` that precede the shared one come first so
                    // the telescope stays ordered.
                    while bi < b.entries.len() && b.entries[bi].name() != e.name() {
                        let f = &b.entries[bi];
                        if !a.contains(f.name()) && !out.iter().any(|o: &EnvEntry| o.name() == f.name()) {
                            out.push(f.clone());
                        }
                        bi += 1;
                    }
                    bi += 1;
                    out.push(e.clone());
                }
                None => out.push(e.clone()),
            }
        }
        for f in &b.entries[bi.min(b.entries.len())..] {
            if !a.contains(f.name()) && !out.iter().any(|o| o.name() == f.name()) {
                out.push(f.clone());
            }
        }
        let mut consumed = a.consumed.clone();
        consumed.extend(b.consumed.iter().filter(|n| !a.consumed.contains(n)).cloned());
        Ok(TypeEnv { entries: out, consumed })
    }

    /// Same domain and alpha-equal types, ignoring order.
    pub fn same_bindings(&self, other: &TypeEnv) -> Result<(), Name> {
        for e in &self.entries {
            match other.lookup(e.name()) {
                Some(f) if same_entry(e, f) => {}
                _ => return Err(e.name().clone()),
            }
        }
        for f in &other.entries {
            if !self.contains(f.name()) {
                return Err(f.name().clone());
            }
        }
        Ok(())
    }
}

fn same_entry(a: &EnvEntry, b: &EnvEntry) -> bool {
    match (a, b) {
        (EnvEntry::Term { ty: s, mult: m, .. }, EnvEntry::Term { ty: t, mult: n, .. }) => {
            m == n && alpha_eq(s, t)
        }
        (EnvEntry::TyVar { kind: k, .. }, EnvEntry::TyVar { kind: l, .. }) => k == l,
        _ => false,
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            match e {
                EnvEntry::Term { name, ty, .. } => writeln!(f, "{name} : {ty}")?,
                EnvEntry::TyVar { name, kind } => writeln!(f, "{name} :: {kind}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Label;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn chan() -> Type {
        Type::send(n("x"), Type::Int, Type::End)
    }

    #[test]
    fn unr_keeps_unrestricted_bindings() {
        assert!(TypeEnv::new().unr().is_empty());
        let g = TypeEnv::new()
            .bind(n("n"), Type::Nat, Multiplicity::Un)
            .bind(n("c"), chan(), Multiplicity::Lin);
        let u = g.unr();
        assert_eq!(u.len(), 1);
        assert!(u.contains(&n("n")));
        assert_eq!(u.unr(), u);
    }

    #[test]
    fn unr_keeps_labels_and_equations() {
        let g = TypeEnv::new()
            .bind(n("x"), Type::labels(&["A", "B"]), Multiplicity::Un)
            .bind_eq(&n("x"), Type::labels(&["A", "B"]), Value::Label(Label::new("A")));
        assert_eq!(g.unr(), g);
        assert_eq!(g.equation_for(&n("x")), Some(&Value::Label(Label::new("A"))));
    }

    #[test]
    fn join_examples() {
        let g = TypeEnv::new()
            .bind(n("n"), Type::Nat, Multiplicity::Un)
            .bind(n("c"), chan(), Multiplicity::Lin);
        assert_eq!(TypeEnv::join(&g, &g.unr()).unwrap().same_bindings(&g), Ok(()));
        let c = TypeEnv::new().bind(n("c"), chan(), Multiplicity::Lin);
        let d = TypeEnv::new().bind(n("d"), chan(), Multiplicity::Lin);
        let cd = TypeEnv::join(&c, &d).unwrap();
        assert_eq!(cd.len(), 2);
        assert_eq!(TypeEnv::join(&c, &c), Err(EnvError::JoinConflict(n("c"))));
    }

    #[test]
    fn consume_examples() {
        let g = TypeEnv::new().bind(n("x"), Type::Int, Multiplicity::Un);
        assert!(g.consume(&n("x")).unwrap().is_empty());
        let g2 = g.bind(n("y"), Type::Unit, Multiplicity::Un);
        assert_eq!(g2.consume(&n("x")).unwrap().len(), 1);
        assert_eq!(TypeEnv::new().consume(&n("x")), Err(EnvError::Unbound(n("x"))));
    }

    #[test]
    fn debug_dump_format() {
        let g = TypeEnv::new().bind(n("x"), Type::Int, Multiplicity::Un);
        assert_eq!(g.to_string(), "x : Int\n");
    }
}
