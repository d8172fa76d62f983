//! Abstract syntax of LDGV: types, values, expressions and processes.
//!
//! Types and terms are plain trees. Term variables and type variables live
//! in separate namespaces. Binders are ordinary names; capture is avoided
//! by renaming with [`Name::fresh`].

mod alpha;
mod dual;
mod print;
mod subst;

pub use alpha::{alpha_eq, alpha_eq_expr, alpha_eq_process, alpha_eq_value};
pub use dual::{dual, flip_tvar, is_session, NotASessionType};
pub use print::print_program;
pub use subst::{
    rename_expr, subst_expr, subst_process, subst_tvar, subst_type, subst_value,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static FRESH: AtomicU64 = AtomicU64::new(0);

/// An interned identifier for term variables, type variables and endpoints.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// A name that has never been produced before in this process.
    ///
    /// The result keeps the stem of `base` and appends `'n`, so it still
    /// lexes as an identifier.
    pub fn fresh(base: &str) -> Self {
        let n = FRESH.fetch_add(1, Ordering::Relaxed);
        let stem = base.split('\'').next().unwrap_or("");
        let stem = if stem.is_empty() || stem == "_" { "x" } else { stem };
        Name(Arc::from(format!("{stem}'{n}")))
    }

    /// The environment key used for a runtime channel endpoint.
    pub fn chan(id: ChanId) -> Self {
        Name(Arc::from(format!("#{}", id.0)))
    }

    pub fn is_wildcard(&self) -> bool {
        &*self.0 == "_"
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The end-of-session marker used by the LSST embedding.
    pub fn eos() -> Self {
        Label::new("EOS")
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}", self.0)
    }
}

/// A non-empty, canonically ordered set of labels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LabelSet(BTreeSet<Label>);

impl LabelSet {
    /// Returns `None` for an empty collection.
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Option<Self> {
        let set: BTreeSet<Label> = labels.into_iter().collect();
        if set.is_empty() {
            None
        } else {
            Some(LabelSet(set))
        }
    }

    pub fn singleton(l: Label) -> Self {
        LabelSet(BTreeSet::from([l]))
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.0.contains(l)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &LabelSet) -> Option<LabelSet> {
        LabelSet::new(self.0.intersection(&other.0).cloned())
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        LabelSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    Un,
    Lin,
}

impl Multiplicity {
    pub fn leq(self, other: Multiplicity) -> bool {
        self == Multiplicity::Un || other == Multiplicity::Lin
    }

    pub fn join(self, other: Multiplicity) -> Multiplicity {
        if self == Multiplicity::Lin || other == Multiplicity::Lin {
            Multiplicity::Lin
        } else {
            Multiplicity::Un
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Un => f.write_str("un"),
            Multiplicity::Lin => f.write_str("lin"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Session,
    General,
}

/// Base class paired with a multiplicity, ordered componentwise.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
pub struct Kind {
    pub base: BaseKind,
    pub mult: Multiplicity,
}

impl Kind {
    pub const SU: Kind = Kind { base: BaseKind::Session, mult: Multiplicity::Un };
    pub const SL: Kind = Kind { base: BaseKind::Session, mult: Multiplicity::Lin };
    pub const GU: Kind = Kind { base: BaseKind::General, mult: Multiplicity::Un };
    pub const GL: Kind = Kind { base: BaseKind::General, mult: Multiplicity::Lin };

    pub fn new(base: BaseKind, mult: Multiplicity) -> Self {
        Kind { base, mult }
    }

    pub fn general(mult: Multiplicity) -> Self {
        Kind { base: BaseKind::General, mult }
    }

    pub fn leq(self, other: Kind) -> bool {
        let base_ok = self.base == BaseKind::Session || other.base == BaseKind::General;
        base_ok && self.mult.leq(other.mult)
    }

    pub fn join(self, other: Kind) -> Kind {
        let base = if self.base == BaseKind::General || other.base == BaseKind::General {
            BaseKind::General
        } else {
            BaseKind::Session
        };
        Kind { base, mult: self.mult.join(other.mult) }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.base {
            BaseKind::Session => "session",
            BaseKind::General => "general",
        };
        write!(f, "{b}^{}", self.mult)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

/// Identity of a runtime channel endpoint.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ChanId(pub u32);

#[derive(Clone, PartialEq, Debug)]
pub enum Type {
    Unit,
    Int,
    Nat,
    End,
    Label(LabelSet),
    Eq { index: Box<Type>, lhs: Value, rhs: Value },
    Case { scrutinee: Value, branches: BTreeMap<Label, Type> },
    Pi { mult: Multiplicity, binder: Name, dom: Box<Type>, cod: Box<Type> },
    Sigma { binder: Name, fst: Box<Type>, snd: Box<Type> },
    Send { binder: Name, payload: Box<Type>, cont: Box<Type> },
    Recv { binder: Name, payload: Box<Type>, cont: Box<Type> },
    NatRec { scrutinee: Value, zero: Box<Type>, var: Name, kind: Kind, succ: Box<Type> },
    TVar { name: Name, pol: Polarity },
}

#[derive(Clone, PartialEq, Debug)]
pub enum Value {
    Var(Name),
    Chan(ChanId),
    Label(Label),
    Unit,
    Int(i64),
    Zero,
    Succ(Box<Value>),
    Lam { mult: Multiplicity, binder: Name, annot: Box<Type>, body: Box<Expr> },
    /// `<x : A = V, W>`; the binder scopes over the second component.
    Pair { binder: Name, annot: Option<Box<Type>>, fst: Box<Value>, snd: Box<Value> },
    SendPartial(Box<Value>),
}

/// Annotation carried by the successor arm of a term-level recursor.
#[derive(Clone, PartialEq, Debug)]
pub struct RecMotive {
    /// Type variable standing for the type at the predecessor.
    pub tyvar: Option<Name>,
    pub kind: Option<Kind>,
    /// Type of the recursive-result binder, may mention `tyvar`.
    pub rec_ty: Type,
}

#[derive(Clone, PartialEq, Debug)]
pub enum Expr {
    Val(Value),
    Case(Value, BTreeMap<Label, Expr>),
    App(Box<Expr>, Box<Expr>),
    /// `<x : A = V, N>`; the binder scopes over `N`.
    Pair { binder: Name, annot: Option<Box<Type>>, fst: Value, snd: Box<Expr> },
    LetPair { fst: Name, snd: Name, bound: Box<Expr>, body: Box<Expr> },
    Let { binder: Name, bound: Box<Expr>, body: Box<Expr> },
    New(Type),
    Fork(Box<Expr>),
    Send(Box<Expr>),
    Recv(Box<Expr>),
    NatRec {
        scrutinee: Value,
        zero: Box<Expr>,
        pred: Name,
        rec: Name,
        motive: Box<RecMotive>,
        succ: Box<Expr>,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
}

#[derive(Clone, PartialEq, Debug)]
pub enum Process {
    Expr(Expr),
    Par(Box<Process>, Box<Process>),
    /// Binds two endpoint names; `c` has `session`, `d` its dual.
    Nu { c: Name, d: Name, session: Type, body: Box<Process> },
}

/// A parsed LDGV program with type abbreviations already expanded.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub type_defs: Vec<(Name, Type)>,
    pub defs: Vec<Def>,
    pub main: Option<Def>,
}

#[derive(Clone, Debug)]
pub struct Def {
    pub name: Name,
    pub declared: Option<Type>,
    pub body: Expr,
    pub pos: SourcePos,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, serde::Serialize)]
pub struct SourcePos {
    pub line: u32,
    pub column: u32,
    pub offset: u32,
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

impl Type {
    pub fn label(l: &str) -> Type {
        Type::Label(LabelSet::singleton(Label::new(l)))
    }

    pub fn labels(ls: &[&str]) -> Type {
        Type::Label(LabelSet::new(ls.iter().map(|l| Label::new(l))).expect("non-empty label set"))
    }

    pub fn pi(mult: Multiplicity, binder: Name, dom: Type, cod: Type) -> Type {
        Type::Pi { mult, binder, dom: Box::new(dom), cod: Box::new(cod) }
    }

    /// Non-dependent function type with a fresh binder.
    pub fn arrow(mult: Multiplicity, dom: Type, cod: Type) -> Type {
        Type::pi(mult, Name::fresh("x"), dom, cod)
    }

    pub fn sigma(binder: Name, fst: Type, snd: Type) -> Type {
        Type::Sigma { binder, fst: Box::new(fst), snd: Box::new(snd) }
    }

    pub fn send(binder: Name, payload: Type, cont: Type) -> Type {
        Type::Send { binder, payload: Box::new(payload), cont: Box::new(cont) }
    }

    pub fn recv(binder: Name, payload: Type, cont: Type) -> Type {
        Type::Recv { binder, payload: Box::new(payload), cont: Box::new(cont) }
    }

    pub fn send_(payload: Type, cont: Type) -> Type {
        Type::send(Name::fresh("x"), payload, cont)
    }

    pub fn recv_(payload: Type, cont: Type) -> Type {
        Type::recv(Name::fresh("x"), payload, cont)
    }

    pub fn case(scrutinee: Value, branches: impl IntoIterator<Item = (Label, Type)>) -> Type {
        Type::Case { scrutinee, branches: branches.into_iter().collect() }
    }

    pub fn tvar(name: &str) -> Type {
        Type::TVar { name: Name::new(name), pol: Polarity::Pos }
    }

    /// Free term variables.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fv_type(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn mentions(&self, x: &Name) -> bool {
        self.free_vars().contains(x)
    }

    /// Free type variables.
    pub fn free_tvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        ftv_type(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Unit | Type::Int | Type::Nat | Type::End | Type::Label(_) | Type::TVar { .. } => 1,
            Type::Eq { index, .. } => 1 + index.size(),
            Type::Case { branches, .. } => 1 + branches.values().map(Type::size).sum::<usize>(),
            Type::Pi { dom, cod, .. } => 1 + dom.size() + cod.size(),
            Type::Sigma { fst, snd, .. } => 1 + fst.size() + snd.size(),
            Type::Send { payload, cont, .. } | Type::Recv { payload, cont, .. } => {
                1 + payload.size() + cont.size()
            }
            Type::NatRec { zero, succ, .. } => 1 + zero.size() + succ.size(),
        }
    }
}

impl Value {
    pub fn var(s: &str) -> Value {
        Value::Var(Name::new(s))
    }

    pub fn label(s: &str) -> Value {
        Value::Label(Label::new(s))
    }

    pub fn nat(n: u64) -> Value {
        let mut v = Value::Zero;
        for _ in 0..n {
            v = Value::Succ(Box::new(v));
        }
        v
    }

    /// The numeral as a machine integer, if this is a closed `S^n(Z)`.
    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Value::Zero => Some(0),
            Value::Succ(v) => v.as_nat().map(|n| n + 1),
            _ => None,
        }
    }

    pub fn into_expr(self) -> Expr {
        Expr::Val(self)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fv_value(self, &mut Vec::new(), &mut out);
        out
    }

    /// Channel endpoints occurring anywhere inside.
    pub fn channels(&self, out: &mut BTreeSet<ChanId>) {
        match self {
            Value::Chan(c) => {
                out.insert(*c);
            }
            Value::Succ(v) | Value::SendPartial(v) => v.channels(out),
            Value::Lam { body, .. } => body.channels(out),
            Value::Pair { fst, snd, .. } => {
                fst.channels(out);
                snd.channels(out);
            }
            _ => {}
        }
    }
}

impl From<Value> for Expr {
    fn from(v: Value) -> Expr {
        Expr::Val(v)
    }
}

impl Expr {
    pub fn var(s: &str) -> Expr {
        Expr::Val(Value::var(s))
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    pub fn let_(x: &str, m: Expr, n: Expr) -> Expr {
        Expr::Let { binder: Name::new(x), bound: Box::new(m), body: Box::new(n) }
    }

    pub fn let_pair(x: &str, y: &str, m: Expr, n: Expr) -> Expr {
        Expr::LetPair { fst: Name::new(x), snd: Name::new(y), bound: Box::new(m), body: Box::new(n) }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Expr::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fv_expr(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn channels(&self, out: &mut BTreeSet<ChanId>) {
        match self {
            Expr::Val(v) => v.channels(out),
            Expr::Case(v, br) => {
                v.channels(out);
                br.values().for_each(|e| e.channels(out));
            }
            Expr::App(a, b) | Expr::Add(a, b) => {
                a.channels(out);
                b.channels(out);
            }
            Expr::Pair { fst, snd, .. } => {
                fst.channels(out);
                snd.channels(out);
            }
            Expr::LetPair { bound, body, .. } | Expr::Let { bound, body, .. } => {
                bound.channels(out);
                body.channels(out);
            }
            Expr::New(_) => {}
            Expr::Fork(e) | Expr::Send(e) | Expr::Recv(e) | Expr::Neg(e) => e.channels(out),
            Expr::NatRec { scrutinee, zero, succ, .. } => {
                scrutinee.channels(out);
                zero.channels(out);
                succ.channels(out);
            }
        }
    }

    /// Rewrites expression forms whose parts are all values into the
    /// corresponding value forms (`send V`, `<x = V, W>`).
    pub fn canonical(self) -> Expr {
        match self {
            Expr::Send(e) => match e.canonical() {
                Expr::Val(v) => Expr::Val(Value::SendPartial(Box::new(v))),
                e => Expr::Send(Box::new(e)),
            },
            Expr::Pair { binder, annot, fst, snd } => match snd.canonical() {
                Expr::Val(w) => Expr::Val(Value::Pair {
                    binder,
                    annot,
                    fst: Box::new(fst),
                    snd: Box::new(w),
                }),
                snd => Expr::Pair { binder, annot, fst, snd: Box::new(snd) },
            },
            Expr::App(a, b) => Expr::app(a.canonical(), b.canonical()),
            Expr::Case(v, br) => {
                Expr::Case(v, br.into_iter().map(|(l, e)| (l, e.canonical())).collect())
            }
            Expr::LetPair { fst, snd, bound, body } => Expr::LetPair {
                fst,
                snd,
                bound: Box::new(bound.canonical()),
                body: Box::new(body.canonical()),
            },
            Expr::Let { binder, bound, body } => Expr::Let {
                binder,
                bound: Box::new(bound.canonical()),
                body: Box::new(body.canonical()),
            },
            Expr::Fork(e) => Expr::Fork(Box::new(e.canonical())),
            Expr::Recv(e) => Expr::Recv(Box::new(e.canonical())),
            Expr::Neg(e) => Expr::Neg(Box::new(e.canonical())),
            Expr::Add(a, b) => Expr::Add(Box::new(a.canonical()), Box::new(b.canonical())),
            Expr::NatRec { scrutinee, zero, pred, rec, motive, succ } => Expr::NatRec {
                scrutinee,
                zero: Box::new(zero.canonical()),
                pred,
                rec,
                motive,
                succ: Box::new(succ.canonical()),
            },
            e @ (Expr::Val(_) | Expr::New(_)) => e,
        }
    }
}

fn bound(scope: &[Name], x: &Name) -> bool {
    scope.iter().any(|y| y == x)
}

fn fv_type(t: &Type, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Type::Unit | Type::Int | Type::Nat | Type::End | Type::Label(_) | Type::TVar { .. } => {}
        Type::Eq { index, lhs, rhs } => {
            fv_type(index, scope, out);
            fv_value(lhs, scope, out);
            fv_value(rhs, scope, out);
        }
        Type::Case { scrutinee, branches } => {
            fv_value(scrutinee, scope, out);
            branches.values().for_each(|b| fv_type(b, scope, out));
        }
        Type::Pi { binder, dom: a, cod: b, .. }
        | Type::Sigma { binder, fst: a, snd: b }
        | Type::Send { binder, payload: a, cont: b }
        | Type::Recv { binder, payload: a, cont: b } => {
            fv_type(a, scope, out);
            scope.push(binder.clone());
            fv_type(b, scope, out);
            scope.pop();
        }
        Type::NatRec { scrutinee, zero, succ, .. } => {
            fv_value(scrutinee, scope, out);
            fv_type(zero, scope, out);
            fv_type(succ, scope, out);
        }
    }
}

fn ftv_type(t: &Type, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Type::TVar { name, .. } => {
            if !bound(scope, name) {
                out.insert(name.clone());
            }
        }
        Type::Unit | Type::Int | Type::Nat | Type::End | Type::Label(_) => {}
        Type::Eq { index, .. } => ftv_type(index, scope, out),
        Type::Case { branches, .. } => branches.values().for_each(|b| ftv_type(b, scope, out)),
        Type::Pi { dom: a, cod: b, .. }
        | Type::Sigma { fst: a, snd: b, .. }
        | Type::Send { payload: a, cont: b, .. }
        | Type::Recv { payload: a, cont: b, .. } => {
            ftv_type(a, scope, out);
            ftv_type(b, scope, out);
        }
        Type::NatRec { zero, var, succ, .. } => {
            ftv_type(zero, scope, out);
            scope.push(var.clone());
            ftv_type(succ, scope, out);
            scope.pop();
        }
    }
}

fn fv_value(v: &Value, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match v {
        Value::Var(x) => {
            if !bound(scope, x) {
                out.insert(x.clone());
            }
        }
        Value::Chan(_) | Value::Label(_) | Value::Unit | Value::Int(_) | Value::Zero => {}
        Value::Succ(v) | Value::SendPartial(v) => fv_value(v, scope, out),
        Value::Lam { binder, annot, body, .. } => {
            fv_type(annot, scope, out);
            scope.push(binder.clone());
            fv_expr(body, scope, out);
            scope.pop();
        }
        Value::Pair { binder, annot, fst, snd } => {
            if let Some(a) = annot {
                fv_type(a, scope, out);
            }
            fv_value(fst, scope, out);
            scope.push(binder.clone());
            fv_value(snd, scope, out);
            scope.pop();
        }
    }
}

fn fv_expr(e: &Expr, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match e {
        Expr::Val(v) => fv_value(v, scope, out),
        Expr::Case(v, br) => {
            fv_value(v, scope, out);
            br.values().for_each(|b| fv_expr(b, scope, out));
        }
        Expr::App(a, b) | Expr::Add(a, b) => {
            fv_expr(a, scope, out);
            fv_expr(b, scope, out);
        }
        Expr::Pair { binder, annot, fst, snd } => {
            if let Some(a) = annot {
                fv_type(a, scope, out);
            }
            fv_value(fst, scope, out);
            scope.push(binder.clone());
            fv_expr(snd, scope, out);
            scope.pop();
        }
        Expr::LetPair { fst, snd, bound, body } => {
            fv_expr(bound, scope, out);
            scope.push(fst.clone());
            scope.push(snd.clone());
            fv_expr(body, scope, out);
            scope.pop();
            scope.pop();
        }
        Expr::Let { binder, bound, body } => {
            fv_expr(bound, scope, out);
            scope.push(binder.clone());
            fv_expr(body, scope, out);
            scope.pop();
        }
        Expr::New(t) => fv_type(t, scope, out),
        Expr::Fork(e) | Expr::Send(e) | Expr::Recv(e) | Expr::Neg(e) => fv_expr(e, scope, out),
        Expr::NatRec { scrutinee, zero, pred, rec, motive, succ } => {
            fv_value(scrutinee, scope, out);
            fv_expr(zero, scope, out);
            scope.push(pred.clone());
            fv_type(&motive.rec_ty, scope, out);
            scope.push(rec.clone());
            fv_expr(succ, scope, out);
            scope.pop();
            scope.pop();
        }
    }
}

impl Process {
    pub fn par(p: Process, q: Process) -> Process {
        Process::Par(Box::new(p), Box::new(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_order() {
        use Multiplicity::*;
        assert!(Un.leq(Lin));
        assert!(Un.leq(Un));
        assert!(Lin.leq(Lin));
        assert!(!Lin.leq(Un));
    }

    #[test]
    fn kind_order_and_join() {
        assert!(Kind::SU.leq(Kind::SL));
        assert!(Kind::SU.leq(Kind::GU));
        assert!(Kind::SL.leq(Kind::GL));
        assert!(!Kind::GU.leq(Kind::SL));
        assert!(!Kind::SL.leq(Kind::GU));
        assert_eq!(Kind::SL.join(Kind::GU), Kind::GL);
        assert_eq!(Kind::SU.join(Kind::SU), Kind::SU);
    }

    #[test]
    fn label_sets_are_never_empty() {
        assert!(LabelSet::new(Vec::<Label>::new()).is_none());
        let a = LabelSet::new([Label::new("A")]).unwrap();
        let ab = LabelSet::new([Label::new("B"), Label::new("A")]).unwrap();
        assert!(a.is_subset(&ab));
        assert!(!ab.is_subset(&a));
        assert_eq!(a.intersection(&ab), Some(a.clone()));
    }

    #[test]
    fn polarity_flip_is_involution() {
        assert_eq!(Polarity::Pos.flip().flip(), Polarity::Pos);
        assert_eq!(Polarity::Neg.flip(), Polarity::Pos);
    }

    #[test]
    fn fresh_names_differ_and_keep_stem() {
        let a = Name::fresh("c");
        let b = Name::fresh(a.as_str());
        assert_ne!(a, b);
        assert!(b.as_str().starts_with("c'"));
    }

    #[test]
    fn nat_numerals() {
        assert_eq!(Value::nat(3).as_nat(), Some(3));
        assert_eq!(Value::var("n").as_nat(), None);
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = Type::pi(
            Multiplicity::Un,
            Name::new("x"),
            Type::labels(&["A"]),
            Type::case(Value::var("x"), [(Label::new("A"), Type::Unit)]),
        );
        assert!(t.free_vars().is_empty());
        let u = Type::case(Value::var("y"), [(Label::new("A"), Type::Unit)]);
        assert!(u.mentions(&Name::new("y")));
    }
}
