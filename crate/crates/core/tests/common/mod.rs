//! Random types for the property tests.
//!
//! Generators take an explicit RNG so that proptest only has to supply a
//! seed; binders are tracked in a scope so that every dependency refers to
//! a name of label or natural type that is actually in scope.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ldst::ast::{Kind, Label, LabelSet, Multiplicity, Name, Polarity, Type, Value};
use ldst::env::TypeEnv;
use ldst::lsst::LType;

pub fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

pub fn read_program(rel: &str) -> String {
    std::fs::read_to_string(programs().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Sorted `.ldgv` files directly inside `programs/<dir>`.
pub fn ldgv_files(dir: &str) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(programs().join(dir))
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".ldgv"))
        .map(|n| if dir.is_empty() { n } else { format!("{dir}/{n}") })
        .collect();
    v.sort();
    v
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const LABELS: [&str; 4] = ["A", "B", "C", "D"];

pub fn label_set(rng: &mut impl Rng) -> LabelSet {
    let n = rng.gen_range(1..=3);
    let mut ls: Vec<&str> = LABELS.to_vec();
    ls.shuffle(rng);
    LabelSet::new(ls[..n].iter().map(|l| Label::new(l))).unwrap()
}

pub fn nat(n: u64) -> Value {
    Value::nat(n)
}

#[derive(Clone, Default)]
pub struct Scope {
    labels: Vec<(Name, LabelSet)>,
    nats: Vec<Name>,
    tyvars: Vec<Name>,
}

impl Scope {
    /// The environment binding the scope's term names.
    pub fn env(&self) -> TypeEnv {
        let mut g = TypeEnv::new();
        for (x, ls) in &self.labels {
            g = g.bind(x.clone(), Type::Label(ls.clone()), Multiplicity::Un);
        }
        for x in &self.nats {
            g = g.bind(x.clone(), Type::Nat, Multiplicity::Un);
        }
        g
    }

    pub fn with_label(mut self, x: &str, ls: LabelSet) -> Scope {
        self.labels.push((Name::new(x), ls));
        self
    }

    pub fn with_nat(mut self, x: &str) -> Scope {
        self.nats.push(Name::new(x));
        self
    }
}

pub struct Gen<R> {
    pub rng: R,
    next: u32,
}

impl<R: Rng> Gen<R> {
    pub fn new(rng: R) -> Self {
        Gen { rng, next: 0 }
    }

    fn fresh(&mut self, stem: &str) -> Name {
        self.next += 1;
        Name::new(&format!("{stem}{}", self.next))
    }

    /// A payload type; label payloads are returned with their set so that
    /// the continuation may depend on them.
    fn payload(&mut self) -> (Type, Option<LabelSet>) {
        match self.rng.gen_range(0..5) {
            0 => (Type::Int, None),
            1 => (Type::Unit, None),
            2 => (Type::Nat, None),
            _ => {
                let ls = label_set(&mut self.rng);
                (Type::Label(ls.clone()), Some(ls))
            }
        }
    }

    /// A session type of depth at most `depth`, closed apart from `scope`.
    pub fn session(&mut self, depth: u32, scope: &Scope) -> Type {
        if depth == 0 {
            return match scope.tyvars.choose(&mut self.rng) {
                Some(a) if self.rng.gen_bool(0.5) => Type::TVar { name: a.clone(), pol: Polarity::Pos },
                _ => Type::End,
            };
        }
        match self.rng.gen_range(0..10) {
            0 => Type::End,
            1..=5 => {
                let x = self.fresh("x");
                let (payload, ls) = self.payload();
                let mut inner = scope.clone();
                if let Some(ls) = ls {
                    inner.labels.push((x.clone(), ls));
                } else if payload == Type::Nat {
                    inner.nats.push(x.clone());
                }
                let cont = self.session(depth - 1, &inner);
                if self.rng.gen_bool(0.5) {
                    Type::send(x, payload, cont)
                } else {
                    Type::recv(x, payload, cont)
                }
            }
            6 | 7 if !scope.labels.is_empty() => {
                let (x, ls) = scope.labels.choose(&mut self.rng).unwrap().clone();
                let branches: BTreeMap<Label, Type> =
                    ls.iter().map(|l| (l.clone(), self.session(depth - 1, scope))).collect();
                Type::Case { scrutinee: Value::Var(x), branches }
            }
            _ => self.natrec(depth, scope, |g, d, s| g.session(d, s)),
        }
    }

    /// A recursor type over a literal or a natural in scope.
    fn natrec(&mut self, depth: u32, scope: &Scope, mut body: impl FnMut(&mut Self, u32, &Scope) -> Type) -> Type {
        let scrutinee = match scope.nats.choose(&mut self.rng) {
            Some(n) if self.rng.gen_bool(0.5) => Value::Var(n.clone()),
            _ => nat(self.rng.gen_range(0..3)),
        };
        let zero = body(self, depth - 1, scope);
        let a = self.fresh("a");
        let mut inner = scope.clone();
        inner.tyvars.push(a.clone());
        let succ = body(self, depth - 1, &inner);
        Type::NatRec { scrutinee, zero: Box::new(zero), var: a, kind: Kind::SL, succ: Box::new(succ) }
    }

    /// A type of any kind. Dependencies only ever refer to unrestricted
    /// binders, so the result is well-kinded apart from rare corner cases
    /// that callers filter with the kind checker.
    pub fn ty(&mut self, depth: u32, scope: &Scope) -> Type {
        if depth == 0 {
            return match self.rng.gen_range(0..5) {
                0 => Type::Int,
                1 => Type::Unit,
                2 => Type::Nat,
                3 => Type::End,
                _ => Type::Label(label_set(&mut self.rng)),
            };
        }
        match self.rng.gen_range(0..8) {
            0 | 1 => self.session(depth, scope),
            2 | 3 => {
                let x = self.fresh("x");
                let (dom, ls) = self.payload();
                let mut inner = scope.clone();
                if let Some(ls) = ls {
                    inner.labels.push((x.clone(), ls));
                }
                let cod = self.ty(depth - 1, &inner);
                let mult = if self.rng.gen_bool(0.5) { Multiplicity::Un } else { Multiplicity::Lin };
                Type::pi(mult, x, dom, cod)
            }
            4 => {
                let dom = self.session(depth - 1, scope);
                let cod = self.ty(depth - 1, scope);
                Type::arrow(Multiplicity::Lin, dom, cod)
            }
            5 => {
                let x = self.fresh("x");
                let (fst, ls) = self.payload();
                let mut inner = scope.clone();
                if let Some(ls) = ls {
                    inner.labels.push((x.clone(), ls));
                }
                let snd = self.ty(depth - 1, &inner);
                Type::sigma(x, fst, snd)
            }
            6 if !scope.labels.is_empty() => {
                let (x, ls) = scope.labels.choose(&mut self.rng).unwrap().clone();
                let branches = ls.iter().map(|l| (l.clone(), self.ty(depth - 1, scope))).collect();
                Type::Case { scrutinee: Value::Var(x), branches }
            }
            _ => self.ty(0, scope),
        }
    }

    /// A supertype of `t`, built by widening label sets in covariant
    /// positions, narrowing them in contravariant ones, and relaxing `un`
    /// functions to `lin`. Sets that something depends on are kept.
    pub fn widen(&mut self, t: &Type, positive: bool) -> Type {
        match t {
            Type::Label(ls) => Type::Label(if positive { self.grow(ls) } else { self.shrink(ls) }),
            Type::Pi { mult, binder, dom, cod } => {
                let dom = if cod.mentions(binder) { (**dom).clone() } else { self.widen(dom, !positive) };
                let mult = match (mult, positive) {
                    (Multiplicity::Un, true) if self.rng.gen_bool(0.3) => Multiplicity::Lin,
                    (m, _) => *m,
                };
                Type::Pi { mult, binder: binder.clone(), dom: Box::new(dom), cod: Box::new(self.widen(cod, positive)) }
            }
            Type::Sigma { binder, fst, snd } => {
                let fst = if snd.mentions(binder) { (**fst).clone() } else { self.widen(fst, positive) };
                Type::Sigma { binder: binder.clone(), fst: Box::new(fst), snd: Box::new(self.widen(snd, positive)) }
            }
            Type::Send { binder, payload, cont } => {
                let payload = if cont.mentions(binder) { (**payload).clone() } else { self.widen(payload, !positive) };
                Type::Send { binder: binder.clone(), payload: Box::new(payload), cont: Box::new(self.widen(cont, positive)) }
            }
            Type::Recv { binder, payload, cont } => {
                let payload = if cont.mentions(binder) { (**payload).clone() } else { self.widen(payload, positive) };
                Type::Recv { binder: binder.clone(), payload: Box::new(payload), cont: Box::new(self.widen(cont, positive)) }
            }
            Type::Case { scrutinee, branches } => Type::Case {
                scrutinee: scrutinee.clone(),
                branches: branches.iter().map(|(l, b)| (l.clone(), self.widen(b, positive))).collect(),
            },
            other => other.clone(),
        }
    }

    fn grow(&mut self, ls: &LabelSet) -> LabelSet {
        let extra = Label::new(LABELS.choose(&mut self.rng).unwrap());
        ls.union(&LabelSet::singleton(extra))
    }

    fn shrink(&mut self, ls: &LabelSet) -> LabelSet {
        if ls.len() == 1 {
            return ls.clone();
        }
        let keep: Vec<Label> = ls.iter().skip(1).cloned().collect();
        LabelSet::new(keep).unwrap()
    }

    /// A type whose head is a case or a recursor, for the unfolding suite.
    /// The scope holds `l : {A, B, C}` and `n : Nat`.
    pub fn unfoldable(&mut self, depth: u32) -> (Type, Scope) {
        let scope = Scope::default()
            .with_label("l", LabelSet::new(["A", "B", "C"].map(Label::new)).unwrap())
            .with_nat("n");
        let t = match self.rng.gen_range(0..4) {
            // A known label selects a branch.
            0 => {
                let branches = ["A", "B", "C"].map(|l| (Label::new(l), self.ty(depth - 1, &scope))).into();
                let pick = *["A", "B", "C"].choose(&mut self.rng).unwrap();
                Type::Case { scrutinee: Value::label(pick), branches }
            }
            // An unknown label over branches that share a head.
            1 => {
                let x = self.fresh("x");
                let (payload, _) = self.payload();
                let recv = self.rng.gen_bool(0.5);
                let mut branches = BTreeMap::new();
                for l in ["A", "B", "C"] {
                    let cont = self.session(depth - 1, &scope);
                    let s = if recv {
                        Type::recv(x.clone(), payload.clone(), cont)
                    } else {
                        Type::send(x.clone(), payload.clone(), cont)
                    };
                    branches.insert(Label::new(l), s);
                }
                Type::Case { scrutinee: Value::var("l"), branches }
            }
            // Branches whose heads differ; unfolding may fail.
            2 => {
                let branches = ["A", "B", "C"].map(|l| (Label::new(l), self.session(depth - 1, &scope))).into();
                Type::Case { scrutinee: Value::var("l"), branches }
            }
            _ => self.natrec(depth, &scope, |g, d, s| g.session(d, s)),
        };
        (t, scope)
    }
}

/// LSST session types of bounded depth.
pub fn lsst_session(rng: &mut impl Rng, depth: u32) -> LType {
    if depth == 0 {
        return if rng.gen_bool(0.5) { LType::EndOut } else { LType::EndIn };
    }
    let payload = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..3) {
        0 => LType::Int,
        1 => LType::Unit,
        _ => LType::Prod(Box::new(LType::Int), Box::new(LType::Unit)),
    };
    match rng.gen_range(0..6) {
        0 => LType::EndOut,
        1 => LType::send(payload(rng), lsst_session(rng, depth - 1)),
        2 => LType::recv(payload(rng), lsst_session(rng, depth - 1)),
        k => {
            let n = rng.gen_range(1..=3);
            let mut ls: Vec<&str> = LABELS.to_vec();
            ls.shuffle(rng);
            let br = ls[..n].iter().map(|l| (Label::new(l), lsst_session(rng, depth - 1))).collect();
            if k % 2 == 0 {
                LType::Select(br)
            } else {
                LType::Branch(br)
            }
        }
    }
}

/// A supertype in the LSST relation: fewer choices, more offers.
pub fn lsst_widen(rng: &mut impl Rng, t: &LType) -> LType {
    match t {
        LType::Send(a, s) => LType::send((**a).clone(), lsst_widen(rng, s)),
        LType::Recv(a, s) => LType::recv((**a).clone(), lsst_widen(rng, s)),
        LType::Select(br) => {
            let mut out: BTreeMap<Label, LType> = br.iter().map(|(l, s)| (l.clone(), lsst_widen(rng, s))).collect();
            if out.len() > 1 && rng.gen_bool(0.5) {
                let first = out.keys().next().cloned().unwrap();
                out.remove(&first);
            }
            LType::Select(out)
        }
        LType::Branch(br) => {
            let mut out: BTreeMap<Label, LType> = br.iter().map(|(l, s)| (l.clone(), lsst_widen(rng, s))).collect();
            let extra = Label::new(LABELS.choose(rng).unwrap());
            out.entry(extra).or_insert(LType::EndIn);
            LType::Branch(out)
        }
        other => other.clone(),
    }
}
