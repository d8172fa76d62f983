mod common;

use proptest::prelude::*;

use common::{ldgv_files, lsst_session, lsst_widen, read_program, rng, Gen, Scope};
use ldst::ast::{alpha_eq, dual, is_session, print_program, Name, Type};
use ldst::checker::Checker;
use ldst::env::TypeEnv;
use ldst::lsst::{lsst_dual, lsst_sub, subst_lexpr, translate_type, LExpr};
use ldst::parser::{parse_ldgv, parse_type};

fn well_kinded(seed: u64, depth: u32) -> Option<(Type, TypeEnv)> {
    let mut g = Gen::new(rng(seed));
    let scope = Scope::default();
    let t = g.ty(depth, &scope);
    let env = scope.env();
    Checker::new().kind_synth(&env, &t).ok().map(|_| (t, env))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dual_is_an_involution(seed in any::<u64>()) {
        let s = Gen::new(rng(seed)).session(6, &Scope::default());
        prop_assert!(is_session(&s));
        let d = dual(&s).unwrap();
        prop_assert!(alpha_eq(&dual(&d).unwrap(), &s), "{s}");
    }

    #[test]
    fn generated_sessions_are_well_kinded(seed in any::<u64>()) {
        let s = Gen::new(rng(seed)).session(5, &Scope::default());
        let c = Checker::new();
        prop_assert!(c.kind_synth(&TypeEnv::new(), &s).is_ok(), "{s}");
        prop_assert!(c.kind_synth(&TypeEnv::new(), &dual(&s).unwrap()).is_ok(), "dual of {s}");
    }

    #[test]
    fn types_print_and_parse_back(seed in any::<u64>()) {
        let t = Gen::new(rng(seed)).ty(5, &Scope::default());
        let back = parse_type(&t.to_string(), &[]).unwrap();
        prop_assert!(alpha_eq(&back, &t), "{t} reparsed as {back}");
    }

    #[test]
    fn subtyping_is_reflexive(seed in any::<u64>()) {
        if let Some((t, g)) = well_kinded(seed, 5) {
            prop_assert!(Checker::new().sub_synth(&g, &t, &t).is_ok(), "{t}");
        }
    }

    #[test]
    fn subtyping_is_transitive(seed in any::<u64>()) {
        let mut g = Gen::new(rng(seed));
        let scope = Scope::default();
        let a = g.ty(4, &scope);
        let b = g.widen(&a, true);
        let c = g.widen(&b, true);
        let env = scope.env();
        let chk = Checker::new();
        if chk.sub_synth(&env, &a, &b).is_ok() && chk.sub_synth(&env, &b, &c).is_ok() {
            prop_assert!(chk.sub_synth(&env, &a, &c).is_ok(), "{a} <: {b} <: {c}");
        }
    }

    #[test]
    fn widening_yields_supertypes(seed in any::<u64>()) {
        let mut g = Gen::new(rng(seed));
        let scope = Scope::default();
        let a = g.session(4, &scope);
        let b = g.widen(&a, true);
        prop_assert!(Checker::new().sub_synth(&scope.env(), &a, &b).is_ok(), "{a} <: {b}");
    }

    #[test]
    fn unfold_is_sound(seed in any::<u64>()) {
        let mut g = Gen::new(rng(seed));
        let (t, scope) = g.unfoldable(4);
        let env = scope.env();
        let chk = Checker::new();
        if let Ok(u) = chk.unfold(&env, &t) {
            // A recursor may remain only when its scrutinee is unknown.
            let stuck_rec = matches!(&u, Type::NatRec { scrutinee, .. } if chk.convert_value(&env, scrutinee).is_err());
            prop_assert!(!matches!(u, Type::Case { .. }), "{t} unfolded to {u}");
            prop_assert!(stuck_rec || !matches!(u, Type::NatRec { .. }), "{t} unfolded to {u}");
            if chk.kind_synth(&env, &t).is_ok() {
                prop_assert!(chk.sub_synth(&env, &t, &u).is_ok(), "{t} <: {u}");
                prop_assert!(chk.sub_synth(&env, &u, &t).is_ok(), "{u} <: {t}");
            }
        }
    }

    #[test]
    fn lsst_dual_is_an_involution(seed in any::<u64>()) {
        let s = lsst_session(&mut rng(seed), 5);
        prop_assert_eq!(lsst_dual(&lsst_dual(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn translation_commutes_with_duality(seed in any::<u64>()) {
        let s = lsst_session(&mut rng(seed), 5);
        let lhs = translate_type(&lsst_dual(&s).unwrap());
        let rhs = dual(&translate_type(&s)).unwrap();
        prop_assert!(Checker::new().equivalent(&TypeEnv::new(), &lhs, &rhs).is_ok(), "{s}");
    }

    #[test]
    fn translation_preserves_subtyping(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = lsst_session(&mut r, 4);
        let b = lsst_widen(&mut r, &a);
        prop_assert!(lsst_sub(&a, &b));
        let (ta, tb) = (translate_type(&a), translate_type(&b));
        prop_assert!(Checker::new().sub_synth(&TypeEnv::new(), &ta, &tb).is_ok(), "{ta} <: {tb}");
    }

    #[test]
    fn lsst_substitution_of_an_absent_name_is_identity(n in any::<i64>(), k in 0usize..4) {
        let body = LExpr::Add(Box::new(LExpr::var("y")), Box::new(LExpr::Int(n)));
        let x = Name::new(["x", "z", "w", "q"][k]);
        prop_assert_eq!(subst_lexpr(&body, &x, &LExpr::Int(0)), body.clone());
        let hit = subst_lexpr(&body, &Name::new("y"), &LExpr::Int(1));
        prop_assert!(hit.free_vars().is_empty());
    }
}

#[test]
fn programs_print_and_parse_back() {
    for name in ldgv_files("").into_iter().chain(ldgv_files("corpus")) {
        let prog = parse_ldgv(&read_program(&name)).unwrap();
        let printed = print_program(&prog);
        let again = parse_ldgv(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(print_program(&again), printed, "{name}");
    }
}
