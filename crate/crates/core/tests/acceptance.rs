//! Acceptance suite. Prints one line per criterion and fails if any does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{ldgv_files, read_program, rng, Gen, Scope};
use ldst::ast::{alpha_eq, alpha_eq_value, dual, Multiplicity, Name, Program, Type};
use ldst::checker::{check_program, CheckMode, Checker};
use ldst::env::TypeEnv;
use ldst::eval::{run_program, Outcome, RunOptions};
use ldst::lsst::{lsst_type_check, simulate_check, translate, DEFAULT_RESYNC_BOUND};
use ldst::parser::{parse_ldgv, parse_lsst, parse_type, parse_value};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(name: &str) -> Result<Program, String> {
    parse_ldgv(&read_program(name)).map_err(|e| format!("{name}: {e}"))
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn run_main(prog: &Program, seed: Option<u64>, typed_replay: bool) -> Result<ldst::eval::RunResult, String> {
    run_program(prog, &RunOptions { seed, typed_replay, ..Default::default() }).map_err(|e| e.to_string())
}

fn criterion_1() -> Verdict {
    for name in ["listing3.ldgv", "listing4.ldgv", "listing5.ldgv", "listing6.ldgv", "listing7.ldgv"] {
        let start = Instant::now();
        let report = check_program(&load(name)?, CheckMode::KeepGoing);
        ensure(report.ok, || format!("{name}:\n{}", report.to_text()))?;
        within(Duration::from_secs(1), start, name)?;
    }
    for name in ["listing1.lsst", "listing2.lsst"] {
        let start = Instant::now();
        let prog = parse_lsst(&read_program(name)).map_err(|e| format!("{name}: {e}"))?;
        let tp = lsst_type_check(&prog, CheckMode::KeepGoing);
        ensure(tp.is_ok(), || format!("{name}:\n{}", tp.report.to_text()))?;
        within(Duration::from_secs(1), start, name)?;
    }
    load("listing8.ldgv")?;
    Ok("7 listings check, listing 8 parses".into())
}

fn deterministic(name: &str, want: &str) -> Result<(), String> {
    let prog = load(name)?;
    let report = check_program(&prog, CheckMode::KeepGoing);
    ensure(report.ok, || format!("{name}:\n{}", report.to_text()))?;
    for seed in 0..10 {
        let r = run_main(&prog, Some(seed), false)?;
        let got = r.outcome.main_value().map(|v| v.to_string());
        ensure(got.as_deref() == Some(want), || format!("{name} seed {seed}: {}", r.outcome))?;
    }
    Ok(())
}

fn criterion_2() -> Verdict {
    deterministic("compute.ldgv", "-5")?;
    deterministic("compute_add.ldgv", "7")?;
    Ok("Neg 5 = -5, Add 3 4 = 7 over 10 seeds".into())
}

fn criterion_3() -> Verdict {
    deterministic("sum.ldgv", "6")?;
    deterministic("sum_zero.ldgv", "0")?;
    Ok("sum 3 = 6, sum 0 = 0".into())
}

fn criterion_4() -> Verdict {
    let prog = load("nodes.ldgv")?;
    let report = check_program(&prog, CheckMode::KeepGoing);
    ensure(report.ok, || report.to_text())?;
    let r = run_main(&prog, None, false)?;
    let got = r.outcome.main_value().ok_or_else(|| r.outcome.to_string())?;
    let want = parse_value("<<Node, 42>, <Empty, ()>>").map_err(|e| e.to_string())?;
    ensure(alpha_eq_value(got, &want), || format!("got {got}"))?;
    Ok(format!("received {got}"))
}

fn criterion_5() -> Verdict {
    let c = Checker::new();
    let g = TypeEnv::new();
    let ty = |s: &str| parse_type(s, &[]).map_err(|e| e.to_string());
    let rec0 = ty("rec 0 (!Int.End) [alpha]?Int.alpha")?;
    let rec1 = ty("rec 1 (!Int.End) [alpha]?Int.alpha")?;
    let out = ty("!Int.End")?;
    let in_out = ty("?Int.!Int.End")?;
    for (a, b) in [(&rec0, &out), (&out, &rec0), (&rec1, &in_out), (&in_out, &rec1)] {
        c.sub_synth(&g, a, b).map_err(|e| format!("{a} <= {b}: {e}"))?;
    }
    let u = c.unfold(&g, &rec0).map_err(|e| e.to_string())?;
    ensure(alpha_eq(&u, &out), || format!("unfold gave {u}"))?;
    Ok("rec 0 = !Int.End, rec 1 = ?Int.!Int.End".into())
}

fn contains_rec(t: &Type) -> bool {
    t.to_string().contains("rec ")
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mut with_rec = 0;
    for seed in 0..1000u64 {
        let s = Gen::new(rng(seed)).session(6, &Scope::default());
        with_rec += contains_rec(&s) as usize;
        let d = dual(&s).map_err(|e| format!("{s}: {e}"))?;
        let dd = dual(&d).map_err(|e| format!("{d}: {e}"))?;
        ensure(alpha_eq(&dd, &s), || format!("dual(dual({s})) = {dd}"))?;
    }
    ensure(with_rec > 0, || "no recursor types generated".into())?;
    within(Duration::from_secs(5), start, "duality")?;
    Ok(format!("1000 types, {with_rec} with recursors"))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let c = Checker::new();
    let scope = Scope::default();
    let env = scope.env();
    let mut reflexive = 0;
    let mut seed = 0u64;
    while reflexive < 1000 {
        seed += 1;
        ensure(seed < 100_000, || format!("only {reflexive} well-kinded types"))?;
        let t = Gen::new(rng(seed)).ty(5, &scope);
        if c.kind_synth(&env, &t).is_err() {
            continue;
        }
        c.sub_synth(&env, &t, &t).map_err(|e| format!("{t} <= {t}: {e}"))?;
        reflexive += 1;
    }
    let mut chains = 0;
    let mut seed = 1u64 << 32;
    while chains < 200 {
        seed += 1;
        ensure(seed < (1u64 << 32) + 100_000, || format!("only {chains} accepted chains"))?;
        let mut g = Gen::new(rng(seed));
        let a = g.ty(4, &scope);
        let b = g.widen(&a, true);
        let d = g.widen(&b, true);
        if a == d || c.kind_synth(&env, &a).is_err() {
            continue;
        }
        if c.sub_synth(&env, &a, &b).is_ok() && c.sub_synth(&env, &b, &d).is_ok() {
            c.sub_synth(&env, &a, &d).map_err(|e| format!("{a} <= {b} <= {d} but: {e}"))?;
            chains += 1;
        }
    }
    within(Duration::from_secs(10), start, "subtyping")?;
    Ok("1000 reflexive, 200 transitive chains".into())
}

fn criterion_8() -> Verdict {
    let c = Checker::new();
    let mut unfolded = 0;
    let mut rejected = 0;
    let mut seed = 0u64;
    while unfolded + rejected < 500 {
        seed += 1;
        ensure(seed < 100_000, || "too few well-kinded types".into())?;
        let (t, scope) = Gen::new(rng(seed)).unfoldable(4);
        let env = scope.env();
        if c.kind_synth(&env, &t).is_err() {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(|| c.unfold(&env, &t)))
            .map_err(|_| format!("unfolding {t} panicked"))?;
        let Ok(u) = result else {
            rejected += 1;
            continue;
        };
        ensure(!matches!(u, Type::Case { .. }), || format!("{t} unfolded to a case"))?;
        if let Type::NatRec { scrutinee, .. } = &u {
            ensure(c.convert_value(&env, scrutinee).is_err(), || format!("{t} left a reducible recursor"))?;
        }
        c.sub_synth(&env, &t, &u).map_err(|e| format!("{t} <= {u}: {e}"))?;
        c.sub_synth(&env, &u, &t).map_err(|e| format!("{u} <= {t}: {e}"))?;
        unfolded += 1;
    }
    Ok(format!("{unfolded} unfolded, {rejected} rejected cleanly"))
}

fn criterion_9() -> Verdict {
    let mut ran = 0;
    let mut replayed = 0;
    let mut replay_failures = Vec::new();
    for name in ldgv_files("").into_iter().chain(ldgv_files("corpus")) {
        let prog = load(&name)?;
        if prog.main.is_none() || !check_program(&prog, CheckMode::KeepGoing).ok {
            continue;
        }
        let r = run_main(&prog, None, true)?;
        ensure(matches!(r.outcome, Outcome::AllFinished { .. } | Outcome::Deadlocked { .. }), || {
            format!("{name}: {}", r.outcome)
        })?;
        ran += 1;
        match r.replay {
            Some(Ok(_)) => replayed += 1,
            _ => replay_failures.push(name),
        }
    }
    ensure(ran >= 20, || format!("only {ran} runnable programs"))?;
    ensure(replayed >= 5, || format!("typed replay passed on {replayed}"))?;
    Ok(format!("{ran} programs ran, typed replay on {replayed} (not on {})", replay_failures.join(", ")))
}

fn criterion_10() -> Verdict {
    for name in ["listing1.lsst", "listing2.lsst"] {
        let prog = parse_lsst(&read_program(name)).map_err(|e| format!("{name}: {e}"))?;
        let target = translate(&lsst_type_check(&prog, CheckMode::KeepGoing)).map_err(|e| e.to_string())?;
        let report = check_program(&target, CheckMode::KeepGoing);
        ensure(report.ok, || format!("translation of {name}:\n{}", report.to_text()))?;
    }
    let start = Instant::now();
    let prog = parse_lsst(&read_program("compute.lsst")).map_err(|e| e.to_string())?;
    let target = translate(&lsst_type_check(&prog, CheckMode::KeepGoing)).map_err(|e| e.to_string())?;
    let report = check_program(&target, CheckMode::KeepGoing);
    ensure(report.ok, || report.to_text())?;
    let r = simulate_check(&prog, 10_000).map_err(|e| e.to_string())?;
    ensure(r.ok(), || r.to_text())?;
    ensure(r.max_resync <= DEFAULT_RESYNC_BOUND, || format!("resync {}", r.max_resync))?;
    within(Duration::from_secs(2), start, "simulation")?;
    Ok(format!(
        "{} LSST steps matched by {} LDGV steps, max {} per step, main = {}",
        r.lsst_steps,
        r.ldgv_steps,
        r.max_resync,
        r.lsst_value.unwrap_or_default()
    ))
}

fn criterion_11() -> Verdict {
    let prog = load("appendix_b.ldgv")?;
    let def = prog.defs.iter().find(|d| d.name.as_str() == "sendNode").ok_or("no sendNode")?;
    let c = Checker::new();
    let r = c.type_synth(&TypeEnv::new(), &def.body).map_err(|e| e.to_string())?;
    let ty = |s: &str| parse_type(s, &prog.type_defs).map_err(|e| e.to_string());
    let target = Type::pi(
        Multiplicity::Un,
        Name::new("n"),
        ty("Node")?,
        Type::pi(Multiplicity::Un, Name::new("c"), ty("NodeC")?, Type::Unit),
    );
    c.sub_synth(&TypeEnv::new(), &r.ty, &target).map_err(|e| format!("{} <= {target}: {e}", r.ty))?;
    ensure(r.out.is_unrestricted(), || "output environment is linear".into())?;
    Ok(format!("synthesized {}", r.ty))
}

fn criterion_12() -> Verdict {
    let mut rejected = 0;
    for name in ldgv_files("negative") {
        let src = read_program(&name);
        let want = src
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("// expect:"))
            .map(str::trim)
            .ok_or_else(|| format!("{name} has no expectation"))?;
        let code = match parse_ldgv(&src) {
            Err(_) => "ParseError".to_string(),
            Ok(prog) => match check_program(&prog, CheckMode::KeepGoing).first_error() {
                Some(e) => e.code.to_string(),
                None => "accepted".to_string(),
            },
        };
        ensure(code == want, || format!("{name}: expected {want}, got {code}"))?;
        rejected += 1;
    }
    ensure(rejected >= 10, || format!("only {rejected} negative programs"))?;
    Ok(format!("{rejected} programs rejected with the expected codes"))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut failed = 0;
    for (i, f) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match verdict {
            Ok(detail) => println!("criterion {:>2}: pass ({detail}; {ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL ({ms} ms)\n    {}", i + 1, why.replace('\n', "\n    "));
            }
        }
    }
    println!("{} of 12 criteria pass", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
