mod common;

use common::{ldgv_files, read_program};
use ldst::checker::{check_program, CheckMode};
use ldst::eval::{run_program, Outcome, RunOptions};
use ldst::parser::parse_ldgv;

fn main_of(name: &str) -> String {
    let prog = parse_ldgv(&read_program(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    let r = run_program(&prog, &RunOptions::default()).unwrap();
    match r.outcome.main_value() {
        Some(v) => v.to_string(),
        None => r.outcome.name().to_string(),
    }
}

#[test]
fn ldgv_corpus_checks() {
    for name in ldgv_files("").into_iter().chain(ldgv_files("corpus")) {
        let prog = parse_ldgv(&read_program(&name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let report = check_program(&prog, CheckMode::KeepGoing);
        assert!(report.ok, "{name}:\n{}", report.to_text());
    }
}

#[test]
fn golden_results() {
    for (name, want) in [
        ("compute.ldgv", "-5"),
        ("compute_add.ldgv", "7"),
        ("sum.ldgv", "6"),
        ("sum_zero.ldgv", "0"),
        ("nodes.ldgv", "<<Node, 42>, <Empty, ()>>"),
        ("corpus/ping.ldgv", "42"),
        ("corpus/relay.ldgv", "105"),
        ("corpus/nat_fold.ldgv", "12"),
        ("corpus/delegate.ldgv", "9"),
        ("corpus/two_clients.ldgv", "-7"),
        ("corpus/deadlock.ldgv", "deadlocked"),
    ] {
        assert_eq!(main_of(name), want, "{name}");
    }
}

#[test]
fn seeded_schedules_agree() {
    let prog = parse_ldgv(&read_program("corpus/two_clients.ldgv")).unwrap();
    for seed in 0..10 {
        let r = run_program(&prog, &RunOptions { seed: Some(seed), ..Default::default() }).unwrap();
        assert!(matches!(r.outcome, Outcome::AllFinished { .. }), "seed {seed}: {}", r.outcome);
        assert_eq!(r.outcome.main_value().unwrap().to_string(), "-7");
    }
}
