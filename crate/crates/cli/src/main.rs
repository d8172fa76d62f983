//! The `ldst` command-line driver.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use ldst::ast::{dual, print_program, Name, Program, Type};
use ldst::checker::{check_program, CheckMode, Checker};
use ldst::env::TypeEnv;
use ldst::eval::{run_program, Outcome, RunOptions, DEFAULT_MAX_STEPS};
use ldst::lsst::{lsst_type_check, simulate_check, translate};
use ldst::parser::{parse_ldgv, parse_lsst, parse_type};

#[derive(Parser)]
#[command(name = "ldst", version, about = "Checker, evaluator and translator for label-dependent session types")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Step budget for `run` and `simulate` (overrides LDST_FUEL).
    #[arg(long, global = true)]
    fuel: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program; `.lsst` files use the LSST checker.
    Check { file: PathBuf },
    /// Type-check and evaluate `main` of an LDGV program.
    Run {
        file: PathBuf,
        /// Print one line per reduction step.
        #[arg(long)]
        trace: bool,
        /// Randomise the scheduler with this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Type-check every intermediate configuration.
        #[arg(long)]
        typed_replay: bool,
    },
    /// Translate an LSST program into LDGV source.
    Translate {
        file: PathBuf,
        /// Write the result here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the dual of a session type.
    Dual {
        /// LDGV file whose type abbreviations are in scope.
        file: Option<PathBuf>,
        #[arg(long = "type")]
        ty: String,
    },
    /// Decide subtyping between two types.
    Sub {
        /// LDGV file whose type abbreviations are in scope.
        file: Option<PathBuf>,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Run an LSST program alongside its translation.
    Simulate { file: PathBuf },
}

/// A failure and its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn failed(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

/// What a command produced: text for humans, JSON for tools, and whether it succeeded.
struct Output {
    text: String,
    json: Json,
    ok: bool,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_ldgv(path: &Path) -> Result<Program, Failure> {
    parse_ldgv(&read(path)?).map_err(|e| failed(format!("{}:{e}", path.display())))
}

fn fuel(flag: Option<usize>) -> Result<usize, Failure> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("LDST_FUEL") {
            Ok(s) => s.trim().parse().map_err(|_| usage(format!("LDST_FUEL is not a number: `{s}`")))?,
            Err(_) => DEFAULT_MAX_STEPS,
        },
    };
    if n == 0 {
        return Err(usage("fuel must be positive"));
    }
    Ok(n)
}

fn outcome_json(o: &Outcome) -> Json {
    match o {
        Outcome::AllFinished { values } => json!({
            "status": o.name(),
            "threads": values.iter().map(|(t, v)| json!({"id": t, "value": v.to_string()})).collect::<Vec<_>>(),
        }),
        Outcome::Deadlocked { blocked, finished } => json!({
            "status": o.name(),
            "threads": finished.iter().map(|(t, v)| json!({"id": t, "value": v.to_string()})).collect::<Vec<_>>(),
            "blocked": blocked,
        }),
        Outcome::Stuck { thread, reason } => json!({"status": o.name(), "thread": thread, "reason": reason}),
        Outcome::OutOfFuel { steps } => json!({"status": o.name(), "steps": steps}),
    }
}

fn is_lsst(file: &Path) -> bool {
    file.extension().is_some_and(|e| e == "lsst")
}

fn cmd_check(file: &Path) -> Result<Output, Failure> {
    let report = if is_lsst(file) {
        let prog = parse_lsst(&read(file)?).map_err(|e| failed(format!("{}:{e}", file.display())))?;
        lsst_type_check(&prog, CheckMode::KeepGoing).report
    } else {
        check_program(&load_ldgv(file)?, CheckMode::KeepGoing)
    };
    Ok(Output { text: report.to_text(), json: json!({"command": "check", "report": report}), ok: report.ok })
}

fn cmd_run(file: &Path, opts: RunOptions) -> Result<Output, Failure> {
    let prog = load_ldgv(file)?;
    let report = check_program(&prog, CheckMode::KeepGoing);
    if !report.ok {
        return Err(failed(format!("{} does not type-check:\n{}", file.display(), report.to_text())));
    }
    let r = run_program(&prog, &opts).map_err(|e| failed(e.to_string()))?;
    let mut text = String::new();
    for e in &r.trace {
        let _ = writeln!(text, "{e}");
    }
    if let Some(v) = r.outcome.main_value() {
        let _ = writeln!(text, "main = {v}");
    }
    let _ = writeln!(text, "{}", r.outcome);
    let _ = writeln!(text, "steps: {}", r.steps);
    let replay = match &r.replay {
        None => Json::Null,
        Some(Ok(n)) => {
            let _ = writeln!(text, "typed replay: {n} configurations checked");
            json!({"ok": true, "checked": n})
        }
        Some(Err(e)) => {
            let _ = writeln!(text, "typed replay failed: {e}");
            json!({"ok": false, "error": e.to_string()})
        }
    };
    let ok = matches!(r.outcome, Outcome::AllFinished { .. }) && !matches!(r.replay, Some(Err(_)));
    let json = json!({
        "command": "run",
        "main": r.outcome.main_value().map(|v| v.to_string()),
        "outcome": outcome_json(&r.outcome),
        "steps": r.steps,
        "trace": if opts.trace { serde_json::to_value(&r.trace).unwrap_or(Json::Null) } else { Json::Null },
        "replay": replay,
    });
    Ok(Output { text, json, ok })
}

fn cmd_translate(file: &Path, output: Option<&Path>) -> Result<Output, Failure> {
    let prog = parse_lsst(&read(file)?).map_err(|e| failed(format!("{}:{e}", file.display())))?;
    let tp = lsst_type_check(&prog, CheckMode::KeepGoing);
    if !tp.is_ok() {
        return Err(failed(format!("{} does not type-check:\n{}", file.display(), tp.report.to_text())));
    }
    let source = print_program(&translate(&tp).map_err(|e| failed(e.to_string()))?);
    if let Some(out) = output {
        std::fs::write(out, &source).map_err(|e| failed(format!("cannot write {}: {e}", out.display())))?;
        let text = format!("wrote {}\n", out.display());
        return Ok(Output { text, json: json!({"command": "translate", "output": out}), ok: true });
    }
    Ok(Output { text: source.clone(), json: json!({"command": "translate", "source": source}), ok: true })
}

fn type_defs(file: Option<&Path>) -> Result<Vec<(Name, Type)>, Failure> {
    Ok(match file {
        Some(f) => load_ldgv(f)?.type_defs,
        None => Vec::new(),
    })
}

fn parse_arg(src: &str, defs: &[(Name, Type)]) -> Result<Type, Failure> {
    parse_type(src, defs).map_err(|e| usage(format!("in type `{src}`: {e}")))
}

fn cmd_dual(file: Option<&Path>, ty: &str) -> Result<Output, Failure> {
    let t = parse_arg(ty, &type_defs(file)?)?;
    let d = dual(&t).map_err(|e| failed(e.to_string()))?;
    Ok(Output { text: format!("{d}\n"), json: json!({"command": "dual", "type": t.to_string(), "dual": d.to_string()}), ok: true })
}

fn cmd_sub(file: Option<&Path>, left: &str, right: &str) -> Result<Output, Failure> {
    let defs = type_defs(file)?;
    let (a, b) = (parse_arg(left, &defs)?, parse_arg(right, &defs)?);
    let base = json!({"command": "sub", "left": a.to_string(), "right": b.to_string()});
    Ok(match Checker::new().sub_synth(&TypeEnv::new(), &a, &b) {
        Ok(k) => {
            let mut json = base;
            json["subtype"] = json!(true);
            json["kind"] = json!(k.to_string());
            json["multiplicity"] = json!(k.mult.to_string());
            Output { text: format!("subtype at {} (kind {k})\n", k.mult), json, ok: true }
        }
        Err(e) => {
            let mut json = base;
            json["subtype"] = json!(false);
            json["error"] = json!({"code": e.code, "message": e.message});
            Output { text: format!("not a subtype: {e}\n"), json, ok: false }
        }
    })
}

fn cmd_simulate(file: &Path, max_steps: usize) -> Result<Output, Failure> {
    let prog = parse_lsst(&read(file)?).map_err(|e| failed(format!("{}:{e}", file.display())))?;
    let r = simulate_check(&prog, max_steps).map_err(|e| failed(e.to_string()))?;
    let mut json = serde_json::to_value(&r).unwrap_or(Json::Null);
    json["command"] = json!("simulate");
    json["ok"] = json!(r.ok());
    Ok(Output { text: r.to_text(), json, ok: r.ok() })
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Check { file } => cmd_check(file),
        Command::Run { file, trace, seed, typed_replay } => {
            let opts =
                RunOptions { max_steps: Some(fuel(cli.fuel)?), seed: *seed, trace: *trace, typed_replay: *typed_replay };
            cmd_run(file, opts)
        }
        Command::Translate { file, output } => cmd_translate(file, output.as_deref()),
        Command::Dual { file, ty } => cmd_dual(file.as_deref(), ty),
        Command::Sub { file, left, right } => cmd_sub(file.as_deref(), left, right),
        Command::Simulate { file } => cmd_simulate(file, fuel(cli.fuel)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            // A closed pipe is not an error worth reporting.
            let mut stdout = std::io::stdout().lock();
            let _ = match cli.format {
                Format::Text => write!(stdout, "{}", out.text),
                Format::Structured => writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("json")),
            };
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            if cli.format == Format::Structured {
                println!("{}", json!({"error": f.message, "exit": f.code}));
            }
            eprintln!("ldst: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
