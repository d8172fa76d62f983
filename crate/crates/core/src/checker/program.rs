use std::fmt::Write as _;

use serde::Serialize;

use crate::ast::{Def, Kind, Multiplicity, Program, SourcePos, Type};
use crate::env::TypeEnv;

use super::{CheckError, Checker, ErrorCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Stop at the first failing definition; the rest are skipped.
    FirstError,
    #[default]
    KeepGoing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub code: ErrorCode,
    pub message: String,
    pub pos: Option<SourcePos>,
    pub trace: Vec<String>,
}

impl From<&CheckError> for ErrorInfo {
    fn from(e: &CheckError) -> Self {
        ErrorInfo {
            code: e.code,
            message: e.message.clone(),
            pos: e.pos,
            trace: e.trace.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefReport {
    pub name: String,
    pub status: Status,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub error: Option<ErrorInfo>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub ok: bool,
    pub defs: Vec<DefReport>,
}

impl Report {
    pub fn errors(&self) -> impl Iterator<Item = (&str, &ErrorInfo)> {
        self.defs.iter().filter_map(|d| d.error.as_ref().map(|e| (d.name.as_str(), e)))
    }

    pub fn first_error(&self) -> Option<&ErrorInfo> {
        self.errors().next().map(|(_, e)| e)
    }

    /// One line per definition, followed by indented error details.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for d in &self.defs {
            match d.status {
                Status::Ok => {
                    let _ = writeln!(s, "ok      {} : {}", d.name, d.ty.as_deref().unwrap_or("?"));
                }
                Status::Skipped => {
                    let _ = writeln!(s, "skipped {}", d.name);
                }
                Status::Failed => {
                    let e = d.error.as_ref().expect("failed definitions carry an error");
                    let pos = e.pos.map(|p| format!("{p}: ")).unwrap_or_default();
                    let _ = writeln!(s, "FAILED  {}: {pos}{}: {}", d.name, e.code, e.message);
                    let _ = writeln!(s, "        trace: {}", e.trace.join(" > "));
                }
            }
        }
        let failed = self.defs.iter().filter(|d| d.status == Status::Failed).count();
        let _ = writeln!(s, "{} definitions, {failed} failed", self.defs.len());
        s
    }
}

/// Checks a program with the default fuel.
pub fn check_program(prog: &Program, mode: CheckMode) -> Report {
    Checker::new().check_program(prog, mode)
}

impl Checker {
    /// Checks definitions in order, then `main`. Every global must have an
    /// unrestricted type.
    pub fn check_program(&self, prog: &Program, mode: CheckMode) -> Report {
        let mut env = TypeEnv::new();
        let mut report = Report { ok: true, defs: Vec::new() };
        let mut stop = false;
        for d in prog.defs.iter().chain(prog.main.iter()) {
            if stop {
                report.defs.push(DefReport { name: d.name.to_string(), status: Status::Skipped, ty: None, error: None });
                continue;
            }
            let r = self.check_def(&env, d);
            match r {
                Ok(ty) => {
                    report.defs.push(DefReport {
                        name: d.name.to_string(),
                        status: Status::Ok,
                        ty: Some(ty.to_string()),
                        error: None,
                    });
                    env = env.bind(d.name.clone(), ty, Multiplicity::Un);
                }
                Err(e) => {
                    let e = e.at(d.pos);
                    report.ok = false;
                    report.defs.push(DefReport {
                        name: d.name.to_string(),
                        status: Status::Failed,
                        ty: d.declared.as_ref().map(|t| t.to_string()),
                        error: Some(ErrorInfo::from(&e)),
                    });
                    if let Some(t) = &d.declared {
                        env = env.bind(d.name.clone(), t.clone(), Multiplicity::Un);
                    }
                    stop = mode == CheckMode::FirstError;
                }
            }
        }
        report
    }

    /// The type under which a definition enters the global environment.
    pub fn check_def(&self, env: &TypeEnv, d: &Def) -> Result<Type, CheckError> {
        self.stack.borrow_mut().clear();
        *self.depth.borrow_mut() = 0;
        let ty = match &d.declared {
            Some(t) => {
                self.kind_check(env, t, Kind::GU).map_err(|e| {
                    if e.code == ErrorCode::KindMismatch {
                        self.err(ErrorCode::LinearityViolation, format!("global `{}` must have an unrestricted type", d.name))
                    } else {
                        e
                    }
                })?;
                self.type_check(env, &d.body, t)?;
                t.clone()
            }
            None => {
                let r = self.type_synth(env, &d.body)?;
                let k = self.kind_synth(env, &r.ty)?;
                if k.mult == Multiplicity::Lin {
                    return Err(self.err(
                        ErrorCode::LinearityViolation,
                        format!("global `{}` has linear type {}", d.name, r.ty),
                    ));
                }
                r.ty
            }
        };
        Ok(ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_ldgv;

    #[test]
    fn report_modes() {
        let src = "bad : Int\nbad = ()\nok : Int\nok = 1\n";
        let p = parse_ldgv(src).unwrap();
        let r = check_program(&p, CheckMode::KeepGoing);
        assert!(!r.ok);
        assert_eq!(r.defs[0].status, Status::Failed);
        assert_eq!(r.defs[1].status, Status::Ok);
        assert_eq!(r.first_error().unwrap().code, ErrorCode::NotASubtype);
        assert!(!r.first_error().unwrap().trace.is_empty());
        let r = check_program(&p, CheckMode::FirstError);
        assert_eq!(r.defs[1].status, Status::Skipped);
        assert!(r.to_text().contains("FAILED  bad"));
    }

    #[test]
    fn globals_are_visible_later() {
        let src = "one : Int\none = 1\ntwo = one + one\n";
        let r = check_program(&parse_ldgv(src).unwrap(), CheckMode::KeepGoing);
        assert!(r.ok, "{}", r.to_text());
        assert_eq!(r.defs[1].ty.as_deref(), Some("Int"));
    }
}
