use crate::ast::{dual, Kind, Multiplicity, Process, Type};
use crate::env::TypeEnv;

use super::{CResult, Checker, ErrorCode};

impl Checker {
    /// Checks a process and returns the bindings it leaves unused.
    pub fn check_process(&self, g: &TypeEnv, p: &Process) -> CResult<TypeEnv> {
        match p {
            Process::Expr(e) => {
                let _r = self.rule("Proc-Expr");
                let r = self.type_synth(g, e)?;
                match self.unfold(&r.out, &r.ty)? {
                    Type::Unit | Type::End => Ok(r.out),
                    t => Err(self.err(ErrorCode::NotASubtype, format!("thread has type {t}, expected Unit or End"))),
                }
            }
            Process::Par(a, b) => {
                let _r = self.rule("Proc-Par");
                let t1 = self.check_process(g, a)?;
                self.check_process(&t1, b)
            }
            Process::Nu { c, d, session, body } => {
                let _r = self.rule("Proc-Channel");
                self.kind_check(&g.unr(), session, Kind::SL)?;
                let ds = dual(session).map_err(|e| self.err(ErrorCode::KindMismatch, e.to_string()))?;
                let g1 = self.bind(g, c, session)?;
                let g1 = self.bind(&g1, d, &ds)?;
                let out = self.check_process(&g1, body)?;
                for x in [c, d] {
                    if let Some((_, Multiplicity::Lin)) = out.lookup_term(x) {
                        return Err(self.err(
                            ErrorCode::LinearityViolation,
                            format!("channel end `{x}` is not used up"),
                        ));
                    }
                }
                Ok(out.remove(c).remove(d))
            }
        }
    }

    /// A closed process must use every linear resource it binds.
    pub fn check_closed_process(&self, g: &TypeEnv, p: &Process) -> CResult<()> {
        let out = self.check_process(g, p)?;
        match out.linear_names().first() {
            Some(x) => Err(self.err(ErrorCode::LinearityViolation, format!("`{x}` is never used"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Expr, Name, Value};
    use crate::parser::parse_type;

    #[test]
    fn process_examples() {
        let c = Checker::new();
        c.check_closed_process(&TypeEnv::new(), &Process::Expr(Expr::Val(Value::Unit))).unwrap();
        let s = parse_type("!(x:{A}) End", &[]).unwrap();
        let send = Expr::app(Expr::Send(Box::new(Expr::var("c"))), Expr::Val(Value::label("A")));
        let recv = Expr::let_pair("x", "y", Expr::Recv(Box::new(Expr::var("d"))), Expr::Val(Value::Unit));
        let p = Process::Nu {
            c: Name::new("c"),
            d: Name::new("d"),
            session: s.clone(),
            body: Box::new(Process::par(Process::Expr(send), Process::Expr(recv))),
        };
        c.check_closed_process(&TypeEnv::new(), &p).unwrap();
        let lonely = Process::Nu {
            c: Name::new("c"),
            d: Name::new("d"),
            session: s,
            body: Box::new(Process::Expr(Expr::Val(Value::Unit))),
        };
        assert_eq!(c.check_closed_process(&TypeEnv::new(), &lonely).unwrap_err().code, ErrorCode::LinearityViolation);
        let free = Process::Expr(Expr::var("c"));
        assert_eq!(c.check_closed_process(&TypeEnv::new(), &free).unwrap_err().code, ErrorCode::UnboundName);
    }
}
